//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gtsarah::algorithms::{
    gt_sarah_cycle_handoff, gt_sarah_inner_step, gt_sarah_outer_init, max_stepsize, node_rng,
    Algorithm, Executor, GtSarahParams, NetworkState, NodeRngs, RunConfig, Sampling, StepSize,
    StepSizeBound,
};
use gtsarah::data::{synthesize_logistic, synthesize_quadratic, LogisticSynth, SynthKind};
use gtsarah::engine::{
    outer_iteration_bound, run, Def33Mode, InitialConditions, RunOptions,
};
use gtsarah::graph::{build_topology, lazy_metropolis_weights, Topology, TopologyKind};
use gtsarah::objective::{batch_gradient, FiniteSumProblem, LogisticDataset};
use gtsarah::MixingMatrix64;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn weights(kind: TopologyKind, n: usize) -> MixingMatrix64 {
    lazy_metropolis_weights(&build_topology(kind, n).unwrap()).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn spectral_anchors() -> Outcome {
    let timed = |kind, n| {
        let t = Instant::now();
        let w = weights(kind, n);
        (w.lambda(), t.elapsed())
    };
    let (exp, t_exp) = timed(TopologyKind::Exponential, 10);
    let (grid, t_grid) = timed(TopologyKind::Grid { rows: 10, cols: 10 }, 100);
    let second = Duration::from_secs(1);
    let pass = (0.68..=0.74).contains(&exp)
        && (0.985..=0.995).contains(&grid)
        && t_exp < second
        && t_grid < second;
    outcome(
        pass,
        format!("exponential-10 λ={exp:.6} ({t_exp:.2?}), grid-10x10 λ={grid:.6} ({t_grid:.2?})"),
    )
}

fn cost_accounting() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    for case in 0..20 {
        let n = rng.gen_range(1..=8);
        let m = rng.gen_range(1..=20);
        let q = rng.gen_range(1..=12);
        let b = rng.gen_range(1..=m);
        let s = rng.gen_range(1..=5);
        let prob = synthesize_quadratic::<f64>(SynthKind::Heterogeneous, n, m, 2, case).unwrap();
        let w = if n == 1 { MixingMatrix64::identity_single() } else { weights(TopologyKind::Ring, n) };
        let mut cfg = RunConfig::new(Algorithm::GtSarah);
        cfg.alpha = StepSize::Auto;
        cfg.batch = b;
        cfg.q = q;
        cfg.outer = s;
        cfg.seed = case;
        let opts = RunOptions { def33: Def33Mode::Off, ..RunOptions::default() };
        let tr = run(&prob, &w, &cfg, &opts).unwrap();
        let grads = (s * n * (m + 2 * q * b)) as u64;
        let rounds = (s * (q + 1)) as u64;
        let last = tr.last().unwrap();
        if tr.counters.gradients != grads
            || tr.counters.rounds != rounds
            || last.grads_total != grads
            || last.comm_rounds != rounds
            || last.epochs != grads as f64 / (n * m) as f64
        {
            failures.push(format!("(n={n},m={m},q={q},B={b},S={s})"));
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(10);
    outcome(pass, format!("20 tuples, {} mismatches {failures:?} ({elapsed:.2?})", failures.len()))
}

fn tracking_conservation() -> Outcome {
    let spec = LogisticSynth { n: 8, m: 60, p: 6, seed: 3, ..LogisticSynth::default() };
    let prob = synthesize_logistic::<f64>(&spec).unwrap();
    let w = weights(TopologyKind::Ring, 8);
    let mut cfg = RunConfig::new(Algorithm::GtSarah);
    cfg.alpha = StepSize::Fixed(0.5);
    cfg.q = 20;
    cfg.batch = 2;
    cfg.outer = 3;
    let opts = RunOptions { def33: Def33Mode::Off, ..RunOptions::default() };
    let tr = run(&prob, &w, &cfg, &opts).unwrap();
    let dev = tr.max_tracking_deviation;
    outcome(dev <= 1e-10, format!("max ‖ȳ−v̄‖/(1+‖v̄‖) = {dev:.3e} over {} updates", 3 * 21))
}

/// Plain single-machine SARAH on `f_1`, drawing indices from the stream node 0 uses.
fn centralized_sarah(
    prob: &LogisticDataset<f64>,
    x0: &[f64],
    alpha: f64,
    q: usize,
    batch: usize,
    seed: u64,
    iterates: usize,
) -> Vec<Vec<f64>> {
    let m = prob.components();
    let p = prob.dim();
    let mut rng = node_rng(seed, 0);
    let mut x = x0.to_vec();
    let mut out = Vec::with_capacity(iterates);
    let mut g_now = vec![0.0; p];
    let mut g_then = vec![0.0; p];
    'outer: loop {
        let mut v = vec![0.0; p];
        for j in 0..m {
            prob.component_gradient(0, j, &x, &mut g_now);
            for d in 0..p {
                v[d] += g_now[d];
            }
        }
        v.iter_mut().for_each(|a| *a /= m as f64);
        let mut x_prev = x.clone();
        for d in 0..p {
            x[d] -= alpha * v[d];
        }
        out.push(x.clone());
        if out.len() == iterates {
            break;
        }
        for _ in 0..q {
            let mut est = vec![0.0; p];
            for _ in 0..batch {
                let j = rng.gen_range(0..m);
                prob.component_gradient(0, j, &x, &mut g_now);
                prob.component_gradient(0, j, &x_prev, &mut g_then);
                for d in 0..p {
                    est[d] += g_now[d] - g_then[d];
                }
            }
            for d in 0..p {
                v[d] += est[d] / batch as f64;
            }
            x_prev = x.clone();
            for d in 0..p {
                x[d] -= alpha * v[d];
            }
            out.push(x.clone());
            if out.len() == iterates {
                break 'outer;
            }
        }
    }
    out
}

fn centralized_reduction() -> Outcome {
    let spec = LogisticSynth { n: 1, m: 40, p: 5, seed: 8, reg: 0.05, ..LogisticSynth::default() };
    let prob = synthesize_logistic::<f64>(&spec).unwrap();
    let (alpha, q, batch, seed) = (0.8, 9, 2, 77);
    let x0 = [0.5, -0.3, 0.2, 0.0, 1.0];
    let oracle = centralized_sarah(&prob, &x0, alpha, q, batch, seed, 1000);

    let w = MixingMatrix64::identity_single();
    let params = GtSarahParams { alpha, batch, q, sampling: Sampling::Uniform };
    let exec = Executor::Sequential;
    let mut st = NetworkState::new(1, &x0);
    let mut rngs = NodeRngs::new(seed, 1);
    let mut worst = 0.0f64;
    let mut k = 0;
    while k < oracle.len() {
        gt_sarah_outer_init(&mut st, &prob, &w, &params, &exec).unwrap();
        let mut compare = |st: &NetworkState<f64>, k: &mut usize| {
            let x: Vec<f64> = st.x().row(0).to_vec();
            let diff: Vec<f64> = x.iter().zip(&oracle[*k]).map(|(a, b)| a - b).collect();
            worst = worst.max(norm(&diff) / norm(&oracle[*k]).max(1e-300));
            *k += 1;
        };
        compare(&st, &mut k);
        for _ in 0..q {
            if k == oracle.len() {
                break;
            }
            gt_sarah_inner_step(&mut st, &prob, &w, &params, &mut rngs, &exec).unwrap();
            compare(&st, &mut k);
        }
        if k < oracle.len() {
            gt_sarah_cycle_handoff(&mut st, &params).unwrap();
        }
    }
    outcome(worst <= 1e-12, format!("max relative deviation {worst:.3e} over {k} iterates"))
}

fn conditional_unbiasedness() -> Outcome {
    let (n, m, p, node) = (3, 12, 3, 1);
    let spec = LogisticSynth { n, m, p, seed: 21, reg: 0.1, ..LogisticSynth::default() };
    let prob = synthesize_logistic::<f64>(&spec).unwrap();
    let w = weights(TopologyKind::Ring, n);
    let params = GtSarahParams { alpha: 0.7, batch: 1, q: 5, sampling: Sampling::Uniform };
    let exec = Executor::Sequential;
    let mut st = NetworkState::new(n, &[0.4, -1.0, 0.3]);
    let mut rngs = NodeRngs::new(0, n);
    gt_sarah_outer_init(&mut st, &prob, &w, &params, &exec).unwrap();
    for _ in 0..2 {
        gt_sarah_inner_step(&mut st, &prob, &w, &params, &mut rngs, &exec).unwrap();
    }
    let x = st.x().row(node).to_vec();
    let xp = st.x_prev().row(node).to_vec();
    let v = st.v().row(node).to_vec();
    let mut g1 = vec![0.0; p];
    let mut g2 = vec![0.0; p];
    let candidates: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            prob.component_gradient(node, j, &x, &mut g1);
            prob.component_gradient(node, j, &xp, &mut g2);
            (0..p).map(|d| g1[d] - g2[d] + v[d]).collect()
        })
        .collect();

    // Find, for every component, a stream whose draw at `node` selects it.
    let mut realized: Vec<Option<Vec<f64>>> = vec![None; m];
    let mut seed = 0u64;
    while realized.iter().any(Option::is_none) && seed < 10_000 {
        let mut trial = st.clone();
        let mut r = NodeRngs::new(seed, n);
        gt_sarah_inner_step(&mut trial, &prob, &w, &params, &mut r, &exec).unwrap();
        let out = trial.v().row(node).to_vec();
        if let Some(j) = (0..m).find(|&j| {
            let d: Vec<f64> = out.iter().zip(&candidates[j]).map(|(a, b)| a - b).collect();
            norm(&d) <= 1e-14 * (1.0 + norm(&candidates[j]))
        }) {
            realized[j].get_or_insert(out);
        }
        seed += 1;
    }
    let Some(all) = realized.into_iter().collect::<Option<Vec<_>>>() else {
        return outcome(false, "could not realize every draw".into());
    };
    let mean: Vec<f64> = (0..p).map(|d| all.iter().map(|r| r[d]).sum::<f64>() / m as f64).collect();
    let bx = batch_gradient(&prob, node, &x).unwrap();
    let bxp = batch_gradient(&prob, node, &xp).unwrap();
    let expect: Vec<f64> = (0..p).map(|d| bx[d] - bxp[d] + v[d]).collect();
    let err = norm(&mean.iter().zip(&expect).map(|(a, b)| a - b).collect::<Vec<_>>());
    outcome(err <= 1e-12, format!("all {m} draws enumerated, |mean − expectation| = {err:.3e}"))
}

fn random_connected(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> Topology {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        edges.push((a, b));
    }
    Topology::from_edges(n, edges).unwrap()
}

fn contraction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut suite: Vec<(String, Topology)> = Vec::new();
    for n in [2, 5, 10, 16] {
        for kind in [TopologyKind::Complete, TopologyKind::Ring, TopologyKind::Path, TopologyKind::Exponential] {
            suite.push((format!("{kind} {n}"), build_topology(kind, n).unwrap()));
        }
    }
    for (r, c) in [(3, 4), (5, 5), (10, 10)] {
        let kind = TopologyKind::Grid { rows: r, cols: c };
        suite.push((format!("{kind}"), build_topology(kind, r * c).unwrap()));
    }
    for n in [7, 20] {
        suite.push((format!("random {n}"), random_connected(n, n / 2, &mut rng)));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut failing = Vec::new();
    for (name, topo) in &suite {
        let w: MixingMatrix64 = lazy_metropolis_weights(topo).unwrap();
        let n = topo.n();
        let p = 3;
        let mut ok = true;
        for _ in 0..1000 {
            let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
            let x = Array2::from_shape_fn((n, p), |_| scale * rng.gen_range(-1.0..1.0));
            let dev = |a: &Array2<f64>| {
                let mean = a.mean_axis(ndarray::Axis(0)).unwrap();
                (a - &mean).iter().map(|v| v * v).sum::<f64>().sqrt()
            };
            let lhs = dev(&w.mix(x.view()));
            let rhs = w.lambda() * dev(&x);
            worst = worst.max(lhs - rhs);
            if lhs > rhs + 1e-9 {
                ok = false;
            }
        }
        if !ok {
            failing.push(name.clone());
        }
    }
    outcome(
        failing.is_empty(),
        format!(
            "{} topologies × 1000 vectors, max(‖Wx−Jx‖ − λ‖x−Jx‖) = {worst:.3e}, failing {failing:?}",
            suite.len()
        ),
    )
}

fn gradient_correctness() -> Outcome {
    let spec = LogisticSynth { n: 3, m: 20, p: 8, seed: 4, reg: 0.3, ..LogisticSynth::default() };
    let prob = synthesize_logistic::<f64>(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let i = rng.gen_range(0..3);
        let j = rng.gen_range(0..20);
        let x: Vec<f64> = (0..8).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mut g = vec![0.0; 8];
        prob.component_gradient(i, j, &x, &mut g);
        let fd: Vec<f64> = (0..8)
            .map(|d| {
                let mut a = x.clone();
                let mut b = x.clone();
                a[d] += h;
                b[d] -= h;
                (prob.component_value(i, j, &a) - prob.component_value(i, j, &b)) / (2.0 * h)
            })
            .collect();
        let err = norm(&fd.iter().zip(&g).map(|(a, b)| a - b).collect::<Vec<_>>()) / norm(&g);
        worst = worst.max(err);
    }
    outcome(worst <= 1e-6, format!("100 central-difference checks, max relative error {worst:.3e}"))
}

fn iteration_bound() -> Outcome {
    let start = Instant::now();
    let (n, m, p) = (4, 6, 2);
    let prob = synthesize_quadratic::<f64>(SynthKind::Heterogeneous, n, m, p, 12).unwrap();
    let w = weights(TopologyKind::Ring, n);
    let l = prob.smoothness();
    let q = m;
    let eps = 0.1;
    let alpha = max_stepsize(n, 1, q, w.lambda(), l, StepSizeBound::Complexity).unwrap();
    let x0 = vec![0.0; p];
    let init = InitialConditions::at(&prob, &x0).unwrap();
    let s = outer_iteration_bound(&init, alpha, q, eps, l).unwrap() as usize;
    let mut cfg = RunConfig::new(Algorithm::GtSarah);
    cfg.alpha = StepSize::Fixed(alpha);
    cfg.batch = 1;
    cfg.q = q;
    cfg.outer = s;
    cfg.seed = 5;
    let opts = RunOptions {
        def33: Def33Mode::EveryIterate,
        record_every: Some(q + 1),
        x0: Some(x0),
        ..RunOptions::default()
    };
    let tr = run(&prob, &w, &cfg, &opts).unwrap();
    let elapsed = start.elapsed();
    let pass = tr.def33_mean <= eps * eps
        && tr.def33_terms == (s * (q + 1)) as u64
        && elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "α={alpha:.4e}, S={s}, running mean {:.4e} vs ε²={:.0e} over {} iterates ({elapsed:.2?})",
            tr.def33_mean,
            eps * eps,
            tr.def33_terms
        ),
    )
}

fn final_gap(prob: &LogisticDataset<f64>, w: &MixingMatrix64, alg: Algorithm, alpha: f64, seed: u64) -> f64 {
    let m = prob.components();
    let mut cfg = RunConfig::new(alg);
    cfg.alpha = StepSize::Fixed(alpha);
    cfg.batch = 1;
    cfg.q = m;
    cfg.seed = seed;
    let cfg = gtsarah::engine::epoch_budget(&cfg, m, 30.0);
    let opts = RunOptions { def33: Def33Mode::Off, record_every: Some(usize::MAX), ..RunOptions::default() };
    match run(prob, w, &cfg, &opts) {
        Ok(tr) => {
            let g = tr.final_stationary_gap().unwrap();
            if g.is_finite() {
                g
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::INFINITY,
    }
}

fn qualitative_ordering() -> Outcome {
    let start = Instant::now();
    let w = weights(TopologyKind::Exponential, 10);
    let grid = [0.003, 0.01, 0.03, 0.1, 1.0];
    let mut wins = 0;
    let mut rows = Vec::new();
    for seed in 0..5u64 {
        let spec = LogisticSynth { n: 10, m: 1000, p: 20, seed: 100 + seed, ..LogisticSynth::default() };
        let prob = synthesize_logistic::<f64>(&spec).unwrap();
        let best = |alg| {
            grid.iter()
                .map(|&a| (final_gap(&prob, &w, alg, a, seed), a))
                .fold((f64::INFINITY, f64::NAN), |acc, x| if x.0 < acc.0 { x } else { acc })
        };
        let (gs, ags) = best(Algorithm::GtSarah);
        let (gt, agt) = best(Algorithm::Dsgt);
        let (gd, agd) = best(Algorithm::Dsgd);
        if gs <= gt && gs <= gd {
            wins += 1;
        }
        rows.push(format!(
            "seed {seed}: gt-sarah {gs:.2e} (α={ags}), dsgt {gt:.2e} (α={agt}), dsgd {gd:.2e} (α={agd})"
        ));
    }
    let elapsed = start.elapsed();
    for r in &rows {
        println!("      {r}");
    }
    outcome(
        wins >= 4 && elapsed < Duration::from_secs(300),
        format!("GT-SARAH best in {wins}/5 seeds at 30 epochs ({elapsed:.2?})"),
    )
}

fn determinism() -> Outcome {
    let spec = LogisticSynth { n: 6, m: 40, p: 5, seed: 1, ..LogisticSynth::default() };
    let prob = synthesize_logistic::<f64>(&spec).unwrap();
    let w = weights(TopologyKind::Exponential, 6);
    let mut identical = true;
    let mut csvs = 0;
    for alg in [Algorithm::GtSarah, Algorithm::Dsgt, Algorithm::Dsgd] {
        let mut cfg = RunConfig::new(alg);
        cfg.alpha = StepSize::Fixed(0.3);
        cfg.batch = 3;
        cfg.q = 10;
        cfg.outer = 4;
        cfg.seed = 31337;
        let csv = |threads: usize| {
            let opts = RunOptions { threads, record_every: Some(1), ..RunOptions::default() };
            run(&prob, &w, &cfg, &opts).unwrap().to_csv_string()
        };
        let reference = csv(1);
        for threads in [1, 2, 4, 8] {
            identical &= csv(threads) == reference;
            csvs += 1;
        }
    }
    outcome(identical, format!("{csvs} CSVs across 3 algorithms and 1-8 threads byte-identical: {identical}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("spectral anchors", spectral_anchors),
        ("cost accounting", cost_accounting),
        ("tracking conservation", tracking_conservation),
        ("centralized reduction", centralized_reduction),
        ("conditional unbiasedness", conditional_unbiasedness),
        ("mixing contraction", contraction),
        ("logistic gradient", gradient_correctness),
        ("outer-iteration bound", iteration_bound),
        ("qualitative ordering", qualitative_ordering),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let res = check();
        if !res.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if res.pass { "PASS" } else { "FAIL" },
            k + 1,
            res.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
