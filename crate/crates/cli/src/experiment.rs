use std::fs::{self, File};
use std::io::BufWriter;

use anyhow::{anyhow, Context, Result};
use gtsarah::algorithms::{derive_seed, Algorithm};
use gtsarah::data::{
    load, prepare, synthesize_logistic, synthesize_quadratic, LogisticSynth, PrepareOptions,
};
use gtsarah::engine::{epoch_budget, run_replicates, EngineError, RunOptions};
use gtsarah::graph::lazy_metropolis_weights;
use gtsarah::objective::FiniteSumProblem;
use gtsarah::MixingMatrix64;

use crate::build_topology;
use crate::config::{parse_label_rule, parse_synth_kind, DatasetConfig, ExperimentConfig};

const DATA_STREAM: u64 = 0xDA7A;

/// Errors mapped to process exit codes.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Diverged(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Diverged(_) => 2,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Diverged(e) => e,
        }
    }
}

type Problem = Box<dyn FiniteSumProblem<f64>>;

fn build_problem(cfg: &ExperimentConfig, n: usize) -> Result<Problem> {
    let data_seed = |own: Option<u64>| own.unwrap_or_else(|| derive_seed(cfg.seed, DATA_STREAM));
    match &cfg.dataset {
        DatasetConfig::Synthetic { family, kind, m, p, reg, label_noise, heterogeneity, seed } => {
            let kind = parse_synth_kind(kind)?;
            let seed = data_seed(*seed);
            if family == "quadratic" {
                Ok(Box::new(synthesize_quadratic::<f64>(kind, n, *m, *p, seed)?))
            } else {
                let spec = LogisticSynth {
                    kind,
                    n,
                    m: *m,
                    p: *p,
                    seed,
                    reg: *reg,
                    label_noise: *label_noise,
                    heterogeneity: *heterogeneity,
                };
                Ok(Box::new(synthesize_logistic::<f64>(&spec)?))
            }
        }
        DatasetConfig::File { path, format, label_rule, dim, cap, reg, seed } => {
            let format = format.as_deref().map(str::parse).transpose()?;
            let raw = load::<f64>(path, format, *dim)
                .with_context(|| format!("loading {}", path.display()))?;
            let rule = parse_label_rule(label_rule)?;
            let opts = PrepareOptions { cap: *cap, reg: *reg };
            let (ds, part) = prepare(&raw, n, data_seed(*seed), &rule, &opts)?;
            println!(
                "dataset={} samples={} usable={} m={} dropped_label={} dropped_zero={} dropped_cap={} dropped_surplus={}",
                path.display(),
                raw.len(),
                part.usable,
                part.m,
                part.dropped_by_label,
                part.dropped_zero,
                part.dropped_by_cap,
                part.dropped_surplus
            );
            Ok(Box::new(ds))
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let topo = build_topology(&cfg.topology.kind, size_arg(cfg).as_deref(), cfg.topology.edges.as_deref())
        .map_err(Failure::Config)?;
    let weights: MixingMatrix64 = lazy_metropolis_weights(&topo).map_err(|e| Failure::Config(e.into()))?;
    let n = topo.n();
    let problem = build_problem(cfg, n).map_err(Failure::Config)?;
    let m = problem.components();
    println!(
        "topology={} n={n} lambda={} m={m} p={} L={}",
        topo.kind(),
        weights.lambda(),
        problem.dim(),
        problem.smoothness()
    );

    let mut plans = Vec::new();
    for (k, a) in cfg.algorithms.iter().enumerate() {
        let mut rc = a
            .run_config(m, derive_seed(cfg.seed, k as u64 + 1))
            .map_err(Failure::Config)?;
        if let Some(e) = cfg.epochs {
            rc = epoch_budget(&rc, m, e);
        }
        plans.push((a.label(), rc));
    }
    fs::create_dir_all(&cfg.output)
        .with_context(|| format!("creating {}", cfg.output.display()))
        .map_err(Failure::Config)?;
    let options = RunOptions {
        record_every: cfg.record_every,
        def33: cfg.def33.into(),
        threads: cfg.threads,
        x0: None,
    };

    println!(
        "{:<12} {:>3} {:>20} {:>12} {:>8} {:>9} {:>12} {:>10} {:>12} {:>12} {:>12}",
        "algorithm", "rep", "seed", "alpha", "iters", "epochs", "grads", "rounds", "gap_start", "gap_final", "def33_mean"
    );
    let mut diverged = Vec::new();
    for (label, rc) in &plans {
        let traces = match run_replicates(problem.as_ref(), &weights, rc, &options, cfg.replicates) {
            Ok(t) => t,
            Err(EngineError::Diverged { outer, inner, norm }) => {
                eprintln!("{label}: diverged at s={outer} t={inner} (state norm {norm:e})");
                diverged.push(label.clone());
                continue;
            }
            Err(e) => return Err(Failure::Config(anyhow!(e).context(format!("algorithm `{label}`")))),
        };
        let iters = match rc.algorithm {
            Algorithm::GtSarah => rc.outer,
            _ => rc.baseline_steps(),
        };
        for (r, tr) in traces.iter().enumerate() {
            let path = cfg.output.join(format!("{label}_r{r}.csv"));
            let file = File::create(&path)
                .with_context(|| format!("creating {}", path.display()))
                .map_err(Failure::Config)?;
            tr.write_csv(BufWriter::new(file))
                .with_context(|| format!("writing {}", path.display()))
                .map_err(Failure::Config)?;
            let first = tr.records.first().expect("runs record their start");
            let last = tr.last().expect("runs record their end");
            println!(
                "{:<12} {:>3} {:>20} {:>12.5e} {:>8} {:>9.3} {:>12} {:>10} {:>12.5e} {:>12.5e} {:>12.5e}",
                label,
                r,
                tr.seed,
                tr.alpha,
                iters,
                last.epochs,
                last.grads_total,
                last.comm_rounds,
                first.stationary_gap,
                last.stationary_gap,
                last.def33_mean
            );
        }
    }
    if !diverged.is_empty() {
        return Err(Failure::Diverged(anyhow!(
            "divergence guard tripped for: {}",
            diverged.join(", ")
        )));
    }
    Ok(())
}

fn size_arg(cfg: &ExperimentConfig) -> Option<String> {
    cfg.topology
        .size
        .clone()
        .or_else(|| cfg.topology.n.map(|n| n.to_string()))
}
