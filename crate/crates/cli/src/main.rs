mod config;
mod experiment;

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use gtsarah::algorithms::{
    classify_regime, communication_batch_threshold, gradient_batch_threshold, max_stepsize,
    predicted_complexity, recommend_parameters, BatchGoal, StepSizeBound,
};
use gtsarah::graph::{lazy_metropolis_weights, validate_mixing, Topology, TopologySpec};
use gtsarah::MixingMatrix64;

use crate::config::ExperimentConfig;
use crate::experiment::{run_experiment, Failure};

#[derive(Parser)]
#[command(name = "gtsarah", version, about = "Decentralized GT-SARAH experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a topology, report its lazy Metropolis weights and spectral gap.
    Weights {
        /// complete, ring, path, grid, exponential or custom.
        kind: String,
        /// Node count, or RxC for grids. Omit for custom graphs.
        size: Option<String>,
        /// Edge-list file for custom graphs.
        #[arg(long)]
        edges: Option<PathBuf>,
        /// Write W as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicates: Option<usize>,
        /// Print the effective config and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Recommend B, q and alpha and predict complexity.
    Plan {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = Goal::Gradient)]
        goal: Goal,
        /// Initial optimality measure entering the complexity expressions.
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        /// Smoothness constant.
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Goal {
    Gradient,
    Communication,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Weights { kind, size, edges, csv } => {
            cmd_weights(&kind, size.as_deref(), edges, csv).map_err(Failure::Config)
        }
        Command::Run { config, out, seed, replicates, dump_config } => {
            cmd_run(config, out, seed, replicates, dump_config)
        }
        Command::Plan { n, m, lambda, epsilon, goal, delta, l } => {
            cmd_plan(n, m, lambda, epsilon, goal, delta, l).map_err(Failure::Config)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}

pub(crate) fn build_topology(
    kind: &str,
    size: Option<&str>,
    edges: Option<&std::path::Path>,
) -> Result<Topology> {
    if kind.trim().eq_ignore_ascii_case("custom") {
        let path = edges.context("custom topologies need an edge-list file")?;
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        return Ok(Topology::read_edge_list(std::io::BufReader::new(file))?);
    }
    let size = size.context("topology size missing")?;
    Ok(TopologySpec::parse(kind, size)?.build()?)
}

fn cmd_weights(kind: &str, size: Option<&str>, edges: Option<PathBuf>, csv: Option<PathBuf>) -> Result<()> {
    let topo = build_topology(kind, size, edges.as_deref())?;
    let w: MixingMatrix64 = lazy_metropolis_weights(&topo)?;
    let report = validate_mixing(w.entries());
    println!("topology={}", topo.kind());
    println!("n={}", topo.n());
    println!("edges={}", topo.edge_count());
    println!("lambda={}", w.lambda());
    println!("spectral_gap={}", w.spectral_gap());
    for line in report.to_string().lines() {
        println!("  {line}");
    }
    if let Some(path) = csv {
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        w.write_csv(BufWriter::new(f))?;
        println!("csv={}", path.display());
    }
    Ok(())
}

fn cmd_run(
    path: PathBuf,
    out: Option<PathBuf>,
    seed: Option<u64>,
    replicates: Option<usize>,
    dump: bool,
) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::load(&path).map_err(Failure::Config)?;
    if let Some(o) = out {
        cfg.output = o;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = replicates {
        cfg.replicates = r;
    }
    cfg.check().map_err(Failure::Config)?;
    if dump {
        print!("{}", cfg.to_toml().map_err(Failure::Config)?);
        return Ok(());
    }
    run_experiment(&cfg)
}

fn cmd_plan(n: usize, m: usize, lambda: f64, epsilon: f64, goal: Goal, delta: f64, l: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        bail!("lambda must lie in [0, 1), got {lambda}");
    }
    if !(l > 0.0) {
        bail!("L must be positive");
    }
    let goal = match goal {
        Goal::Gradient => BatchGoal::Gradient,
        Goal::Communication => BatchGoal::Communication,
    };
    let rec = recommend_parameters(n, m, lambda, goal)?;
    let asym = max_stepsize(n, rec.batch, rec.q, lambda, l, StepSizeBound::Asymptotic)?;
    let comp = max_stepsize(n, rec.batch, rec.q, lambda, l, StepSizeBound::Complexity)?;
    let est = predicted_complexity(n, m, rec.batch, lambda, delta, epsilon)?;
    let regime = classify_regime(n, m, lambda);
    println!(
        "# {regime} regime: B={} q={} gives about {:.4e} gradients and {:.4e} rounds",
        rec.batch, rec.q, est.gradients, est.rounds
    );
    println!("n={n}");
    println!("m={m}");
    println!("N={}", n * m);
    println!("lambda={lambda}");
    println!("epsilon={epsilon}");
    println!("delta={delta}");
    println!("L={l}");
    println!(
        "goal={}",
        match goal {
            BatchGoal::Gradient => "gradient",
            BatchGoal::Communication => "communication",
        }
    );
    println!("regime={regime}");
    println!("R={}", gradient_batch_threshold(n, m, lambda));
    println!("C={}", communication_batch_threshold(n, m, lambda));
    println!("B_R={}", est.gradient_optimal_batch);
    println!("B_C={}", est.communication_optimal_batch);
    println!("B={}", rec.batch);
    println!("q={}", rec.q);
    println!("alpha_asymptotic={asym}");
    println!("alpha_complexity={comp}");
    println!("H={}", est.gradients);
    println!("K={}", est.rounds);
    Ok(())
}
