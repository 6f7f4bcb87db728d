use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qsse::runner::scaling::{is_affine, scaling_table};
use qsse::runner::{run_experiment, scaling_probe, verify_suite, ExperimentConfig, DEFAULT_SEED};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightMode {
    Exact,
    Bernoulli,
    Ae,
}

impl WeightMode {
    fn key(self) -> &'static str {
        match self {
            WeightMode::Exact => "exact",
            WeightMode::Bernoulli => "bernoulli",
            WeightMode::Ae => "ae",
        }
    }
}

/// Run SSE chains with circuit-evaluated weights.
#[derive(Debug, Parser)]
#[command(name = "qsse", version)]
struct Cli {
    /// Experiment config (flat TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset: n3, n4 or n5.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    weight_mode: Option<WeightMode>,
    /// Shots for the Bernoulli estimator.
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    ae_t: Option<usize>,
    #[arg(long)]
    ae_m: Option<usize>,
    #[arg(long)]
    ae_delta: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the property suite and print a JSON report.
    #[arg(long)]
    verify: bool,
    /// Print gate counts and simulator times for these system sizes.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    scaling_sites: Option<Vec<usize>>,
    /// Expansion orders for the scaling table.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0,1,2,3,4,5,6,7,8")]
    scaling_orders: Vec<usize>,
}

fn build_config(cli: &Cli) -> qsse::Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => ExperimentConfig::default(),
    };
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.weight_mode {
        cfg.weight_mode = v.key().into();
    }
    if let Some(v) = cli.shots {
        cfg.shots = v;
    }
    if let Some(v) = cli.ae_t {
        cfg.ae_t = v;
    }
    if let Some(v) = cli.ae_m {
        cfg.ae_m = v;
    }
    if let Some(v) = cli.ae_delta {
        cfg.ae_delta = v;
    }
    if let Some(v) = cli.iterations {
        cfg.iterations = v;
    }
    if let Some(v) = cli.burn_in {
        cfg.burn_in = v;
    }
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> qsse::Result<bool> {
    if cli.verify {
        let report = verify_suite(cli.seed.unwrap_or(DEFAULT_SEED))?;
        println!("{}", report.to_json());
        return Ok(report.passed);
    }
    if let Some(sites) = &cli.scaling_sites {
        let rows = scaling_probe(sites, &cli.scaling_orders)?;
        print!("{}", scaling_table(&rows));
        println!("# gate_count affine in n: {}", is_affine(&rows));
        println!("# simulator_seconds is classical statevector cost and grows like 2^(N+n)");
        return Ok(is_affine(&rows));
    }
    let cfg = build_config(cli)?;
    let summary = run_experiment(&cfg)?;
    match &summary.results.energy {
        Some(e) => println!("{e}"),
        None => println!("energy: no post-burn-in samples"),
    }
    println!("output: {}", summary.out_dir.display());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
