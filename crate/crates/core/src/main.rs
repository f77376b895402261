use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bhlab::cli_io::{export_config, output_root, run_config, ExperimentConfig};
use bhlab::experiments::{catalog, Overrides};

/// Monte Carlo laboratory for moments of planar Brownian exit times.
#[derive(Parser)]
#[command(name = "bhlab", version)]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config (TOML).
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Sample count for every sub-run.
    #[arg(long)]
    samples: Option<usize>,
    /// Horizon of the main batch.
    #[arg(long)]
    tmax: Option<f64>,
    /// Output root; defaults to the config, then $BHLAB_OUT, then ./bhlab-out.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment; exits 1 if any assertion fails.
    Run(RunArgs),
    /// List the experiments.
    List,
    /// Write the sample batch of an exit-tail config to CSV.
    Export {
        #[command(flatten)]
        args: RunArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

fn load(a: &RunArgs) -> bhlab::Result<(ExperimentConfig, Vec<u8>, Overrides, PathBuf)> {
    let input = std::fs::read(&a.config)?;
    let mut cfg = ExperimentConfig::parse(&String::from_utf8_lossy(&input))?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let ov = Overrides {
        samples: a.samples,
        t_max: a.tmax,
    };
    let root = output_root(a.out.clone(), &cfg);
    Ok((cfg, input, ov, root))
}

fn run(cli: Cli) -> bhlab::Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| bhlab::Error::InvalidArgument(e.to_string()))?;
    }
    match cli.cmd {
        Cmd::List => {
            for e in catalog() {
                println!("{:<30} {}", e.label, e.summary);
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Run(a) => {
            let (cfg, input, ov, root) = load(&a)?;
            let out = run_config(&cfg, &input, &ov, &root)?;
            for a in &out.report.assertions {
                println!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
            }
            for n in &out.report.notes {
                eprintln!("note: {n}");
            }
            println!("config {}", out.record.config_hash);
            println!("wrote {}", out.dir.display());
            Ok(if out.record.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::Export { args, format: Format::Csv } => {
            let (cfg, _, ov, root) = load(&args)?;
            let (path, warnings) = export_config(&cfg, &ov, &root)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
