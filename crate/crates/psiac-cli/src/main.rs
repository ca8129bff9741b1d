//! Experiment driver for PSIAC filtering of DG advection output.

mod config;
mod dump;
mod run;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use psiac::kernel::{FilterName, Side};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "psiac",
    about = "Position-dependent SIAC filtering experiments for DG output",
    version
)]
struct Cli {
    /// Worker threads for the experiment grid (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config: DG solves, filtering, error CSVs,
    /// convergence summary, and coefficient dumps.
    Run {
        /// JSON experiment description.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print one catalog filter as JSON: knots, index set, coefficient
    /// polynomials, and the prototype convolution matrix.
    DumpFilter {
        /// RS | SRV | RLKV | MULTIKNOT | SYMMETRIC
        #[arg(long)]
        name: String,
        #[arg(long)]
        degree: usize,
        /// L | R | sym
        #[arg(long)]
        side: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // ignore the error if a pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match cli.command {
        Command::Run { config, out } => {
            let experiment = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            let out_dir = match out.or_else(|| experiment.output_dir.clone()) {
                Some(dir) => dir,
                None => {
                    eprintln!("config error: no output directory (set `output_dir` or pass --out)");
                    return ExitCode::from(2);
                }
            };
            match run::run(&experiment, &out_dir) {
                Ok(()) => {
                    println!("wrote results to {}", out_dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("run failed: {e}");
                    ExitCode::from(3)
                }
            }
        }
        Command::DumpFilter { name, degree, side } => {
            let parsed: Result<(FilterName, Side), String> =
                name.parse().and_then(|n| side.parse().map(|s| (n, s)));
            let (name, side) = match parsed {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            match dump::dump_filter(name, degree, side) {
                Ok(d) => {
                    println!("{}", serde_json::to_string_pretty(&d).expect("serializable"));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("run failed: {e}");
                    ExitCode::from(3)
                }
            }
        }
    }
}
