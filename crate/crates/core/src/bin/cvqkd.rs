use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cvqkd::io::{write_json, Preset, RunConfig};
use cvqkd::pipeline::{run_analyze, run_bounds, run_simulate, run_witness, write_bounds};
use cvqkd::Result;

/// Two-state CV-QKD link simulation and entanglement witnessing.
///
/// Log verbosity is read from CVQKD_LOG (error, warn, info, debug, trace).
#[derive(Parser)]
#[command(name = "cvqkd", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// back_to_back, fiber_2km or custom
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    frames: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a run and write the pulse dataset (plus blocked-signal data)
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Dataset path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze a pulse dataset and print the witness report
    Analyze {
        dataset: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Report path (JSON)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tolerable-variance thresholds over an amplitude/transmission grid
    Bounds {
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8"
        )]
        alphas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1.0,0.7,0.448")]
        etas: Vec<f64>,
        #[arg(long, default_value_t = 1e8)]
        n_lo: f64,
        /// CSV path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate and analyze in one step
    Witness {
        #[command(flatten)]
        run: RunArgs,
        /// Report path (JSON)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn config(run: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &run.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = run.seed {
        cfg.seed = s;
    }
    if let Some(p) = run.preset {
        cfg.preset = p;
    }
    if let Some(a) = run.alpha {
        cfg.params.alpha = a;
    }
    if let Some(f) = run.frames {
        cfg.n_frames = f;
    }
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serializes")
    );
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Command::Simulate { run, out } => {
            let mut cfg = config(&run)?;
            if let Some(out) = out {
                cfg.output.dataset = out;
            }
            let summary = run_simulate(&cfg)?;
            log::info!("wrote {}", cfg.output.dataset.display());
            print_json(&summary);
        }
        Command::Analyze { dataset, run, out } => {
            let mut cfg = config(&run)?;
            if out.is_some() {
                cfg.output.report = out;
            }
            print_json(&run_analyze(&dataset, &cfg)?);
        }
        Command::Bounds {
            alphas,
            etas,
            n_lo,
            out,
        } => {
            let table = run_bounds(&alphas, &etas, n_lo)?;
            match out {
                Some(p) => {
                    write_bounds(std::io::BufWriter::new(std::fs::File::create(p)?), &table)?
                }
                None => write_bounds(std::io::stdout().lock(), &table)?,
            }
        }
        Command::Witness { run, out } => {
            let cfg = config(&run)?;
            let report = run_witness(&cfg)?;
            if let Some(p) = out {
                write_json(&p, &report)?;
            }
            print_json(&report);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CVQKD_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
