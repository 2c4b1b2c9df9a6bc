use clap::{Parser, Subcommand};
use shellzeros_cli::{commands, CliError, ExperimentConfig, Outcome};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "shellzeros", about = "Spectra of randomly perturbed operators and GAF zero statistics")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0, global = true)]
    threads: usize,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate spectra; writes spectra.csv and rescaled.csv.
    Spectrum,
    /// Sample limit-process zeros; writes rescaled.csv.
    Gaf,
    /// Pair correlation of rescaled.csv files; writes corr.csv.
    Correlate {
        /// Input rescaled.csv files (default: <out>/rescaled.csv).
        inputs: Vec<PathBuf>,
    },
    /// Compare corr.csv with a theory curve; writes curves.csv, report.txt, figure.svg.
    Report {
        /// Input corr.csv (default: <out>/corr.csv).
        corr: Option<PathBuf>,
    },
    /// Compare eigenvalue counts in gamma with the phase-space volume.
    Weyl,
}

fn run(args: Args) -> Result<Outcome, CliError> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_text(&std::fs::read_to_string(path)?)?;
    }
    for kv in &args.set {
        cfg.set_override(kv)?;
    }
    if let Some(out) = args.out {
        cfg.out_dir = out;
    }
    cfg.validate()?;
    let threads = args.threads;
    shellzeros_cli::experiment::with_threads(threads, || match args.command {
        Command::Spectrum => commands::cmd_spectrum(&cfg),
        Command::Gaf => commands::cmd_gaf(&cfg),
        Command::Correlate { inputs } => {
            let inputs = if inputs.is_empty() { vec![cfg.out_dir.join("rescaled.csv")] } else { inputs };
            commands::cmd_correlate(&cfg, &inputs)
        }
        Command::Report { corr } => {
            let corr = corr.unwrap_or_else(|| cfg.out_dir.join("corr.csv"));
            commands::cmd_report(&cfg, &corr)
        }
        Command::Weyl => commands::cmd_weyl(&cfg),
    })?
}

fn main() -> ExitCode {
    // usage errors are hard errors (1); 2 is reserved for statistical failures
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(args) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
