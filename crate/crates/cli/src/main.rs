use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tspower_cli::pipeline::{run_analyze, run_sweep_s, run_verify};
use tspower_cli::{AnalysisConfig, CliError, OutputFormat, Overrides};

#[derive(Parser)]
#[command(
    name = "tspower",
    version,
    about = "Active/reactive power analysis of RLC loads in the time-scale domain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Analysis config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

impl Common {
    fn load(&self, tolerance: Option<f64>) -> Result<AnalysisConfig, CliError> {
        AnalysisConfig::load(
            &self.config,
            &Overrides {
                output_dir: self.out.clone(),
                format: self.format,
                tolerance,
            },
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write instantaneous/scaled CSV series plus summary and balance JSON.
    Analyze(Common),
    /// Write time means of X(t, s) and Q(t, s) along the scale grid.
    #[command(name = "sweep-s")]
    SweepS(Common),
    /// Check the power balances; exit 3 on a tolerance breach.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Relative tolerance (default 1e-9).
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(common) => {
            let cfg = common.load(None)?;
            for path in run_analyze(&cfg)? {
                println!("{}", path.display());
            }
        }
        Command::SweepS(common) => {
            let cfg = common.load(None)?;
            println!("{}", run_sweep_s(&cfg)?.display());
        }
        Command::Verify { common, tol } => {
            let cfg = common.load(tol)?;
            let verdict = run_verify(&cfg)?;
            for line in &verdict.lines {
                println!("{line}");
            }
            if !verdict.passed {
                return Err(CliError::Numerical("balance verification failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
