use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nehari_cli::{cmd_check, cmd_solve, cmd_sweep, parse_lambdas, CliError, Overrides, Status};

const EXIT_CODES: &str = "\
Exit codes:
  0  certified (all hypotheses pass, or the solve is converged and certified)
  1  configuration error (unreadable or invalid config, bad flags)
  2  hypothesis check failed (solve/sweep refuse to run without --force)
  3  solver stagnated or the solution certificate has a failing item";

/// Radial ground states of a fourth-order quasilinear Schrödinger problem.
#[derive(Parser)]
#[command(name = "nehari", version, after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural hypotheses and write hypotheses.json.
    Check(Common),
    /// Solve for a ground state and write solution.csv, diagnostics.json, fibering.csv.
    Solve(Common),
    /// Solve along an ascending list of coupling values with warm starts.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ascending list, e.g. 0,0.5,1
        #[arg(long, value_name = "CSV")]
        lambdas: String,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (overrides output.directory).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for start perturbations (overrides solver.seed).
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Solve even when a hypothesis fails; the override is recorded.
    #[arg(long)]
    force: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            seed: self.seed,
            force: self.force,
        }
    }
}

fn run(cli: Cli) -> Result<nehari_cli::Report, CliError> {
    match cli.command {
        Command::Check(c) => cmd_check(&c.config, &c.overrides()),
        Command::Solve(c) => cmd_solve(&c.config, &c.overrides()),
        Command::Sweep { common, lambdas } => {
            let lambdas = parse_lambdas(&lambdas)?;
            cmd_sweep(&common.config, &lambdas, &common.overrides())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Status::ConfigError.code() } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(report) => {
            println!("{report}");
            ExitCode::from(report.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Status::ConfigError.code() as u8)
        }
    }
}
