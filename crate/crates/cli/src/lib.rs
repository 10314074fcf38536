//! Front end for the `nehari` binary: configuration, the `check`, `solve`
//! and `sweep` commands, and the text artifacts they write.

pub mod config;
pub mod output;

use std::fmt;
use std::path::{Path, PathBuf};

use nehari_core::fibering::fibering_table;
use nehari_core::{check_problem, lambda_sweep, solve_ground_state, EnergyModel, Error as CoreError, Solution};
use serde::Serialize;

pub use config::{ConfigError, RunConfig};

/// Process exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Every hypothesis (check) or certificate item (solve, sweep) passed.
    Certified,
    /// Unreadable or invalid configuration, bad flags, or an output write failure.
    ConfigError,
    /// A hypothesis failed and the run was not forced.
    HypothesisFailed,
    /// The solver stagnated or the certificate has a failing item.
    Uncertified,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Certified => 0,
            Status::ConfigError => 1,
            Status::HypothesisFailed => 2,
            Status::Uncertified => 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub force: bool,
}

/// What a command did, for the caller to print and turn into an exit code.
#[derive(Debug, Clone)]
pub struct Report {
    pub status: Status,
    pub out_dir: PathBuf,
    pub messages: Vec<String>,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.messages {
            writeln!(f, "{m}")?;
        }
        write!(
            f,
            "status: {:?} (exit {}), output in {}",
            self.status,
            self.status.code(),
            self.out_dir.display()
        )
    }
}

fn load(path: &Path, ov: &Overrides) -> Result<(RunConfig, PathBuf), CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = ov.seed {
        cfg.solver.seed = seed;
    }
    let out = ov.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
    Ok((cfg, out))
}

/// Runs the hypothesis checker and writes `hypotheses.json`.
pub fn cmd_check(config: &Path, ov: &Overrides) -> Result<Report, CliError> {
    let (cfg, out) = load(config, ov)?;
    let spec = cfg.problem()?;
    let grid = cfg.grid()?;
    let report = check_problem(&spec, &grid);
    output::write_json(&out.join(output::HYPOTHESES), &output::HypothesesFile::new(&report))?;
    let messages = report.failures().iter().map(|c| output::describe_failure(c)).collect();
    let status = if report.all_pass() {
        Status::Certified
    } else {
        Status::HypothesisFailed
    };
    Ok(Report {
        status,
        out_dir: out,
        messages,
    })
}

/// Checks hypotheses, solves, and writes the solution table, diagnostics
/// and (optionally) the fibering table.
pub fn cmd_solve(config: &Path, ov: &Overrides) -> Result<Report, CliError> {
    let (cfg, out) = load(config, ov)?;
    let spec = cfg.problem()?;
    let grid = cfg.grid()?;
    let mut opts = cfg.solver_options()?;
    opts.force = ov.force;

    let report = check_problem(&spec, &grid);
    output::write_json(&out.join(output::HYPOTHESES), &output::HypothesesFile::new(&report))?;
    let mut messages: Vec<String> = report.failures().iter().map(|c| output::describe_failure(c)).collect();
    if !report.all_pass() && !ov.force {
        messages.push("hypotheses failed; no solve attempted (use --force to override)".into());
        return Ok(Report {
            status: Status::HypothesisFailed,
            out_dir: out,
            messages,
        });
    }

    let status = match solve_ground_state(&grid, &spec, &opts) {
        Ok(result) => {
            write_solution(&out, &cfg, &grid, &spec, &result)?;
            messages.extend(result.warnings.iter().cloned());
            solve_status(&result)
        }
        Err(e) => {
            output::write_json(
                &out.join(output::DIAGNOSTICS),
                &output::FailedRun::new(&cfg, &e.to_string()),
            )?;
            messages.push(format!("solve failed: {e}"));
            if matches!(e, CoreError::HypothesesFailed(_)) {
                Status::HypothesisFailed
            } else {
                Status::Uncertified
            }
        }
    };
    Ok(Report {
        status,
        out_dir: out,
        messages,
    })
}

/// Solves along an ascending λ list with warm starts. Each λ gets its own
/// `lambda_XXX` directory; `branch.csv` summarizes the branch.
pub fn cmd_sweep(config: &Path, lambdas: &[f64], ov: &Overrides) -> Result<Report, CliError> {
    let (cfg, out) = load(config, ov)?;
    if lambdas.is_empty() || lambdas.iter().any(|l| l.is_nan() || *l < 0.0) || lambdas.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(CliError::Usage(format!(
            "--lambdas must be a non-empty, strictly ascending list of non-negative numbers, got {lambdas:?}"
        )));
    }
    let spec = cfg.problem()?;
    let grid = cfg.grid()?;
    let mut opts = cfg.solver_options()?;
    opts.force = ov.force;

    let entries = lambda_sweep(&grid, &spec, lambdas, &opts).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut messages = Vec::new();
    let mut rows = Vec::new();
    let mut status = Status::Certified;
    for (i, entry) in entries.iter().enumerate() {
        let dir = out.join(format!("lambda_{i:03}"));
        let mut at = cfg.clone();
        at.problem.lambda = entry.lambda;
        let spec_at = spec
            .with_lambda(entry.lambda)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let report = check_problem(&spec_at, &grid);
        output::write_json(&dir.join(output::HYPOTHESES), &output::HypothesesFile::new(&report))?;
        let s = match &entry.result {
            Ok(result) => {
                write_solution(&dir, &at, &grid, &spec_at, result)?;
                messages.extend(
                    result
                        .warnings
                        .iter()
                        .map(|w| format!("lambda = {}: {w}", entry.lambda)),
                );
                rows.push(output::BranchRow::solved(entry.lambda, result, solve_status(result)));
                solve_status(result)
            }
            Err(e) => {
                output::write_json(&dir.join(output::DIAGNOSTICS), &output::FailedRun::new(&at, e))?;
                messages.push(format!("lambda = {}: {e}", entry.lambda));
                let s = if report.all_pass() || ov.force {
                    Status::Uncertified
                } else {
                    Status::HypothesisFailed
                };
                rows.push(output::BranchRow::failed(entry.lambda, s, e));
                s
            }
        };
        status = worst(status, s);
    }
    output::write_text(&out.join(output::BRANCH), &output::branch_table(&rows))?;
    Ok(Report {
        status,
        out_dir: out,
        messages,
    })
}

fn worst(a: Status, b: Status) -> Status {
    // a gate failure outranks an uncertified solve
    let rank = |s: Status| match s {
        Status::Certified => 0,
        Status::Uncertified => 1,
        Status::HypothesisFailed => 2,
        Status::ConfigError => 3,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

fn solve_status(result: &Solution) -> Status {
    if result.converged && !result.stagnated && result.certificate.all_pass() {
        Status::Certified
    } else {
        Status::Uncertified
    }
}

fn write_solution(
    dir: &Path,
    cfg: &RunConfig,
    grid: &nehari_core::Grid,
    spec: &nehari_core::Problem,
    result: &Solution,
) -> Result<(), CliError> {
    let table = output::solution_table(grid, &result.field).map_err(|e| CliError::Usage(e.to_string()))?;
    output::write_text(&dir.join(output::SOLUTION), &table)?;
    output::write_json(
        &dir.join(output::DIAGNOSTICS),
        &output::Diagnostics::new(cfg, result, solve_status(result)),
    )?;
    if cfg.output.fibering {
        let model = EnergyModel::new(grid, spec).map_err(|e| CliError::Usage(e.to_string()))?;
        let opts = cfg.solver_options()?.projection;
        let rows = fibering_table(&model, &result.field, &opts).map_err(|e| CliError::Usage(e.to_string()))?;
        output::write_text(&dir.join(output::FIBERING), &output::fibering_csv(&rows))?;
    }
    Ok(())
}

/// Parses `--lambdas`, e.g. `0,0.5,1`.
pub fn parse_lambdas(csv: &str) -> Result<Vec<f64>, CliError> {
    csv.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad lambda {s:?}: {e}")))
        })
        .collect()
}
