//! Text artifacts: comma-separated tables and JSON records.

use std::fs;
use std::path::Path;

use nehari_core::hypotheses::HypothesisCheck;
use nehari_core::solver::{Certificate, StartOutcome, Tolerances};
use nehari_core::{EnergyBreakdown, FiberingReport, Field, Grid, HypothesisReport, Solution};
use serde::Serialize;

use crate::config::{GridConfig, ProblemConfig, RunConfig, SolverConfig};
use crate::{CliError, Status};

pub const HYPOTHESES: &str = "hypotheses.json";
pub const SOLUTION: &str = "solution.csv";
pub const DIAGNOSTICS: &str = "diagnostics.json";
pub const FIBERING: &str = "fibering.csv";
pub const BRANCH: &str = "branch.csv";

pub const SOLUTION_HEADER: &str = "r,u,du/dr,laplacian_u";

/// 17 significant digits, enough to round-trip any f64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let wrap = |source| CliError::Write {
        path: path.into(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(wrap)?;
    }
    fs::write(path, text).map_err(wrap)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize");
    text.push('\n');
    write_text(path, &text)
}

pub fn solution_table(grid: &Grid, u: &Field) -> nehari_core::Result<String> {
    let du = grid.derivative(u)?;
    let lu = grid.laplacian(u)?;
    let mut out = String::with_capacity(80 * grid.len());
    out.push_str(SOLUTION_HEADER);
    out.push('\n');
    for i in 0..grid.len() {
        let row = [grid.nodes()[i], u.values()[i], du.values()[i], lu.values()[i]];
        out.push_str(&row.map(num).join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Reads a solution table back as `(r, u)` columns.
pub fn read_solution_table(text: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let mut lines = text.lines();
    if lines.next() != Some(SOLUTION_HEADER) {
        return Err("missing solution header".into());
    }
    let (mut r, mut u) = (Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(format!("row {}: expected 4 columns, got {}", k + 2, cols.len()));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| format!("row {}: {e}", k + 2));
        r.push(parse(cols[0])?);
        u.push(parse(cols[1])?);
    }
    Ok((r, u))
}

pub fn fibering_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("t,g,dg/dt\n");
    for &(t, g, dg) in rows {
        out.push_str(&format!("{},{},{}\n", num(t), num(g), num(dg)));
    }
    out
}

pub fn describe_failure(c: &HypothesisCheck) -> String {
    match c.verdict.witness() {
        Some(w) => match w.at {
            Some(at) => format!("{} failed at {at}: {} ({} vs {})", c.name, w.detail, w.lhs, w.rhs),
            None => format!("{} failed: {} ({} vs {})", c.name, w.detail, w.lhs, w.rhs),
        },
        None => format!("{} failed", c.name),
    }
}

#[derive(Serialize)]
pub struct HypothesesFile<'a> {
    pub all_pass: bool,
    pub failures: Vec<&'static str>,
    pub report: &'a HypothesisReport,
}

impl<'a> HypothesesFile<'a> {
    pub fn new(report: &'a HypothesisReport) -> Self {
        Self {
            all_pass: report.all_pass(),
            failures: report.failures().iter().map(|c| c.name).collect(),
            report,
        }
    }
}

/// The part of a config that determines the numbers in a run.
#[derive(Serialize)]
pub struct Effective<'a> {
    pub problem: &'a ProblemConfig,
    pub grid: &'a GridConfig,
    pub solver: &'a SolverConfig,
}

impl<'a> Effective<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        Self {
            problem: &cfg.problem,
            grid: &cfg.grid,
            solver: &cfg.solver,
        }
    }
}

#[derive(Serialize)]
pub struct Diagnostics<'a> {
    pub status: Status,
    pub config: Effective<'a>,
    pub energy_m: f64,
    pub breakdown: &'a EnergyBreakdown<f64>,
    pub norm_v_sq: f64,
    pub nehari_residual: f64,
    pub grad_residual: f64,
    pub converged: bool,
    pub stagnated: bool,
    pub start_index: usize,
    pub starts: &'a [StartOutcome<f64>],
    pub field_min: f64,
    pub field_max: f64,
    pub fibering: &'a FiberingReport<f64>,
    pub tolerances: &'a Tolerances,
    pub certificate: &'a Certificate,
    pub warnings: &'a [String],
    pub energy_history: &'a [f64],
}

impl<'a> Diagnostics<'a> {
    pub fn new(cfg: &'a RunConfig, r: &'a Solution, status: Status) -> Self {
        Self {
            status,
            config: Effective::new(cfg),
            energy_m: r.energy_m,
            breakdown: &r.breakdown,
            norm_v_sq: r.norm_v_sq,
            nehari_residual: r.nehari_residual,
            grad_residual: r.grad_residual,
            converged: r.converged,
            stagnated: r.stagnated,
            start_index: r.start_index,
            starts: &r.starts,
            field_min: r.field_min,
            field_max: r.field_max,
            fibering: &r.fibering,
            tolerances: &r.tolerances,
            certificate: &r.certificate,
            warnings: &r.warnings,
            energy_history: &r.energy_history,
        }
    }
}

#[derive(Serialize)]
pub struct FailedRun<'a> {
    pub status: Status,
    pub config: Effective<'a>,
    pub error: &'a str,
}

impl<'a> FailedRun<'a> {
    pub fn new(cfg: &'a RunConfig, error: &'a str) -> Self {
        Self {
            status: Status::Uncertified,
            config: Effective::new(cfg),
            error,
        }
    }
}

pub struct BranchRow {
    lambda: f64,
    values: Option<[f64; 3]>,
    status: Status,
    note: String,
}

impl BranchRow {
    pub fn solved(lambda: f64, r: &Solution, status: Status) -> Self {
        Self {
            lambda,
            values: Some([r.energy_m, r.norm_v_sq, r.nehari_residual]),
            status,
            note: String::new(),
        }
    }

    pub fn failed(lambda: f64, status: Status, error: &str) -> Self {
        Self {
            lambda,
            values: None,
            status,
            note: error.replace([',', '\n'], ";"),
        }
    }
}

pub fn branch_table(rows: &[BranchRow]) -> String {
    let mut out = String::from("lambda,energy_m,norm_V_sq,nehari_residual,status,note\n");
    for row in rows {
        let vals = match row.values {
            Some(v) => v.map(num).join(","),
            None => ",,".into(),
        };
        let status = serde_json::to_value(row.status).expect("status serializes");
        out.push_str(&format!(
            "{},{vals},{},{}\n",
            num(row.lambda),
            status.as_str().unwrap_or(""),
            row.note
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_17_significant_digits_and_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0] {
            let s = num(x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17, "{s}");
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn solution_table_round_trip() {
        let g = Grid::new(3, 5.0, 51).unwrap();
        let u = Field::from_fn(&g, |r| (-r * r).exp()).with_boundary();
        let text = solution_table(&g, &u).unwrap();
        assert_eq!(text.lines().count(), 52);
        let (r, v) = read_solution_table(&text).unwrap();
        assert_eq!(r, g.nodes());
        assert_eq!(v, u.values());
        assert!(read_solution_table("r,u\n").is_err());
    }

    #[test]
    fn branch_rows() {
        let rows = [BranchRow::failed(0.5, Status::HypothesisFailed, "rho4, rho_family")];
        let t = branch_table(&rows);
        assert_eq!(t.lines().nth(1).unwrap().split(',').count(), 6);
        assert!(t.contains("hypothesis_failed"));
    }
}
