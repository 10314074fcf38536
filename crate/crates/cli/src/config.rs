//! TOML run configuration.
//!
//! ```toml
//! [problem]
//! dim = 3
//! lambda = 1.0
//! potential = { kind = "constant", v_infinity = 1.0 }
//! nonlinearity = { kind = "power", m = 1.0, p = 5.0 }
//! rho = { kind = "sqrt_shift" }
//!
//! [grid]
//! r_max = 20.0
//! n = 2001
//!
//! [solver]          # optional, every key defaults
//! seed = 0
//!
//! [output]          # optional
//! directory = "out"
//! fibering = true
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};

use nehari_core::solver::{ArmijoOptions, GaussianStart, Preconditioner};
use nehari_core::{Grid, Nonlinearity, Potential, Problem, ProjectionOptions, Rho, SolverOptions};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub dim: usize,
    pub lambda: f64,
    pub potential: PotentialConfig,
    pub nonlinearity: NonlinearityConfig,
    pub rho: RhoConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Constant {
        v_infinity: f64,
    },
    InversePower {
        v_infinity: f64,
        c: f64,
        alpha: f64,
        cutoff: f64,
    },
    Tabulated {
        v_infinity: f64,
        radii: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    Power { m: f64, p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoConfig {
    Affine { a: f64, b: f64 },
    SqrtShift {},
    AffinePlusSqrt { a: f64, b: f64 },
    PowerShift { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub nehari_tol: f64,
    pub seed: u64,
    pub perturbation: f64,
    pub preconditioner: PreconditionerConfig,
    pub armijo: ArmijoConfig,
    pub projection: ProjectionConfig,
    pub starts: Vec<StartConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionerConfig {
    None,
    VForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArmijoConfig {
    pub initial_step: f64,
    pub shrink: f64,
    pub slope_fraction: f64,
    pub max_backtracks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartConfig {
    pub sigma: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Write the fibering-map table of the winning field.
    pub fibering: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self {
            max_iters: o.max_iters,
            grad_tol: o.grad_tol,
            nehari_tol: o.nehari_tol,
            seed: o.seed,
            perturbation: o.perturbation,
            preconditioner: match o.preconditioner {
                Preconditioner::None => PreconditionerConfig::None,
                Preconditioner::VForm => PreconditionerConfig::VForm,
            },
            armijo: ArmijoConfig::default(),
            projection: ProjectionConfig::default(),
            starts: o
                .starts
                .iter()
                .map(|s| StartConfig {
                    sigma: s.sigma,
                    amplitude: s.amplitude,
                })
                .collect(),
        }
    }
}

impl Default for ArmijoConfig {
    fn default() -> Self {
        let a = ArmijoOptions::default();
        Self {
            initial_step: a.initial_step,
            shrink: a.shrink,
            slope_fraction: a.slope_fraction,
            max_backtracks: a.max_backtracks,
        }
    }
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        let p = ProjectionOptions::default();
        Self {
            t_min: p.t_min,
            t_max: p.t_max,
            points_per_decade: p.points_per_decade,
            tolerance: p.tolerance,
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            fibering: true,
        }
    }
}

impl Default for RunConfig {
    /// N = 3, λ = 1, V ≡ 1, power(1, 5), sqrt_shift on r_max = 20, n = 2001.
    fn default() -> Self {
        Self {
            problem: ProblemConfig {
                dim: 3,
                lambda: 1.0,
                potential: PotentialConfig::Constant { v_infinity: 1.0 },
                nonlinearity: NonlinearityConfig::Power { m: 1.0, p: 5.0 },
                rho: RhoConfig::SqrtShift {},
            },
            grid: GridConfig { r_max: 20.0, n: 2001 },
            solver: SolverConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid(e.to_string())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse {
                path: path.into(),
                message,
            },
            other => other,
        })
    }

    /// Parses TOML text; errors carry the line and column of the offending key.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: PathBuf::from("<config>"),
            message: line_anchored(text, &e),
        })?;
        cfg.problem()?;
        cfg.grid()?;
        cfg.solver_options()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn problem(&self) -> Result<Problem, ConfigError> {
        let p = &self.problem;
        let potential = match &p.potential {
            PotentialConfig::Constant { v_infinity } => {
                if !(*v_infinity > 0.0 && v_infinity.is_finite()) {
                    return Err(invalid(format!("v_infinity must be positive, got {v_infinity}")));
                }
                Potential::constant(*v_infinity)
            }
            PotentialConfig::InversePower {
                v_infinity,
                c,
                alpha,
                cutoff,
            } => Potential::inverse_power(*v_infinity, *c, *alpha, *cutoff).map_err(invalid)?,
            PotentialConfig::Tabulated {
                v_infinity,
                radii,
                values,
            } => Potential::tabulated(*v_infinity, radii.clone(), values.clone()).map_err(invalid)?,
        };
        let nonlinearity = match p.nonlinearity {
            NonlinearityConfig::Power { m, p } => Nonlinearity::power(m, p).map_err(invalid)?,
        };
        let rho = match p.rho {
            RhoConfig::Affine { a, b } => Rho::Affine { a, b },
            RhoConfig::SqrtShift {} => Rho::SqrtShift,
            RhoConfig::AffinePlusSqrt { a, b } => Rho::AffinePlusSqrt { a, b },
            RhoConfig::PowerShift { alpha } => Rho::PowerShift { alpha },
        };
        Problem::new(p.dim, p.lambda, potential, nonlinearity, rho).map_err(invalid)
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        Grid::new(self.problem.dim, self.grid.r_max, self.grid.n).map_err(invalid)
    }

    pub fn solver_options(&self) -> Result<SolverOptions, ConfigError> {
        let s = &self.solver;
        let opts = SolverOptions {
            max_iters: s.max_iters,
            grad_tol: s.grad_tol,
            nehari_tol: s.nehari_tol,
            armijo: ArmijoOptions {
                initial_step: s.armijo.initial_step,
                shrink: s.armijo.shrink,
                slope_fraction: s.armijo.slope_fraction,
                max_backtracks: s.armijo.max_backtracks,
            },
            starts: s
                .starts
                .iter()
                .map(|st| GaussianStart {
                    sigma: st.sigma,
                    amplitude: st.amplitude,
                })
                .collect(),
            seed: s.seed,
            perturbation: s.perturbation,
            preconditioner: match s.preconditioner {
                PreconditionerConfig::None => Preconditioner::None,
                PreconditionerConfig::VForm => Preconditioner::VForm,
            },
            projection: ProjectionOptions {
                t_min: s.projection.t_min,
                t_max: s.projection.t_max,
                points_per_decade: s.projection.points_per_decade,
                tolerance: s.projection.tolerance,
            },
            force: false,
        };
        opts.validate().map_err(invalid)?;
        if opts.starts.is_empty() {
            return Err(invalid("solver.starts needs at least one start"));
        }
        Ok(opts)
    }
}

fn line_anchored(text: &str, e: &toml::de::Error) -> String {
    let msg = e.message().trim_end();
    match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            format!("line {line}, column {col}: {msg}")
        }
        None => msg.to_string(),
    }
}
