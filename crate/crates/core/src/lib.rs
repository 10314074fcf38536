//! Radially symmetric ground states of the fourth-order quasilinear problem
//!
//! ```text
//! Δ²u - Δu + V(|x|)u - λ Δ[ρ(u²)] ρ'(u²) u = f(u)   in R^N
//! ```
//!
//! computed by minimizing the energy `I_λ` over the Nehari set on a uniform
//! radial grid. The core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod banded;
pub mod energy;
pub mod error;
pub mod fibering;
pub mod grid;
pub mod hypotheses;
pub mod problem;
pub mod scalar;
pub mod solver;

pub use energy::{EnergyBreakdown, EnergyModel, NehariTerms};
pub use error::{Error, Result};
pub use fibering::{fibering_map, project_to_nehari, project_with, FiberingReport, ProjectionOptions};
pub use grid::{RadialField, RadialGrid};
pub use hypotheses::{check_problem, HypothesisReport, Verdict};
pub use problem::{NonlinearitySpec, PotentialSpec, ProblemSpec, RhoSpec};
pub use scalar::Scalar;
pub use solver::{
    lambda_sweep, solve_ground_state, verify_solution, Certificate, SolveResult, SolverOptions, SweepEntry,
};

pub type Grid = RadialGrid<f64>;
pub type Field = RadialField<f64>;
pub type Problem = ProblemSpec<f64>;
pub type Potential = PotentialSpec<f64>;
pub type Nonlinearity = NonlinearitySpec<f64>;
pub type Rho = RhoSpec<f64>;
pub type Solution = SolveResult<f64>;
