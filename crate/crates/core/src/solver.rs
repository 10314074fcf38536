//! Ground states as minimizers of `I_λ` on the Nehari set.
//!
//! Each start is projected onto the Nehari set and then improved by descent
//! along the (optionally V-form preconditioned) gradient. Every trial point is
//! re-projected, and steps are accepted by Armijo backtracking on the composed
//! map `u ↦ I_λ(project(u - s d))`. The winner is the lowest-energy start.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::banded::BandCholesky;
use crate::energy::{EnergyBreakdown, EnergyModel};
use crate::error::{Error, Result};
use crate::fibering::{project_with, FiberingReport, ProjectionOptions};
use crate::grid::{RadialField, RadialGrid};
use crate::hypotheses::{check_problem, HypothesisReport};
use crate::problem::ProblemSpec;
use crate::Scalar;

/// Fraction of `r_max` beyond which the solution must have decayed.
pub const DECAY_REGION: f64 = 0.9;
/// Allowed `|u| / max|u|` in the decay region.
pub const DECAY_THRESHOLD: f64 = 1e-6;
/// Absolute slack for the energy floor `I ≥ ¼‖u‖_V²`.
pub const ENERGY_FLOOR_SLACK: f64 = 1e-10;
/// Relative slack for `‖u‖_V² ≤ ∫f(u)u`.
pub const NEHARI_BOUND_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArmijoOptions {
    pub initial_step: f64,
    pub shrink: f64,
    pub slope_fraction: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoOptions {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            shrink: 0.5,
            slope_fraction: 1e-4,
            max_backtracks: 60,
        }
    }
}

/// Initial profile `amplitude · exp(-(r/σ)²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianStart {
    pub sigma: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    /// Plain nodal gradient.
    None,
    /// Gradient mapped through the inverse V-form matrix.
    VForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stop when the nodal sup of the gradient drops below this.
    pub grad_tol: f64,
    /// Required `|J_λ(u)| / max(1, ‖u‖_V²)` at the solution.
    pub nehari_tol: f64,
    pub armijo: ArmijoOptions,
    pub starts: Vec<GaussianStart>,
    pub seed: u64,
    /// Relative amplitude of a seeded random perturbation added to each start.
    pub perturbation: f64,
    pub preconditioner: Preconditioner,
    pub projection: ProjectionOptions,
    /// Solve even if the hypothesis certificate fails.
    pub force: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        let starts = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .flat_map(|&sigma| {
                [1.0, 2.0]
                    .into_iter()
                    .map(move |amplitude| GaussianStart { sigma, amplitude })
            })
            .collect();
        Self {
            max_iters: 5000,
            grad_tol: 1e-7,
            nehari_tol: 1e-8,
            armijo: ArmijoOptions::default(),
            starts,
            seed: 0,
            perturbation: 0.0,
            preconditioner: Preconditioner::VForm,
            projection: ProjectionOptions::default(),
            force: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.grad_tol) || !positive(self.nehari_tol) {
            return Err(Error::InvalidParameter("solver tolerances must be positive".into()));
        }
        let a = &self.armijo;
        if !positive(a.initial_step)
            || !(a.shrink > 0.0 && a.shrink < 1.0)
            || !(a.slope_fraction > 0.0 && a.slope_fraction < 1.0)
        {
            return Err(Error::InvalidParameter(
                "armijo needs initial_step > 0, 0 < shrink < 1, 0 < slope_fraction < 1".into(),
            ));
        }
        if self
            .starts
            .iter()
            .any(|s| !positive(s.sigma) || !s.amplitude.is_finite() || s.amplitude == 0.0)
        {
            return Err(Error::InvalidParameter(
                "starts need sigma > 0 and a non-zero amplitude".into(),
            ));
        }
        if !(self.perturbation >= 0.0) {
            return Err(Error::InvalidParameter("perturbation must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub grad_tol: f64,
    pub nehari_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateItem {
    pub name: &'static str,
    pub description: &'static str,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

/// Solution-level checks (a)–(g).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub items: Vec<CertificateItem>,
    /// The solve ran although the hypothesis certificate failed.
    pub hypotheses_overridden: bool,
}

impl Certificate {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn item(&self, name: &str) -> Option<&CertificateItem> {
        self.items.iter().find(|i| i.name == name)
    }
}

/// Outcome of one start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartOutcome<T> {
    pub index: usize,
    pub energy: Option<T>,
    pub iterations: usize,
    pub grad_residual: Option<T>,
    pub converged: bool,
    pub stagnated: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult<T> {
    pub field: RadialField<T>,
    pub energy_m: T,
    pub breakdown: EnergyBreakdown<T>,
    pub norm_v_sq: T,
    /// `|J_λ(u)| / max(1, ‖u‖_V²)`
    pub nehari_residual: T,
    /// Nodal sup of the gradient.
    pub grad_residual: T,
    pub start_index: usize,
    pub starts: Vec<StartOutcome<T>>,
    /// Energies of the winning start, one per accepted iterate, accumulated
    /// from accurate step differences.
    pub energy_history: Vec<T>,
    pub converged: bool,
    pub stagnated: bool,
    pub field_min: T,
    pub field_max: T,
    pub fibering: FiberingReport<T>,
    pub tolerances: Tolerances,
    pub certificate: Certificate,
    pub warnings: Vec<String>,
}

struct Descent<T> {
    field: RadialField<T>,
    fibering: FiberingReport<T>,
    history: Vec<T>,
    grad_residual: T,
    iterations: usize,
    converged: bool,
    stagnated: bool,
}

fn gaussian_start<T: Scalar>(
    grid: &RadialGrid<T>,
    start: &GaussianStart,
    perturbation: f64,
    rng: &mut ChaCha8Rng,
) -> RadialField<T> {
    let sigma = T::lit(start.sigma);
    let amp = T::lit(start.amplitude);
    let mut u = RadialField::from_fn(grid, |r| amp * (-(r / sigma).powi(2)).exp());
    if perturbation > 0.0 {
        let eps = T::lit(perturbation);
        for v in u.values_mut() {
            let noise = T::lit(rng.gen_range(-1.0..1.0));
            *v += eps * noise * *v;
        }
    }
    u.with_constraints()
}

fn descend<T: Scalar>(
    model: &EnergyModel<'_, T>,
    precond: Option<&BandCholesky<T>>,
    start: &RadialField<T>,
    opts: &SolverOptions,
) -> Result<Descent<T>> {
    let start = start.clone().with_constraints();
    let (mut fibering, mut u) = project_with(model, &start, &opts.projection)?;
    // tracked as a running sum of accurate differences, so it is monotone
    // even where recomputing the energy from scratch is noisier than a step
    let mut energy = fibering.energy;
    let mut history = vec![energy];
    let grad_tol = T::lit(opts.grad_tol);
    let armijo = &opts.armijo;
    let c = T::lit(armijo.slope_fraction);
    let mut converged = false;
    let mut stagnated = false;
    let mut iterations = 0;
    let mut grad = model.reduced_gradient(&u)?;
    let mut grad_residual = grad.sup_norm();

    while iterations < opts.max_iters {
        if grad_residual <= grad_tol {
            converged = true;
            break;
        }
        let mut dir = match precond {
            Some(chol) => RadialField::from_vec_unchecked(chol.solve(grad.values())),
            None => grad.clone(),
        };
        dir.enforce_even_origin();
        dir.enforce_boundary();
        let slope = grad.dot(&dir);
        if !(slope > T::zero()) {
            stagnated = true;
            break;
        }

        let mut step = T::lit(armijo.initial_step);
        let mut accepted = None;
        for _ in 0..=armijo.max_backtracks {
            let trial = u.axpy(-step, &dir).with_constraints();
            if let Ok((rep, projected)) = project_with(model, &trial, &opts.projection) {
                let change = model.energy_difference(&u, &projected)?;
                if change <= -c * step * slope {
                    accepted = Some((rep, projected, change));
                    break;
                }
            }
            step *= T::lit(armijo.shrink);
        }
        let Some((rep, projected, change)) = accepted else {
            stagnated = true;
            break;
        };
        iterations += 1;
        u = projected;
        fibering = rep;
        energy += change;
        history.push(energy);
        grad = model.reduced_gradient(&u)?;
        grad_residual = grad.sup_norm();
    }
    if !converged && grad_residual <= grad_tol {
        converged = true;
    }

    Ok(Descent {
        field: u,
        fibering,
        history,
        grad_residual,
        iterations,
        converged,
        stagnated,
    })
}

/// Checks (a)–(g) on an arbitrary field.
pub fn verify_field<T: Scalar>(
    grid: &RadialGrid<T>,
    spec: &ProblemSpec<T>,
    u: &RadialField<T>,
    tol: &Tolerances,
) -> Result<Certificate> {
    let model = EnergyModel::new(grid, spec)?;
    let terms = model.nehari_terms(u)?;
    let e = model.energy(u)?.total.as_f64();
    let q = terms.norm_v_sq.as_f64();
    let j = terms.value(spec.lambda).as_f64();
    let slope = terms.slope(spec.lambda).as_f64();
    let grad = model.reduced_gradient(u)?.sup_norm().as_f64();
    let f_u = terms.f_u.as_f64();

    let nehari_scale = q.max(1.0);
    let peak = u.sup_norm().as_f64();
    let tail = grid
        .nodes()
        .iter()
        .zip(u.values())
        .filter(|(r, _)| r.as_f64() > DECAY_REGION * grid.r_max().as_f64())
        .map(|(_, v)| v.as_f64().abs())
        .fold(0.0, f64::max);
    let tail_ratio = if peak > 0.0 { tail / peak } else { 0.0 };

    let items = vec![
        CertificateItem {
            name: "a",
            description: "|J(u)| / max(1, ||u||_V^2) <= nehari_tol",
            passed: (j / nehari_scale).abs() <= tol.nehari_tol,
            value: (j / nehari_scale).abs(),
            threshold: tol.nehari_tol,
        },
        CertificateItem {
            name: "b",
            description: "sup |grad I(u)| <= grad_tol",
            passed: grad <= tol.grad_tol,
            value: grad,
            threshold: tol.grad_tol,
        },
        CertificateItem {
            name: "c",
            description: "I(u) - ||u||_V^2 / 4 >= -1e-10",
            passed: e - 0.25 * q >= -ENERGY_FLOOR_SLACK,
            value: e - 0.25 * q,
            threshold: -ENERGY_FLOOR_SLACK,
        },
        CertificateItem {
            name: "d",
            description: "||u||_V^2 <= int f(u)u (relative slack 1e-8)",
            passed: q <= f_u + NEHARI_BOUND_SLACK * f_u.abs().max(q.abs()),
            value: q - f_u,
            threshold: NEHARI_BOUND_SLACK * f_u.abs().max(q.abs()),
        },
        CertificateItem {
            name: "e",
            description: "J'(u)u < 0",
            passed: slope < 0.0,
            value: slope,
            threshold: 0.0,
        },
        CertificateItem {
            name: "f",
            description: "I(u) > 0",
            passed: e > 0.0,
            value: e,
            threshold: 0.0,
        },
        CertificateItem {
            name: "g",
            description: "max |u| on r > 0.9 r_max is below 1e-6 max |u|",
            passed: tail_ratio <= DECAY_THRESHOLD,
            value: tail_ratio,
            threshold: DECAY_THRESHOLD,
        },
    ];
    Ok(Certificate {
        items,
        hypotheses_overridden: false,
    })
}

/// Re-evaluates the certificate of a solve result.
pub fn verify_solution<T: Scalar>(
    grid: &RadialGrid<T>,
    spec: &ProblemSpec<T>,
    result: &SolveResult<T>,
) -> Result<Certificate> {
    let mut cert = verify_field(grid, spec, &result.field, &result.tolerances)?;
    cert.hypotheses_overridden = result.certificate.hypotheses_overridden;
    Ok(cert)
}

fn gate<T: Scalar>(grid: &RadialGrid<T>, spec: &ProblemSpec<T>, force: bool) -> Result<(HypothesisReport, bool)> {
    let report = check_problem(spec, grid);
    if report.all_pass() {
        return Ok((report, false));
    }
    if !force {
        let names: Vec<&str> = report.failures().iter().map(|c| c.name).collect();
        return Err(Error::HypothesesFailed(names.join(", ")));
    }
    Ok((report, true))
}

/// Multi-start Nehari minimization.
pub fn solve_ground_state<T: Scalar>(
    grid: &RadialGrid<T>,
    spec: &ProblemSpec<T>,
    opts: &SolverOptions,
) -> Result<SolveResult<T>> {
    solve_with_starts(grid, spec, opts, &[])
}

/// As [`solve_ground_state`], with extra start fields tried after the
/// Gaussian starts.
pub fn solve_with_starts<T: Scalar>(
    grid: &RadialGrid<T>,
    spec: &ProblemSpec<T>,
    opts: &SolverOptions,
    extra: &[RadialField<T>],
) -> Result<SolveResult<T>> {
    opts.validate()?;
    if opts.starts.is_empty() && extra.is_empty() {
        return Err(Error::InvalidParameter("at least one start is required".into()));
    }
    let (_, overridden) = gate(grid, spec, opts.force)?;
    let model = EnergyModel::new(grid, spec)?;
    let precond = match opts.preconditioner {
        Preconditioner::VForm => Some(
            model
                .preconditioner()
                .ok_or_else(|| Error::InvalidParameter("V-form preconditioner is not positive definite".into()))?,
        ),
        Preconditioner::None => None,
    };

    let mut fields = Vec::with_capacity(opts.starts.len() + extra.len());
    for (k, s) in opts.starts.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(k as u64);
        fields.push(gaussian_start(grid, s, opts.perturbation, &mut rng));
    }
    for f in extra {
        grid.check(f)?;
        fields.push(f.clone().with_constraints());
    }

    let mut outcomes = Vec::with_capacity(fields.len());
    let mut best: Option<(usize, Descent<T>, T)> = None;
    // projected starts already solved, to skip starts that land on the same
    // Nehari point (e.g. the same profile at another amplitude)
    let mut seen: Vec<(RadialField<T>, usize)> = Vec::new();

    for (index, start) in fields.iter().enumerate() {
        let duplicate = project_with(&model, start, &opts.projection).ok().and_then(|(_, p)| {
            seen.iter()
                .find(|(q, _)| p.axpy(-T::one(), q).sup_norm() <= T::lit(1e-12) * p.sup_norm())
                .map(|(_, i)| *i)
                .map(|i| (p, i))
        });
        if let Some((_, earlier)) = duplicate {
            let mut o: StartOutcome<T> = outcomes
                .iter()
                .find(|o: &&StartOutcome<T>| o.index == earlier)
                .cloned()
                .expect("earlier outcome recorded");
            o.index = index;
            outcomes.push(o);
            continue;
        }

        match descend(&model, precond.as_ref(), start, opts) {
            Ok(d) => {
                let energy = model.energy(&d.field)?.total;
                outcomes.push(StartOutcome {
                    index,
                    energy: Some(energy),
                    iterations: d.iterations,
                    grad_residual: Some(d.grad_residual),
                    converged: d.converged,
                    stagnated: d.stagnated,
                    error: None,
                });
                if let Ok((_, p)) = project_with(&model, start, &opts.projection) {
                    seen.push((p, index));
                }
                if best.as_ref().is_none_or(|(_, _, e)| energy < *e) {
                    best = Some((index, d, energy));
                }
            }
            Err(e) => outcomes.push(StartOutcome {
                index,
                energy: None,
                iterations: 0,
                grad_residual: None,
                converged: false,
                stagnated: false,
                error: Some(e.to_string()),
            }),
        }
    }

    let Some((start_index, d, _)) = best else {
        return Err(Error::AllStartsFailed);
    };

    let breakdown = model.energy(&d.field)?;
    let terms = model.nehari_terms(&d.field)?;
    let norm_v_sq = terms.norm_v_sq;
    let nehari_residual = terms.value(spec.lambda).abs() / norm_v_sq.max(T::one());
    let tolerances = Tolerances {
        grad_tol: opts.grad_tol,
        nehari_tol: opts.nehari_tol,
    };
    let mut certificate = verify_field(grid, spec, &d.field, &tolerances)?;
    certificate.hypotheses_overridden = overridden;

    let mut warnings = Vec::new();
    if let Some(g) = certificate.item("g") {
        if !g.passed {
            warnings.push(format!(
                "solution has not decayed near r_max (tail ratio {:.3e}); increase r_max",
                g.value
            ));
        }
    }
    if model.origin_regularized() {
        warnings.push("potential is singular at r = 0; sampled at the half node".into());
    }
    if overridden {
        warnings.push("hypothesis certificate failed; solve forced".into());
    }
    if d.stagnated {
        warnings.push("line search exhausted before reaching grad_tol; returning best iterate".into());
    }
    let (field_min, field_max) = d.field.min_max();

    Ok(SolveResult {
        energy_m: breakdown.total,
        breakdown,
        norm_v_sq,
        nehari_residual,
        grad_residual: d.grad_residual,
        start_index,
        starts: outcomes,
        energy_history: d.history,
        converged: d.converged,
        stagnated: d.stagnated,
        field_min,
        field_max,
        fibering: d.fibering,
        tolerances,
        certificate,
        warnings,
        field: d.field,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry<T> {
    pub lambda: T,
    pub result: std::result::Result<SolveResult<T>, String>,
}

impl<T: Scalar> SweepEntry<T> {
    pub fn certified(&self) -> bool {
        matches!(&self.result, Ok(r) if r.certificate.all_pass() && !r.stagnated)
    }
}

/// Solves along ascending couplings, adding each solution as a warm start
/// for the next one. Per-λ failures are recorded and the sweep continues.
pub fn lambda_sweep<T: Scalar>(
    grid: &RadialGrid<T>,
    spec: &ProblemSpec<T>,
    lambdas: &[T],
    opts: &SolverOptions,
) -> Result<Vec<SweepEntry<T>>> {
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l >= T::zero())) || lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::LambdaOrder);
    }
    let mut out = Vec::with_capacity(lambdas.len());
    let mut warm: Option<RadialField<T>> = None;
    for &lambda in lambdas {
        let result = spec.with_lambda(lambda).and_then(|s| {
            let extra: Vec<RadialField<T>> = warm.iter().cloned().collect();
            solve_with_starts(grid, &s, opts, &extra)
        });
        if let Ok(r) = &result {
            warm = Some(r.field.clone());
        }
        out.push(SweepEntry {
            lambda,
            result: result.map_err(|e| e.to_string()),
        });
    }
    Ok(out)
}
