//! Fibering map `g(t) = I_λ(tu)` and projection of a field onto the Nehari
//! set `{u ≠ 0 : I'_λ(u)u = 0}`.
//!
//! Critical points of `g` are exactly the Nehari points on the ray through
//! `u`. The projection scans `g'` on a geometric grid, bisects every sign
//! change, and keeps the critical point with the largest `g`.

use serde::Serialize;

use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::problem::ProblemSpec;
use crate::Scalar;

/// Fields with nodal sup below this are treated as zero.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionOptions {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: usize,
    /// Accept `|g'(t*)| <= tol * max(1, ‖u‖_V²)`.
    pub tolerance: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            t_min: 1e-6,
            t_max: 1e6,
            points_per_decade: 60,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberingReport<T> {
    pub t_star: T,
    /// `|I'_λ(t* u)(u)| = |g'(t*)|`
    pub residual: T,
    pub bracket: (T, T),
    /// Sign changes of `g'` found on the scan grid.
    pub critical_count: usize,
    /// `g(t*)`, the energy of the projected field.
    pub energy: T,
}

/// Precomputed data for evaluating `g` and `g'` along one ray.
pub struct Ray<'m, 'a, T> {
    model: &'m EnergyModel<'a, T>,
    u: Vec<T>,
    du: Vec<T>,
    norm_v_sq: T,
}

impl<'m, 'a, T: Scalar> Ray<'m, 'a, T> {
    pub fn new(model: &'m EnergyModel<'a, T>, u: &RadialField<T>) -> Result<Self> {
        let grid = model.grid();
        let du = grid.derivative(u)?;
        let norm_v_sq = model.norm_v_sq(u)?;
        Ok(Self {
            model,
            u: u.values().to_vec(),
            du: du.into_values(),
            norm_v_sq,
        })
    }

    pub fn norm_v_sq(&self) -> T {
        self.norm_v_sq
    }

    /// `(g(t), g'(t))`.
    pub fn eval(&self, t: T) -> (T, T) {
        if t == T::zero() {
            return (T::zero(), T::zero());
        }
        let spec = self.model.spec();
        let w = self.model.grid().weights();
        let lambda = spec.lambda;
        let quasi = lambda != T::zero() && !spec.rho.is_constant();
        let half = T::lit(0.5);
        let four = T::lit(4.0);

        let mut phi = T::zero();
        let mut dphi = T::zero();
        let mut big_f = T::zero();
        let mut f_u = T::zero();
        for i in 0..self.u.len() {
            let ui = self.u[i];
            if ui == T::zero() {
                continue;
            }
            let x = t * ui;
            let (fx, fprim) = spec.nonlinearity.eval_f_and_primitive(x);
            big_f += w[i] * fprim;
            f_u += w[i] * fx * ui;
            if quasi {
                let s = x * x;
                let (d1, d2) = spec.rho.first_two(s);
                let wd2 = w[i] * self.du[i] * self.du[i];
                phi += wd2 * d1 * d1 * s;
                dphi += wd2 * s * d1 * (d2 * s + d1);
            }
        }
        let t2 = t * t;
        // Φ(tu) = t² Σ w ρ'(s)² s (Du)², s = t²u²
        let g = half * t2 * self.norm_v_sq + lambda * t2 * phi - big_f;
        let dg = t * self.norm_v_sq + lambda * four * t * dphi - f_u;
        (g, dg)
    }

    fn bisect(&self, mut lo: T, mut hi: T, mut dg_lo: T) -> T {
        let eps = T::epsilon();
        for _ in 0..200 {
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= T::lit(2.0) * eps * hi {
                break;
            }
            let (_, dg_mid) = self.eval(mid);
            if dg_mid == T::zero() {
                return mid;
            }
            if (dg_mid > T::zero()) == (dg_lo > T::zero()) {
                lo = mid;
                dg_lo = dg_mid;
            } else {
                hi = mid;
            }
        }
        let (_, a) = self.eval(lo);
        let (_, b) = self.eval(hi);
        if a.abs() <= b.abs() {
            lo
        } else {
            hi
        }
    }

    /// Geometric scan points `t_min · 10^{k/ppd}`.
    pub fn scan_points(opts: &ProjectionOptions) -> Vec<T> {
        let decades = (opts.t_max / opts.t_min).log10();
        let count = (decades * opts.points_per_decade as f64).round() as usize;
        (0..=count)
            .map(|k| T::lit(opts.t_min * 10f64.powf(k as f64 / opts.points_per_decade as f64)))
            .collect()
    }

    pub fn project(&self, opts: &ProjectionOptions) -> Result<FiberingReport<T>> {
        let ts = Self::scan_points(opts);
        let dgs: Vec<T> = ts.iter().map(|&t| self.eval(t).1).collect();

        let mut roots: Vec<(T, (T, T))> = Vec::new();
        let mut brackets = 0;
        for k in 0..ts.len() - 1 {
            let (a, b) = (dgs[k], dgs[k + 1]);
            if a == T::zero() {
                if k == 0 || dgs[k - 1] != T::zero() {
                    brackets += 1;
                    roots.push((ts[k], (ts[k], ts[k])));
                }
                continue;
            }
            if b != T::zero() && (a > T::zero()) != (b > T::zero()) {
                brackets += 1;
                roots.push((self.bisect(ts[k], ts[k + 1], a), (ts[k], ts[k + 1])));
            }
        }
        if roots.is_empty() {
            return Err(Error::NoProjection {
                t_min: opts.t_min,
                t_max: opts.t_max,
            });
        }

        let mut best: Option<FiberingReport<T>> = None;
        for (t, bracket) in roots {
            let (g, dg) = self.eval(t);
            if best.as_ref().is_none_or(|b| g > b.energy) {
                best = Some(FiberingReport {
                    t_star: t,
                    residual: dg.abs(),
                    bracket,
                    critical_count: brackets,
                    energy: g,
                });
            }
        }
        let report = best.expect("at least one root");
        let tolerance = T::lit(opts.tolerance) * self.norm_v_sq.max(T::one());
        if !(report.residual <= tolerance) {
            return Err(Error::ProjectionTolerance {
                residual: report.residual.as_f64(),
                tolerance: tolerance.as_f64(),
            });
        }
        Ok(report)
    }
}

fn check_nonzero<T: Scalar>(u: &RadialField<T>) -> Result<()> {
    if u.sup_norm() <= T::lit(AMPLITUDE_FLOOR) {
        return Err(Error::ZeroField);
    }
    Ok(())
}

/// `(g(t), g'(t))` with `g(t) = I_λ(tu)` and `g'(t) = J_λ(tu)/t`.
pub fn fibering_map<T: Scalar>(
    grid: &RadialGrid<T>,
    spec: &ProblemSpec<T>,
    u: &RadialField<T>,
    t: T,
) -> Result<(T, T)> {
    check_nonzero(u)?;
    let model = EnergyModel::new(grid, spec)?;
    Ok(Ray::new(&model, u)?.eval(t))
}

/// Rows `(t, g(t), g'(t))` over the projection scan grid.
pub fn fibering_table<T: Scalar>(
    model: &EnergyModel<'_, T>,
    u: &RadialField<T>,
    opts: &ProjectionOptions,
) -> Result<Vec<(T, T, T)>> {
    check_nonzero(u)?;
    let ray = Ray::new(model, u)?;
    Ok(Ray::<T>::scan_points(opts)
        .into_iter()
        .map(|t| {
            let (g, dg) = ray.eval(t);
            (t, g, dg)
        })
        .collect())
}

/// Projects `u` onto the Nehari set with an existing model.
pub fn project_with<T: Scalar>(
    model: &EnergyModel<'_, T>,
    u: &RadialField<T>,
    opts: &ProjectionOptions,
) -> Result<(FiberingReport<T>, RadialField<T>)> {
    check_nonzero(u)?;
    let report = Ray::new(model, u)?.project(opts)?;
    Ok((report, u.scaled(report.t_star)))
}

/// Finds `t* > 0` with `t* u` on the Nehari set, selecting the global
/// maximizer of the fibering map among all scanned critical points.
pub fn project_to_nehari<T: Scalar>(
    grid: &RadialGrid<T>,
    spec: &ProblemSpec<T>,
    u: &RadialField<T>,
) -> Result<(FiberingReport<T>, RadialField<T>)> {
    let model = EnergyModel::new(grid, spec)?;
    project_with(&model, u, &ProjectionOptions::default())
}
