//! Discrete energy `I_λ`, its exact nodal gradient, and the Nehari functionals
//! `J_λ(u) = I'_λ(u)u` and `J'_λ(u)u`.
//!
//! With `L` the discrete Laplacian, `D` the discrete radial derivative and `w`
//! the quadrature weights, the discrete energy is
//!
//! ```text
//! I(u) = ½ Σ w [(Lu)² + (Du)² + V u²] + λ Σ w ρ'(u²)² u² (Du)² - Σ w F(u)
//! ```
//!
//! where the middle sum is `Φ(u) = ¼∫|∇ρ(u²)|²`. Every other quantity in this
//! module is an exact derivative of this expression, so directional finite
//! differences of `energy` reproduce `gradient` to roundoff.

use serde::Serialize;

use crate::banded::BandCholesky;
use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::problem::{ProblemSpec, RhoSpec};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown<T> {
    /// `∫|Δu|²`
    pub quad_bilap: T,
    /// `∫|∇u|²`
    pub quad_grad: T,
    /// `∫V u²`
    pub quad_pot: T,
    /// `¼∫|∇ρ(u²)|²`
    pub phi: T,
    /// `∫F(u)`
    pub nonlinear: T,
    pub total: T,
}

impl<T: Scalar> EnergyBreakdown<T> {
    pub fn norm_v_sq(&self) -> T {
        self.quad_bilap + self.quad_grad + self.quad_pot
    }

    /// Recombines the parts with coupling `lambda`.
    pub fn recombine(&self, lambda: T) -> T {
        T::lit(0.5) * self.norm_v_sq() + lambda * self.phi - self.nonlinear
    }
}

/// Integrals entering `J_λ(u)` and `J'_λ(u)u`, before the coupling is applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NehariTerms<T> {
    pub norm_v_sq: T,
    /// `∫ρ'(u²)ρ''(u²)u⁴|∇u|²`
    pub cross: T,
    /// `∫ρ'(u²)²u²|∇u|²`, equal to `Φ(u)`
    pub phi: T,
    /// `∫ρ''(u²)²u⁶|∇u|²`
    pub second_sq: T,
    /// `∫ρ'(u²)ρ'''(u²)u⁶|∇u|²`
    pub first_third: T,
    /// `∫f(u)u`
    pub f_u: T,
    /// `∫f'(u)u²`
    pub df_u2: T,
}

impl<T: Scalar> NehariTerms<T> {
    /// `J_λ(u) = ‖u‖_V² + 4λ∫ρ'ρ''u⁴|∇u|² + λ∫|∇ρ(u²)|² - ∫f(u)u`.
    pub fn value(&self, lambda: T) -> T {
        let four = T::lit(4.0);
        self.norm_v_sq + lambda * (four * self.cross + four * self.phi) - self.f_u
    }

    /// `d/dt J_λ(tu)` at `t = 1`.
    pub fn slope(&self, lambda: T) -> T {
        let quasi = T::lit(8.0) * self.second_sq
            + T::lit(8.0) * self.first_third
            + T::lit(40.0) * self.cross
            + T::lit(16.0) * self.phi;
        T::lit(2.0) * self.norm_v_sq + lambda * quasi - (self.df_u2 + self.f_u)
    }
}

/// Left- and right-hand sides of two integral inequalities that follow from
/// `ρ' >= -√2 ρ'' s >= 0`. Exposed for diagnostics only: on a discrete field
/// a violation signals quadrature error rather than a bug.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasilinearInequalities<T> {
    /// `2∫[ρ''(u²)u²]²u²|∇u|²` versus `∫ρ'(u²)²u²|∇u|²`
    pub second_sq_lhs: T,
    pub second_sq_rhs: T,
    /// `2∫ρ'ρ''u⁴|∇u|²` versus `∫ρ'ρ''u⁴|∇u|²`
    pub cross_lhs: T,
    pub cross_rhs: T,
}

impl<T: Scalar> QuasilinearInequalities<T> {
    pub fn hold(&self) -> bool {
        self.second_sq_lhs <= self.second_sq_rhs && self.cross_lhs <= self.cross_rhs
    }
}

/// Discrete energy for one grid and problem, with the potential sampled once.
#[derive(Clone)]
pub struct EnergyModel<'a, T> {
    grid: &'a RadialGrid<T>,
    spec: &'a ProblemSpec<T>,
    potential: Vec<T>,
    potential_minus: Vec<T>,
    origin_regularized: bool,
}

struct Quadratic<T> {
    lu: Vec<T>,
    du: Vec<T>,
    bilap: T,
    grad: T,
    pot: T,
}

impl<'a, T: Scalar> EnergyModel<'a, T> {
    pub fn new(grid: &'a RadialGrid<T>, spec: &'a ProblemSpec<T>) -> Result<Self> {
        if grid.dim() != spec.dim {
            return Err(Error::InvalidParameter(format!(
                "grid dimension {} does not match problem dimension {}",
                grid.dim(),
                spec.dim
            )));
        }
        let half = grid.spacing() * T::lit(0.5);
        let mut origin_regularized = false;
        let mut potential = Vec::with_capacity(grid.len());
        let mut potential_minus = Vec::with_capacity(grid.len());
        for &r in grid.nodes() {
            let v = spec.potential.evaluate(r, half);
            origin_regularized |= v.regularized;
            potential.push(v.value);
            potential_minus.push(v.minus);
        }
        if let Some(i) = potential.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            grid,
            spec,
            potential,
            potential_minus,
            origin_regularized,
        })
    }

    pub fn grid(&self) -> &'a RadialGrid<T> {
        self.grid
    }

    pub fn spec(&self) -> &'a ProblemSpec<T> {
        self.spec
    }

    /// Nodal samples of `V`.
    pub fn potential(&self) -> &[T] {
        &self.potential
    }

    /// Nodal samples of `V⁻`.
    pub fn potential_minus(&self) -> &[T] {
        &self.potential_minus
    }

    /// The potential was singular at `r = 0` and sampled at the half node.
    pub fn origin_regularized(&self) -> bool {
        self.origin_regularized
    }

    fn quadratic(&self, u: &RadialField<T>) -> Result<Quadratic<T>> {
        self.grid.check(u)?;
        let g = self.grid;
        let lu = g.laplacian_matrix().matvec(u.values());
        let du = g.derivative_matrix().matvec(u.values());
        let w = g.weights();
        let uv = u.values();
        let mut bilap = T::zero();
        let mut grad = T::zero();
        let mut pot = T::zero();
        for i in 0..uv.len() {
            bilap += w[i] * lu[i] * lu[i];
            grad += w[i] * du[i] * du[i];
            pot += w[i] * self.potential[i] * uv[i] * uv[i];
        }
        Ok(Quadratic {
            lu,
            du,
            bilap,
            grad,
            pot,
        })
    }

    /// `‖u‖_V² = ∫(|Δu|² + |∇u|² + V u²)`.
    pub fn norm_v_sq(&self, u: &RadialField<T>) -> Result<T> {
        let q = self.quadratic(u)?;
        Ok(q.bilap + q.grad + q.pot)
    }

    pub fn energy(&self, u: &RadialField<T>) -> Result<EnergyBreakdown<T>> {
        let q = self.quadratic(u)?;
        let phi = phi_sum(self.grid.weights(), &self.spec.rho, u.values(), &q.du);
        let nonlinear = self.nonlinear_sum(u.values());
        let mut out = EnergyBreakdown {
            quad_bilap: q.bilap,
            quad_grad: q.grad,
            quad_pot: q.pot,
            phi,
            nonlinear,
            total: T::zero(),
        };
        out.total = out.recombine(self.spec.lambda);
        Ok(out)
    }

    fn nonlinear_sum(&self, u: &[T]) -> T {
        let w = self.grid.weights();
        let f = &self.spec.nonlinearity;
        u.iter()
            .zip(w)
            .fold(T::zero(), |acc, (&x, &wi)| acc + wi * f.eval_f_and_primitive(x).1)
    }

    /// `I(v) - I(u)` evaluated from `δ = v - u`, e.g. `(Lv)² - (Lu)² =
    /// (Lδ)(Lv + Lu)`. The operators amplify roundoff by `h⁻²`, so subtracting
    /// two energies loses the small differences a line search has to resolve.
    pub fn energy_difference(&self, u: &RadialField<T>, v: &RadialField<T>) -> Result<T> {
        self.grid.check(u)?;
        self.grid.check(v)?;
        let g = self.grid;
        let w = g.weights();
        let (uv, vv) = (u.values(), v.values());
        let n = uv.len();
        let delta: Vec<T> = (0..n).map(|i| vv[i] - uv[i]).collect();
        let sum: Vec<T> = (0..n).map(|i| vv[i] + uv[i]).collect();
        let (lap, der) = (g.laplacian_matrix(), g.derivative_matrix());
        let (ld, ls) = (lap.matvec(&delta), lap.matvec(&sum));
        let (dd, ds) = (der.matvec(&delta), der.matvec(&sum));
        let f = &self.spec.nonlinearity;

        let mut quad = T::zero();
        let mut nonlinear = T::zero();
        for i in 0..n {
            quad += w[i] * (ld[i] * ls[i] + dd[i] * ds[i] + self.potential[i] * delta[i] * sum[i]);
            nonlinear += w[i] * (f.eval_f_and_primitive(vv[i]).1 - f.eval_f_and_primitive(uv[i]).1);
        }
        let mut total = T::lit(0.5) * quad - nonlinear;

        let rho = &self.spec.rho;
        if self.spec.lambda != T::zero() && !rho.is_constant() {
            let psi = |x: T| {
                let s = x * x;
                let d1 = rho.first_two(s).0;
                d1 * d1 * s
            };
            let dv = der.matvec(vv);
            let mut phi = T::zero();
            for i in 0..n {
                let pu = psi(uv[i]);
                phi += w[i] * ((psi(vv[i]) - pu) * dv[i] * dv[i] + pu * dd[i] * ds[i]);
            }
            total += self.spec.lambda * phi;
        }
        Ok(total)
    }

    /// Nodal gradient `∂I/∂u_k` of the discrete energy, with the Dirichlet
    /// node zeroed. `gradient(u)·φ` is the directional derivative along `φ`.
    pub fn gradient(&self, u: &RadialField<T>) -> Result<RadialField<T>> {
        let q = self.quadratic(u)?;
        let g = self.grid;
        let w = g.weights();
        let uv = u.values();
        let n = uv.len();
        let lambda = self.spec.lambda;
        let rho = &self.spec.rho;
        let two = T::lit(2.0);

        let wl: Vec<T> = (0..n).map(|i| w[i] * q.lu[i]).collect();
        let mut flux: Vec<T> = (0..n).map(|i| w[i] * q.du[i]).collect();
        let mut local: Vec<T> = (0..n)
            .map(|i| w[i] * (self.potential[i] * uv[i] - self.spec.nonlinearity.eval_f_and_primitive(uv[i]).0))
            .collect();

        if lambda != T::zero() && !rho.is_constant() {
            for i in 0..n {
                let x = uv[i];
                let s = x * x;
                let (d1, d2) = rho.first_two(s);
                let d = q.du[i];
                // ∂/∂u of ρ'(u²)² u² times (Du)²
                local[i] += lambda * w[i] * two * x * (two * d1 * d2 * s + d1 * d1) * d * d;
                // the (Du)² factor, pulled back through Dᵀ below
                flux[i] += lambda * two * w[i] * d1 * d1 * s * d;
            }
        }

        let a = g.laplacian_matrix().matvec_transpose(&wl);
        let b = g.derivative_matrix().matvec_transpose(&flux);
        let mut grad: Vec<T> = (0..n).map(|i| a[i] + b[i] + local[i]).collect();
        grad[n - 1] = T::zero();
        Ok(RadialField::from_vec_unchecked(grad))
    }

    /// Gradient on the subspace where `u_0` follows `u_1, u_2` (see
    /// [`RadialField::enforce_even_origin`]): the origin component is folded
    /// into nodes 1 and 2 by the chain rule and then zeroed.
    pub fn reduced_gradient(&self, u: &RadialField<T>) -> Result<RadialField<T>> {
        let mut g = self.gradient(u)?;
        let v = g.values_mut();
        if v.len() >= 3 {
            let g0 = v[0];
            let third = T::one() / T::lit(3.0);
            v[1] += T::lit(4.0) * third * g0;
            v[2] -= third * g0;
            v[0] = T::zero();
        }
        Ok(g)
    }

    pub fn nehari_terms(&self, u: &RadialField<T>) -> Result<NehariTerms<T>> {
        let q = self.quadratic(u)?;
        let w = self.grid.weights();
        let rho = &self.spec.rho;
        let f = &self.spec.nonlinearity;
        let mut t = NehariTerms {
            norm_v_sq: q.bilap + q.grad + q.pot,
            cross: T::zero(),
            phi: T::zero(),
            second_sq: T::zero(),
            first_third: T::zero(),
            f_u: T::zero(),
            df_u2: T::zero(),
        };
        for (i, &x) in u.values().iter().enumerate() {
            let s = x * x;
            let wg = w[i] * q.du[i] * q.du[i];
            let d = rho.derivatives(s);
            t.cross += wg * d[1] * d[2] * s * s;
            t.phi += wg * d[1] * d[1] * s;
            t.second_sq += wg * d[2] * d[2] * s * s * s;
            t.first_third += wg * d[1] * d[3] * s * s * s;
            let (fx, dfx, _) = f.eval(x);
            t.f_u += w[i] * fx * x;
            t.df_u2 += w[i] * dfx * s;
        }
        Ok(t)
    }

    /// `J_λ(u) = I'_λ(u)u`.
    pub fn nehari_value(&self, u: &RadialField<T>) -> Result<T> {
        Ok(self.nehari_terms(u)?.value(self.spec.lambda))
    }

    /// `J'_λ(u)u = d/dt J_λ(tu)` at `t = 1`.
    pub fn nehari_slope(&self, u: &RadialField<T>) -> Result<T> {
        Ok(self.nehari_terms(u)?.slope(self.spec.lambda))
    }

    pub fn quasilinear_inequalities(&self, u: &RadialField<T>) -> Result<QuasilinearInequalities<T>> {
        let t = self.nehari_terms(u)?;
        let two = T::lit(2.0);
        Ok(QuasilinearInequalities {
            second_sq_lhs: two * t.second_sq,
            second_sq_rhs: t.phi,
            cross_lhs: two * t.cross,
            cross_rhs: t.cross,
        })
    }

    /// Cholesky factor of the V-form matrix `LᵀWL + DᵀWD + W V⁺`, with the
    /// Dirichlet node pinned. Used to precondition descent directions.
    pub fn preconditioner(&self) -> Option<BandCholesky<T>> {
        let g = self.grid;
        let w = g.weights();
        let mut a = g
            .laplacian_matrix()
            .weighted_gram(w)
            .plus(&g.derivative_matrix().weighted_gram(w));
        let mass: Vec<T> = w
            .iter()
            .zip(&self.potential)
            .map(|(&wi, &v)| wi * v.max(T::zero()))
            .collect();
        a.add_diagonal(&mass);
        a.pin_identity(g.len() - 1);
        a.cholesky()
    }
}

fn phi_sum<T: Scalar>(w: &[T], rho: &RhoSpec<T>, u: &[T], du: &[T]) -> T {
    if rho.is_constant() {
        return T::zero();
    }
    let mut acc = T::zero();
    for i in 0..u.len() {
        let s = u[i] * u[i];
        let d1 = rho.first_two(s).0;
        acc += w[i] * d1 * d1 * s * du[i] * du[i];
    }
    acc
}

/// `‖u‖_V²` on `grid` for `spec`.
pub fn norm_v_sq<T: Scalar>(grid: &RadialGrid<T>, spec: &ProblemSpec<T>, u: &RadialField<T>) -> Result<T> {
    EnergyModel::new(grid, spec)?.norm_v_sq(u)
}

/// `Φ(u) = ¼∫|∇ρ(u²)|² = ∫ρ'(u²)²u²|∇u|²`.
pub fn phi_term<T: Scalar>(grid: &RadialGrid<T>, rho: &RhoSpec<T>, u: &RadialField<T>) -> Result<T> {
    let du = grid.derivative(u)?;
    Ok(phi_sum(grid.weights(), rho, u.values(), du.values()))
}

pub fn energy<T: Scalar>(
    grid: &RadialGrid<T>,
    spec: &ProblemSpec<T>,
    u: &RadialField<T>,
) -> Result<EnergyBreakdown<T>> {
    EnergyModel::new(grid, spec)?.energy(u)
}

pub fn gradient<T: Scalar>(grid: &RadialGrid<T>, spec: &ProblemSpec<T>, u: &RadialField<T>) -> Result<RadialField<T>> {
    EnergyModel::new(grid, spec)?.gradient(u)
}

pub fn nehari_value<T: Scalar>(grid: &RadialGrid<T>, spec: &ProblemSpec<T>, u: &RadialField<T>) -> Result<T> {
    EnergyModel::new(grid, spec)?.nehari_value(u)
}

pub fn nehari_slope<T: Scalar>(grid: &RadialGrid<T>, spec: &ProblemSpec<T>, u: &RadialField<T>) -> Result<T> {
    EnergyModel::new(grid, spec)?.nehari_slope(u)
}
