//! Uniform radial mesh on `[0, r_max]`, nodal fields, and the finite-difference
//! operators acting on radial functions in ℝ^N.
//!
//! A radial function `u(|x|)` is stored by its nodal values `u_i ≈ u(r_i)`.
//! Integrals over ℝ^N reduce to `ω_{N-1} ∫ f(r) r^{N-1} dr`, evaluated with
//! trapezoid weights that carry the `r^{N-1}` factor, so `w_0 = 0`.
//!
//! Boundary data at `r_max` are of Navier type: `u = 0` (imposed on trial
//! fields) and `Δu = 0` (built into the last row of the Laplacian). At the
//! origin the Laplacian uses the even ghost value `u_{-1} = u_1`, which gives
//! `Δu(0) = N u''(0)`.

use serde::Serialize;

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::scalar::unit_sphere_area;
use crate::Scalar;

pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone)]
pub struct RadialGrid<T> {
    dim: usize,
    r_max: T,
    h: T,
    nodes: Vec<T>,
    weights: Vec<T>,
    laplacian: BandMatrix<T>,
    derivative: BandMatrix<T>,
}

/// Nodal values of a radial function.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RadialField<T> {
    values: Vec<T>,
}

impl<T: Scalar> RadialField<T> {
    /// Wraps nodal values, rejecting NaN or infinite entries.
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub(crate) fn from_vec_unchecked(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![T::zero(); n],
        }
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: &RadialGrid<T>, f: impl Fn(T) -> T) -> Self {
        Self {
            values: grid.nodes().iter().map(|&r| f(r)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Imposes the Dirichlet condition `u(r_max) = 0`.
    pub fn enforce_boundary(&mut self) {
        if let Some(last) = self.values.last_mut() {
            *last = T::zero();
        }
    }

    pub fn with_boundary(mut self) -> Self {
        self.enforce_boundary();
        self
    }

    /// Sets `u_0 = (4u_1 - u_2)/3`, the value at the origin of the even
    /// quadratic in `r` through the first two interior nodes. Without it
    /// `u_0` only enters the energy through the central difference at
    /// `r = h`, and the minimizer uses it to flatten `u'(h)`.
    pub fn enforce_even_origin(&mut self) {
        if self.values.len() >= 3 {
            let third = T::one() / T::lit(3.0);
            self.values[0] = (T::lit(4.0) * self.values[1] - self.values[2]) * third;
        }
    }

    /// Both [`enforce_even_origin`](Self::enforce_even_origin) and the
    /// Dirichlet node.
    pub fn with_constraints(mut self) -> Self {
        self.enforce_even_origin();
        self.enforce_boundary();
        self
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: T, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + c * b)
                .collect(),
        }
    }

    /// Plain nodal dot product.
    pub fn dot(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn min_max(&self) -> (T, T) {
        self.values
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

impl<T: Scalar> RadialGrid<T> {
    /// Grid for `3 <= dim <= 6`, the range required when the quasilinear
    /// coupling is active.
    pub fn new(dim: usize, r_max: T, n: usize) -> Result<Self> {
        Self::for_coupling(dim, r_max, n, T::one())
    }

    /// Grid whose dimension bound depends on the coupling: `3..=6` for
    /// `lambda > 0`, any `dim >= 3` for `lambda = 0`.
    pub fn for_coupling(dim: usize, r_max: T, n: usize, lambda: T) -> Result<Self> {
        let dim_ok = if lambda == T::zero() {
            dim >= 3
        } else {
            (3..=6).contains(&dim)
        };
        if !dim_ok {
            return Err(Error::Dimension {
                dim,
                lambda: lambda.as_f64(),
            });
        }
        if !(r_max > T::zero()) || !r_max.is_finite() {
            return Err(Error::RadiusNotPositive(r_max.as_f64()));
        }
        if n < MIN_NODES {
            return Err(Error::TooFewNodes(n));
        }

        let h = r_max / T::from_usize_lossy(n - 1);
        let mut nodes: Vec<T> = (0..n).map(|i| T::from_usize_lossy(i) * h).collect();
        nodes[n - 1] = r_max;

        let omega = unit_sphere_area::<T>(dim);
        let half = T::lit(0.5);
        let weights = nodes
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let trap = if i == 0 || i == n - 1 { half } else { T::one() };
                omega * r.powi(dim as i32 - 1) * trap * h
            })
            .collect();

        let laplacian = laplacian_matrix(dim, h, &nodes);
        let derivative = derivative_matrix(h, n);

        Ok(Self {
            dim,
            r_max,
            h,
            nodes,
            weights,
            laplacian,
            derivative,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> T {
        self.h
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn laplacian_matrix(&self) -> &BandMatrix<T> {
        &self.laplacian
    }

    pub fn derivative_matrix(&self) -> &BandMatrix<T> {
        &self.derivative
    }

    pub(crate) fn check(&self, u: &RadialField<T>) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::SizeMismatch {
                field: u.len(),
                grid: self.len(),
            });
        }
        Ok(())
    }

    /// Discrete `Δu = u'' + (N-1)/r u'`, with `Δu(r_max) = 0`.
    pub fn laplacian(&self, u: &RadialField<T>) -> Result<RadialField<T>> {
        self.check(u)?;
        Ok(RadialField::from_vec_unchecked(self.laplacian.matvec(u.values())))
    }

    /// Discrete `Δ²u`, the Laplacian applied twice with Navier data.
    pub fn bilaplacian(&self, u: &RadialField<T>) -> Result<RadialField<T>> {
        let lu = self.laplacian(u)?;
        self.laplacian(&lu)
    }

    /// Discrete `u'(r)`: central differences inside, `u'(0) = 0`, one-sided
    /// second-order stencil at `r_max`.
    pub fn derivative(&self, u: &RadialField<T>) -> Result<RadialField<T>> {
        self.check(u)?;
        Ok(RadialField::from_vec_unchecked(self.derivative.matvec(u.values())))
    }

    /// `∫_{|x| < r_max} f dx` by weighted trapezoid quadrature.
    pub fn integrate(&self, f: &[T]) -> Result<T> {
        if f.len() != self.len() {
            return Err(Error::SizeMismatch {
                field: f.len(),
                grid: self.len(),
            });
        }
        if let Some(i) = f.iter().position(|v| v.is_nan()) {
            return Err(Error::NonFinite(i));
        }
        Ok(self.quad(f))
    }

    #[inline]
    pub(crate) fn quad(&self, f: &[T]) -> T {
        self.weights.iter().zip(f).fold(T::zero(), |acc, (&w, &v)| acc + w * v)
    }

    /// Discrete `|u|_p = (∫ |u|^p)^{1/p}`.
    pub fn lp_norm(&self, u: &[T], p: T) -> Result<T> {
        if !(p >= T::one()) {
            return Err(Error::Exponent(p.as_f64()));
        }
        let powered: Vec<T> = u.iter().map(|v| v.abs().powf(p)).collect();
        Ok(self.integrate(&powered)?.powf(p.recip()))
    }

    /// Volume of the ball of radius `r_max` (exact, for reference).
    pub fn ball_volume(&self) -> T {
        unit_sphere_area::<T>(self.dim) * self.r_max.powi(self.dim as i32) / T::from_usize_lossy(self.dim)
    }
}

fn laplacian_matrix<T: Scalar>(dim: usize, h: T, nodes: &[T]) -> BandMatrix<T> {
    let n = nodes.len();
    let mut m = BandMatrix::zeros(n, 2);
    let inv_h2 = (h * h).recip();
    let nn = T::from_usize_lossy(dim);
    let two = T::lit(2.0);
    // Δu(0) = N u''(0), u''(0) ≈ 2 (u_1 - u_0) / h², plus a u'''' term
    // (u_2 - 4u_1 + 3u_0 ≈ u''''h⁴/2) that gives the origin row the same
    // h² error constant as the interior rows have as r → 0. Without it
    // Lu jumps by O(h²) at the origin, and Δ² = L∘L turns that into O(1).
    let c = (nn - T::one()) / T::lit(6.0) * inv_h2;
    m.set(0, 0, -two * nn * inv_h2 + T::lit(3.0) * c);
    m.set(0, 1, two * nn * inv_h2 - T::lit(4.0) * c);
    m.set(0, 2, c);
    for i in 1..n - 1 {
        let c = (nn - T::one()) / (two * h * nodes[i]);
        m.set(i, i - 1, inv_h2 - c);
        m.set(i, i, -two * inv_h2);
        m.set(i, i + 1, inv_h2 + c);
    }
    m
}

fn derivative_matrix<T: Scalar>(h: T, n: usize) -> BandMatrix<T> {
    let mut m = BandMatrix::zeros(n, 2);
    let inv_2h = (T::lit(2.0) * h).recip();
    for i in 1..n - 1 {
        m.set(i, i - 1, -inv_2h);
        m.set(i, i + 1, inv_2h);
    }
    m.set(n - 1, n - 1, T::lit(3.0) * inv_2h);
    m.set(n - 1, n - 2, T::lit(-4.0) * inv_2h);
    m.set(n - 1, n - 3, inv_2h);
    m
}
