//! Problem data `(V, f, ρ, N, λ)` as evaluable specifications.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::Scalar;

pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
/// Returns `(f(t), f'(t), F(t))`.
pub type NonlinearityFn<T> = Arc<dyn Fn(T) -> (T, T, T) + Send + Sync>;
/// Returns `[ρ(s), ρ'(s), ρ''(s), ρ'''(s), ρ''''(s)]`.
pub type RhoFn<T> = Arc<dyn Fn(T) -> [T; 5] + Send + Sync>;

#[derive(Clone)]
pub enum PotentialProfile<T> {
    Constant,
    /// `V(r) = V_∞ - c r^{-α}` for `r <= cutoff`, `V_∞` beyond.
    InversePower {
        c: T,
        alpha: T,
        cutoff: T,
    },
    /// Piecewise-linear interpolation of `(radius, value)` samples; `V_∞`
    /// beyond the last radius.
    Tabulated {
        radii: Vec<T>,
        values: Vec<T>,
    },
    Custom(ScalarFn<T>),
}

#[derive(Clone)]
pub struct PotentialSpec<T> {
    pub v_infinity: T,
    pub profile: PotentialProfile<T>,
}

/// `V(r)` together with its split `V = V⁺ - V⁻`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValue<T> {
    pub value: T,
    pub plus: T,
    pub minus: T,
    /// The profile is singular at `r = 0` and the value was taken at the
    /// half node instead.
    pub regularized: bool,
}

impl<T: Scalar> PotentialValue<T> {
    fn split(value: T, regularized: bool) -> Self {
        let (plus, minus) = if value >= T::zero() {
            (value, T::zero())
        } else {
            (T::zero(), -value)
        };
        Self {
            value,
            plus,
            minus,
            regularized,
        }
    }
}

impl<T: Scalar> PotentialSpec<T> {
    pub fn constant(v_infinity: T) -> Self {
        Self {
            v_infinity,
            profile: PotentialProfile::Constant,
        }
    }

    pub fn inverse_power(v_infinity: T, c: T, alpha: T, cutoff: T) -> Result<Self> {
        if !(c > T::zero()) || !(alpha > T::zero() && alpha < T::lit(2.0)) || !(cutoff > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "inverse_power needs c > 0, 0 < alpha < 2, cutoff > 0 (got c = {c}, alpha = {alpha}, cutoff = {cutoff})"
            )));
        }
        Ok(Self {
            v_infinity,
            profile: PotentialProfile::InversePower { c, alpha, cutoff },
        })
    }

    pub fn tabulated(v_infinity: T, radii: Vec<T>, values: Vec<T>) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(Error::InvalidParameter(
                "tabulated potential needs at least two (radius, value) pairs of equal length".into(),
            ));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] < T::zero() {
            return Err(Error::InvalidParameter(
                "tabulated radii must be non-negative and strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("tabulated values must be finite".into()));
        }
        Ok(Self {
            v_infinity,
            profile: PotentialProfile::Tabulated { radii, values },
        })
    }

    pub fn custom(v_infinity: T, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            v_infinity,
            profile: PotentialProfile::Custom(Arc::new(f)),
        }
    }

    /// Whether `V` may be unbounded at the origin.
    pub fn singular_at_origin(&self) -> bool {
        matches!(self.profile, PotentialProfile::InversePower { .. })
    }

    fn raw(&self, r: T) -> T {
        match &self.profile {
            PotentialProfile::Constant => self.v_infinity,
            PotentialProfile::InversePower { c, alpha, cutoff } => {
                if r <= *cutoff {
                    self.v_infinity - *c * r.powf(-*alpha)
                } else {
                    self.v_infinity
                }
            }
            PotentialProfile::Tabulated { radii, values } => {
                let last = radii.len() - 1;
                if r <= radii[0] {
                    values[0]
                } else if r > radii[last] {
                    self.v_infinity
                } else {
                    let k = radii.partition_point(|&x| x < r).max(1);
                    let t = (r - radii[k - 1]) / (radii[k] - radii[k - 1]);
                    values[k - 1] + t * (values[k] - values[k - 1])
                }
            }
            PotentialProfile::Custom(f) => f(r),
        }
    }

    /// `V(r)` and its positive/negative parts. At `r = 0` a profile that is
    /// unbounded below is evaluated at `half_node` instead, and the
    /// substitution is flagged.
    pub fn evaluate(&self, r: T, half_node: T) -> PotentialValue<T> {
        if r == T::zero() && self.singular_at_origin() {
            PotentialValue::split(self.raw(half_node), true)
        } else {
            PotentialValue::split(self.raw(r), false)
        }
    }

    pub fn value(&self, r: T, half_node: T) -> T {
        self.evaluate(r, half_node).value
    }
}

impl<T: Scalar> fmt::Debug for PotentialSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let profile = match &self.profile {
            PotentialProfile::Constant => "constant".to_string(),
            PotentialProfile::InversePower { c, alpha, cutoff } => {
                format!("inverse_power(c = {c}, alpha = {alpha}, cutoff = {cutoff})")
            }
            PotentialProfile::Tabulated { radii, .. } => format!("tabulated({} points)", radii.len()),
            PotentialProfile::Custom(_) => "custom".to_string(),
        };
        write!(
            f,
            "PotentialSpec {{ v_infinity: {}, profile: {profile} }}",
            self.v_infinity
        )
    }
}

#[derive(Clone)]
pub enum NonlinearityKind<T> {
    /// `f(t) = m |t|^{p-2} t`.
    Power,
    Custom(NonlinearityFn<T>),
}

#[derive(Clone)]
pub struct NonlinearitySpec<T> {
    pub kind: NonlinearityKind<T>,
    /// Growth exponent `p` (declared, for custom kinds).
    pub p: T,
    /// Asymptotic slope `lim f(t)/t^{p-1}` (declared, for custom kinds).
    pub m: T,
}

impl<T: Scalar> NonlinearitySpec<T> {
    pub fn power(m: T, p: T) -> Result<Self> {
        if !m.is_finite() || !(p > T::lit(2.0)) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power nonlinearity needs finite m and p > 2 (got m = {m}, p = {p})"
            )));
        }
        Ok(Self {
            kind: NonlinearityKind::Power,
            p,
            m,
        })
    }

    /// Custom nonlinearity; `eval` returns `(f, f', F)`.
    pub fn custom(p: T, m: T, eval: impl Fn(T) -> (T, T, T) + Send + Sync + 'static) -> Self {
        Self {
            kind: NonlinearityKind::Custom(Arc::new(eval)),
            p,
            m,
        }
    }

    /// `(f(t), f'(t), F(t))`.
    #[inline]
    pub fn eval(&self, t: T) -> (T, T, T) {
        match &self.kind {
            NonlinearityKind::Power => {
                let a = t.abs();
                if a == T::zero() {
                    return (T::zero(), T::zero(), T::zero());
                }
                let ap2 = pow_pos(a, self.p - T::lit(2.0));
                let f = self.m * ap2 * t;
                let df = self.m * (self.p - T::one()) * ap2;
                let big_f = self.m * ap2 * a * a / self.p;
                (f, df, big_f)
            }
            NonlinearityKind::Custom(g) => g(t),
        }
    }

    /// `(f(t), F(t))`, skipping `f'`.
    #[inline]
    pub fn eval_f_and_primitive(&self, t: T) -> (T, T) {
        match &self.kind {
            NonlinearityKind::Power => {
                let a = t.abs();
                if a == T::zero() {
                    return (T::zero(), T::zero());
                }
                let ap2 = pow_pos(a, self.p - T::lit(2.0));
                (self.m * ap2 * t, self.m * ap2 * a * a / self.p)
            }
            NonlinearityKind::Custom(g) => {
                let (f, _, big_f) = g(t);
                (f, big_f)
            }
        }
    }

    /// Whether `f` is odd by construction.
    pub fn is_odd(&self) -> bool {
        matches!(self.kind, NonlinearityKind::Power)
    }
}

impl<T: Scalar> fmt::Debug for NonlinearitySpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            NonlinearityKind::Power => "power",
            NonlinearityKind::Custom(_) => "custom",
        };
        write!(f, "NonlinearitySpec {{ kind: {kind}, m: {}, p: {} }}", self.m, self.p)
    }
}

#[derive(Clone)]
pub enum RhoSpec<T> {
    /// `a + b s`
    Affine {
        a: T,
        b: T,
    },
    /// `(1 + s)^{1/2}`
    SqrtShift,
    /// `a + b s + (1 + s)^{1/2}`
    AffinePlusSqrt {
        a: T,
        b: T,
    },
    /// `(1 + s)^α`
    PowerShift {
        alpha: T,
    },
    Custom(RhoFn<T>),
}

/// Derivatives `k = 0..=4` of `(1 + s)^α`.
/// `a^e` for `a > 0`, via repeated multiplication when `e` is a small integer.
#[inline]
fn pow_pos<T: Scalar>(a: T, e: T) -> T {
    if e.fract() == T::zero() && e.abs() <= T::lit(32.0) {
        a.powi(e.to_i32().unwrap_or(0))
    } else {
        a.powf(e)
    }
}

fn shifted_power<T: Scalar>(alpha: T, s: T) -> [T; 5] {
    let x = T::one() + s;
    let mut out = [T::zero(); 5];
    let mut coeff = T::one();
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = coeff * x.powf(alpha - T::from_usize_lossy(k));
        coeff *= alpha - T::from_usize_lossy(k);
    }
    out
}

impl<T: Scalar> RhoSpec<T> {
    pub fn custom(eval: impl Fn(T) -> [T; 5] + Send + Sync + 'static) -> Self {
        RhoSpec::Custom(Arc::new(eval))
    }

    /// All derivatives of order `0..=4` at `s`.
    #[inline]
    pub fn derivatives(&self, s: T) -> [T; 5] {
        match self {
            RhoSpec::Affine { a, b } => [*a + *b * s, *b, T::zero(), T::zero(), T::zero()],
            RhoSpec::SqrtShift => shifted_power(T::lit(0.5), s),
            RhoSpec::AffinePlusSqrt { a, b } => {
                let mut d = shifted_power(T::lit(0.5), s);
                d[0] += *a + *b * s;
                d[1] += *b;
                d
            }
            RhoSpec::PowerShift { alpha } => shifted_power(*alpha, s),
            RhoSpec::Custom(f) => f(s),
        }
    }

    /// `ρ^{(order)}(s)`.
    pub fn eval(&self, s: T, order: usize) -> Result<T> {
        if order > 4 {
            return Err(Error::DerivativeOrder(order));
        }
        Ok(self.derivatives(s)[order])
    }

    /// `(ρ'(s), ρ''(s))`, the pair every energy term needs.
    #[inline]
    pub fn first_two(&self, s: T) -> (T, T) {
        match self {
            RhoSpec::Affine { b, .. } => (*b, T::zero()),
            RhoSpec::SqrtShift => {
                let x = T::one() + s;
                let d1 = T::lit(0.5) / x.sqrt();
                (d1, -T::lit(0.5) * d1 / x)
            }
            RhoSpec::AffinePlusSqrt { b, .. } => {
                let x = T::one() + s;
                let d1 = T::lit(0.5) / x.sqrt();
                (*b + d1, -T::lit(0.5) * d1 / x)
            }
            RhoSpec::PowerShift { alpha } => {
                let x = T::one() + s;
                let d1 = *alpha * x.powf(*alpha - T::one());
                (d1, (*alpha - T::one()) * d1 / x)
            }
            RhoSpec::Custom(f) => {
                let d = f(s);
                (d[1], d[2])
            }
        }
    }

    /// `ρ' ≡ 0`, so the quasilinear term vanishes identically.
    pub fn is_constant(&self) -> bool {
        matches!(self, RhoSpec::Affine { b, .. } if *b == T::zero())
    }

    pub fn name(&self) -> &'static str {
        match self {
            RhoSpec::Affine { .. } => "affine",
            RhoSpec::SqrtShift => "sqrt_shift",
            RhoSpec::AffinePlusSqrt { .. } => "affine_plus_sqrt",
            RhoSpec::PowerShift { .. } => "power_shift",
            RhoSpec::Custom(_) => "custom",
        }
    }
}

impl<T: Scalar> fmt::Debug for RhoSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoSpec::Affine { a, b } => write!(f, "affine(a = {a}, b = {b})"),
            RhoSpec::SqrtShift => write!(f, "sqrt_shift"),
            RhoSpec::AffinePlusSqrt { a, b } => write!(f, "affine_plus_sqrt(a = {a}, b = {b})"),
            RhoSpec::PowerShift { alpha } => write!(f, "power_shift(alpha = {alpha})"),
            RhoSpec::Custom(_) => write!(f, "custom"),
        }
    }
}

/// The full problem `Δ²u - Δu + V u - λ Δ[ρ(u²)] ρ'(u²) u = f(u)` in ℝ^N.
#[derive(Clone)]
pub struct ProblemSpec<T> {
    pub dim: usize,
    pub lambda: T,
    pub potential: PotentialSpec<T>,
    pub nonlinearity: NonlinearitySpec<T>,
    pub rho: RhoSpec<T>,
}

impl<T: Scalar> fmt::Debug for ProblemSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("dim", &self.dim)
            .field("lambda", &self.lambda)
            .field("potential", &self.potential)
            .field("nonlinearity", &self.nonlinearity)
            .field("rho", &self.rho)
            .finish()
    }
}

impl<T: Scalar> ProblemSpec<T> {
    pub fn new(
        dim: usize,
        lambda: T,
        potential: PotentialSpec<T>,
        nonlinearity: NonlinearitySpec<T>,
        rho: RhoSpec<T>,
    ) -> Result<Self> {
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
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
        Ok(Self {
            dim,
            lambda,
            potential,
            nonlinearity,
            rho,
        })
    }

    /// Same data with a different coupling.
    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        Self::new(
            self.dim,
            lambda,
            self.potential.clone(),
            self.nonlinearity.clone(),
            self.rho.clone(),
        )
    }
}
