use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use serde::Serialize;

/// Floating point type all discrete operators and functionals are generic over.
///
/// Implemented for `f32` and `f64`. Everything in this crate is written
/// against this trait; the concrete aliases at the crate root fix `f64`.
pub trait Scalar:
    'static
    + Send
    + Sync
    + Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Serialize
{
    /// Converts an `f64` literal. Panics only if the literal is not
    /// representable at all, which never happens for finite constants.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `Γ(k/2)` for a positive integer `k`, exact up to rounding.
pub fn gamma_half<T: Scalar>(k: usize) -> T {
    assert!(k > 0, "gamma_half needs k > 0");
    if k.is_multiple_of(2) {
        // (k/2 - 1)!
        (1..k / 2).fold(T::one(), |acc, j| acc * T::from_usize_lossy(j))
    } else {
        // Γ(1/2) = √π, Γ(x + 1) = x Γ(x)
        let mut g = T::PI().sqrt();
        let half = T::lit(0.5);
        let mut x = half;
        for _ in 0..(k - 1) / 2 {
            g *= x;
            x += T::one();
        }
        g
    }
}

/// Surface measure of the unit sphere in ℝ^dim.
pub fn unit_sphere_area<T: Scalar>(dim: usize) -> T {
    let two = T::lit(2.0);
    two * T::PI().powf(T::from_usize_lossy(dim) / two) / gamma_half::<T>(dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_half_values() {
        assert_relative_eq!(gamma_half::<f64>(1), std::f64::consts::PI.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(gamma_half::<f64>(2), 1.0);
        assert_relative_eq!(gamma_half::<f64>(3), 0.5 * std::f64::consts::PI.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(gamma_half::<f64>(8), 6.0);
        assert_relative_eq!(gamma_half::<f64>(12), 120.0);
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert_relative_eq!(unit_sphere_area::<f64>(2), 2.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(unit_sphere_area::<f64>(3), 4.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(unit_sphere_area::<f64>(4), 2.0 * PI * PI, epsilon = 1e-13);
        assert_relative_eq!(unit_sphere_area::<f32>(3), 4.0 * std::f32::consts::PI, epsilon = 1e-5);
    }
}
