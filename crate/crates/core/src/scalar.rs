//! Scalar abstraction shared by the geometric and algebraic layers.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance used for unit-norm, orthogonality and physicality checks.
    fn check_tol() -> Self;

    /// Lossy conversion from `f64` constants.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    #[inline]
    fn check_tol() -> Self {
        1e-5
    }
}

impl Real for f64 {
    #[inline]
    fn check_tol() -> Self {
        1e-12
    }
}

/// Clamp into `[-1, 1]` before `acos`/`asin`.
#[inline]
pub(crate) fn clamp_unit<T: Real>(x: T) -> T {
    x.max(-T::one()).min(T::one())
}
