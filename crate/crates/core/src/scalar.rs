//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating point scalar usable by the kernels, grids and solvers: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Tolerance floor below which relative accuracy targets are meaningless.
    #[inline]
    fn quad_eps() -> Self {
        Self::epsilon() * Self::lit(64.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Gamma function, evaluated in double precision.
pub(crate) fn gamma<T: Real>(x: T) -> T {
    T::lit(statrs::function::gamma::gamma(x.as_f64()))
}

/// Surface measure of the unit sphere in dimension `n` (n = 1: two points).
pub(crate) fn sphere_area<T: Real>(dim: usize) -> T {
    match dim {
        1 => T::lit(2.0),
        2 => T::lit(2.0) * T::PI(),
        3 => T::lit(4.0) * T::PI(),
        _ => {
            let half = T::lit(dim as f64 / 2.0);
            T::lit(2.0) * T::PI().powf(half) / gamma(half)
        }
    }
}
