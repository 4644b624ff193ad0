//! Floating-point abstraction shared by every numerical module.
//!
//! All physics, signal and circuit code is written against [`Scalar`], so the
//! same formulas run in `f64` (the default everywhere, and the only type the
//! command-line front end uses) or in `f32` for quick low-precision sweeps.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// A real floating-point scalar usable in spectral and root-finding code.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + rustfft::FftNum + Sum + Default + Display + Debug
{
    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("index fits")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_phase<T: Scalar>(phi: T) -> T {
    let tau = T::TAU();
    let mut x = phi % tau;
    if x <= -T::PI() {
        x = x + tau;
    } else if x > T::PI() {
        x = x - tau;
    }
    x
}

/// Normalized `sin(x)/x` with the removable singularity filled in.
pub fn sinc<T: Scalar>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        // Taylor series, accurate to ~1e-17 here.
        let x2 = x * x;
        T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0)
    } else {
        x.sin() / x
    }
}
