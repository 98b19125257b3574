//! Generic floating-point scalar for all numerical kernels.
//!
//! Every state, matrix, and model in this crate is parameterized over a
//! real scalar `T: Float`, with complex arithmetic carried by
//! [`num_complex::Complex<T>`]. The crate root exports `f64` aliases for
//! the common case.

use nalgebra as na;
use num_complex::Complex;
use num_traits as nt;

/// Real scalar usable in state vectors, gates, and Hamiltonians.
///
/// Bundles the arithmetic, constant, and conversion traits the kernels
/// need so signatures stay readable. Implemented for `f32` and `f64`.
pub trait Float: Copy + nt::FloatConst + nt::FromPrimitive + nt::ToPrimitive + na::RealField {
    /// Converts an `f64` literal, panicking only for values outside the
    /// type's range (never the case for the constants used here).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }
}

impl Float for f32 {}
impl Float for f64 {}

/// Complex number over the crate scalar.
pub type C<T> = Complex<T>;

/// Complex zero.
#[inline]
pub fn czero<T: Float>() -> C<T> {
    C::new(T::zero(), T::zero())
}

/// Complex one.
#[inline]
pub fn cone<T: Float>() -> C<T> {
    C::new(T::one(), T::zero())
}

/// Imaginary unit.
#[inline]
pub fn ci<T: Float>() -> C<T> {
    C::new(T::zero(), T::one())
}

/// Complex number from real and imaginary `f64` parts.
#[inline]
pub fn c<T: Float>(re: f64, im: f64) -> C<T> {
    C::new(T::of(re), T::of(im))
}
