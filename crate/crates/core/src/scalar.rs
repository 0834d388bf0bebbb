//! Scalar abstraction for all numerical routines.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type the library is generic over: `f32` or `f64`.
///
/// `RealField` supplies the elementary functions and the dense linear
/// algebra; the num-traits bounds supply conversions to and from literal
/// constants.
pub trait Real: RealField + FromPrimitive + ToPrimitive + Copy {}

impl<T: RealField + FromPrimitive + ToPrimitive + Copy> Real for T {}

/// Converts an `f64` literal to the working scalar type.
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must convert to the scalar type")
}

/// Magnitude of a complex value over a generic scalar.
///
/// `Complex::norm` is gated on `num_traits::Float`, which `RealField`
/// scalars do not implement as a bound here.
pub(crate) fn cnorm<T: Real>(z: num_complex::Complex<T>) -> T {
    z.norm_sqr().sqrt()
}
