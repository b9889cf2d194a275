//! Floating-point abstraction for the frequency-domain core.
//!
//! The steady-state solvers, phase unwrapping, and delay extraction are
//! generic over [`Scalar`] so the same formulas can be instantiated at `f32`
//! or `f64`. Everything downstream of the core (optimization, time-domain
//! simulation, file I/O) is pinned to `f64`, which is re-exported as the
//! default type parameter of every core type.

use std::fmt;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};

/// Real scalar usable by the frequency-domain core.
///
/// A thin bundle of the `num-traits` capabilities the solvers need:
/// IEEE float behavior, math constants, conversions from literals, and
/// compound assignment.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssignOps + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into the active scalar type.
///
/// Panics if the value is not representable, which cannot happen for the
/// compile-time constants this crate feeds it.
#[inline]
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal must be representable in the scalar type")
}
