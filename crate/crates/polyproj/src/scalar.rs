//! Scalar abstraction for the whole crate.
//!
//! Everything downstream (geometry, solvers, meta-algorithms) is generic over
//! a floating-point scalar. `f64` is the intended production type; `f32`
//! works but the default tolerances are tuned for double precision and
//! should be loosened when instantiating single-precision solvers.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar usable by all geometry and solver code.
///
/// Blanket-implemented for any type with the listed `num-traits` bounds,
/// in particular `f32` and `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssignOps + Sum + Debug + Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssignOps
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant into the working scalar type.
///
/// Panics if the value is not representable, which cannot happen for the
/// crate's own constants on `f32`/`f64`.
#[inline]
pub fn cast<T: Scalar>(value: f64) -> T {
    T::from_f64(value).expect("constant not representable in scalar type")
}
