//! Scalar abstraction for the reliability math.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating point scalar: f32 or f64.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
