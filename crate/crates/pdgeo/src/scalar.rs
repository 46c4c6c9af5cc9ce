use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used by every numeric kernel in the crate.
///
/// Implemented for `f32` and `f64`. The tolerances quoted on the public
/// operations assume `f64`; with `f32` everything still runs but the
/// achievable accuracy is bounded by the larger machine epsilon.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Conversion from an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal out of range for scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
