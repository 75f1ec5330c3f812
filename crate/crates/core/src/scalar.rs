//! Scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Floating point scalar the grid fields are stored in: `f32` or `f64`.
///
/// Problem parameters and reported scalars stay in `f64`; field data and
/// every transform run in `Self`.
pub trait Real:
    Float + FloatConst + FftNum + Sum + Default + Display + LowerExp + Debug + Send + Sync + 'static
{
    /// Lossy conversion from a parameter value.
    fn of(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn of(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}
