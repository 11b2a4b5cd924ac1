//! Floating-point scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Real scalar the solver can run on. Implemented for `f32` and `f64`.
///
/// Tolerances quoted throughout the crate assume `f64`; `f32` runs are
/// useful for smoke tests and for measuring round-off sensitivity.
pub trait Real: Float + FloatConst + FftNum + Default + Debug + Display + Sum + Send + Sync + 'static {
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("literal out of range")
    }

    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
