//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the laboratory computes in.
///
/// Implemented for `f32` and `f64`. Tolerances quoted throughout the crate
/// assume `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, saturating to infinity on overflow.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(|| if x > 0.0 { Self::infinity() } else { Self::neg_infinity() })
    }

    /// Converts a count or index.
    #[inline]
    fn of_usize(k: usize) -> Self {
        Self::of(k as f64)
    }

    /// Lossy view as `f64`, used for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }

    /// Positive part `max(x, 0)`.
    #[inline]
    fn pos(self) -> Self {
        self.max(Self::zero())
    }
}

impl Real for f32 {}
impl Real for f64 {}
