//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the pipeline is generic over: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Monotone 32-bit key for a non-negative value. Non-decreasing in `self`,
    /// strictly increasing for `f32`.
    fn depth_bits(self) -> u32;
}

impl Real for f32 {
    fn depth_bits(self) -> u32 {
        self.max(0.0).to_bits()
    }
}

impl Real for f64 {
    fn depth_bits(self) -> u32 {
        (self.max(0.0) as f32).to_bits()
    }
}
