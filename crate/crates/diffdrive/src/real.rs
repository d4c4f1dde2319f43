//! Scalar abstraction for the toolkit.
//!
//! All math in this crate is generic over [`Real`], so the same code runs
//! on `f32` or `f64`. The crate root exposes `*64` aliases for the common
//! double-precision case.

use core::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};

/// Floating-point scalar used throughout the toolkit.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssignOps + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant into `Self`.
    fn cast(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 constant is representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Sign function with `sign(0) = 0`.
///
/// `Float::signum` maps `0.0` to `1.0`, which is not what the control laws
/// here want: a stopped reference must switch the lateral error term off.
pub fn sign<T: Real>(value: T) -> T {
    if value > T::zero() {
        T::one()
    } else if value < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}
