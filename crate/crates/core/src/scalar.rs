//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the physics and estimation code is written against.
///
/// Implemented for `f32` and `f64`. Physical constants are stored as `f64`
/// literals and converted with [`Real::lit`].
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }

    /// Lossy conversion to `f64` (exact for both implementors).
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Angular frequency (rad/s) from an ordinary frequency (Hz).
#[inline]
pub fn angular<T: Real>(hz: T) -> T {
    hz * T::two_pi()
}

/// Ordinary frequency (Hz) from an angular frequency (rad/s).
#[inline]
pub fn hertz<T: Real>(rad_per_s: T) -> T {
    rad_per_s / T::two_pi()
}
