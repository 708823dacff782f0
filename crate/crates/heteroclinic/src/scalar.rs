use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};

/// Scalar type for all numerics in this crate: IEEE float semantics plus
/// conversion from f64 literals. Blanket-implemented, so `f32` and `f64`
/// (and compatible third-party floats) work out of the box.
pub trait Real: Float + FromPrimitive + Debug + 'static {}

impl<T: Float + FromPrimitive + Debug + 'static> Real for T {}

/// Pull an f64 literal into the working scalar type.
#[inline]
pub(crate) fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal not representable in scalar type")
}

/// Widen to f64 for error payloads and reports.
#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
