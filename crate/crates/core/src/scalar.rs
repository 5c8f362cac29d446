//! Scalar abstraction: all numeric code is generic over `f32`/`f64`.

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar the pipeline computes in.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; exact for `f64`, rounding for `f32`.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 -> scalar conversion")
    }

    /// Widening conversion to `f64`.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar -> f64 conversion")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Euclidean norm of a slice.
pub fn norm<S: Scalar>(v: &[S]) -> S {
    v.iter().map(|&x| x * x).sum::<S>().sqrt()
}

/// Dot product of equal-length slices.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_and_dot_basics() {
        let v = [3.0f64, 4.0];
        assert_eq!(norm(&v), 5.0);
        assert_eq!(dot(&v, &[1.0, 1.0]), 7.0);
        let w = [3.0f32, 4.0];
        assert_eq!(norm(&w), 5.0);
    }

    #[test]
    fn lossy_conversions_round_trip_for_f64() {
        let x = 0.1234567890123_f64;
        assert_eq!(f64::from_f64_lossy(x), x);
        assert_eq!(x.to_f64_lossy(), x);
    }
}
