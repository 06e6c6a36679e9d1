//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real field element the solver is generic over.
///
/// Implemented for `f32` and `f64`. All reported quantities (diagnostics,
/// tables) are converted to `f64` at the boundary of the library.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("scalar type must represent f64 literals")
    }

    /// Converts an index or count.
    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("scalar type must represent grid counts")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn pi() -> Self {
        Self::lit(std::f64::consts::PI)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Pairwise (cascade) summation.
///
/// The reduction order depends only on the length of the input, so results
/// are reproducible bit-for-bit.
pub fn pairwise_sum<T: Scalar>(values: &[T]) -> T {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        let mut acc = T::zero();
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
    }

    #[test]
    fn pairwise_is_more_accurate_than_naive() {
        let v = vec![0.1f32; 100_000];
        let naive: f32 = v.iter().copied().sum();
        let pw = pairwise_sum(&v);
        let exact = 10_000.0f64;
        assert!((pw as f64 - exact).abs() <= (naive as f64 - exact).abs());
    }
}
