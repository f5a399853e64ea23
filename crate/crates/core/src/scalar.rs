//! Floating-point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type the toolkit is generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + FromStr
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Tolerance for "sums to one" checks on probability vectors.
    ///
    /// `1e-9` for `f64`; widened to a few ulps of one for narrower types.
    #[inline]
    fn prob_tolerance() -> Self {
        Self::lit(1e-9).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean; zero for an empty slice.
pub fn mean<F: Scalar>(values: &[F]) -> F {
    if values.is_empty() {
        return F::zero();
    }
    values.iter().copied().sum::<F>() / F::from_usize(values.len()).unwrap()
}

/// Sample standard deviation (divides by `n - 1`); zero when fewer than two values.
pub fn sample_sd<F: Scalar>(values: &[F]) -> F {
    if values.len() < 2 {
        return F::zero();
    }
    let m = mean(values);
    let ss: F = values.iter().map(|&v| (v - m) * (v - m)).sum();
    (ss / F::from_usize(values.len() - 1).unwrap()).sqrt()
}

/// Population standard deviation (divides by `n`).
pub fn population_sd<F: Scalar>(values: &[F]) -> F {
    if values.is_empty() {
        return F::zero();
    }
    let m = mean(values);
    let ss: F = values.iter().map(|&v| (v - m) * (v - m)).sum();
    (ss / F::from_usize(values.len()).unwrap()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        let v = [1.0_f64, 2.0, 3.0, 4.0];
        assert_eq!(mean(&v), 2.5);
        assert!((sample_sd(&v) - (5.0_f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((population_sd(&v) - 1.25_f64.sqrt()).abs() < 1e-15);
        assert_eq!(sample_sd(&[3.0_f64]), 0.0);
        assert_eq!(mean::<f32>(&[]), 0.0);
    }

    #[test]
    fn tolerance_widens_for_f32() {
        assert_eq!(f64::prob_tolerance(), 1e-9);
        assert!(f32::prob_tolerance() > 1e-7);
    }
}
