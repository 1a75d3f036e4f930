//! The scalar abstraction shared by the generic algebra (polynomials,
//! q-Pochhammer products, moment/cumulant recursions, tensor grids).
//!
//! Implemented for `f32`, `f64`, exact [`BigRational`] and certified
//! [`Ball`] values.

use std::fmt::Debug;
use std::ops::{Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::ball::{Ball, DEFAULT_PRECISION};

pub trait Scalar: Clone + Debug + Zero + One + Sub<Output = Self> + Neg<Output = Self> {
    fn from_i64(v: i64) -> Self;

    /// Nearest representable value (or enclosing ball) of `r`.
    fn from_rational(r: &BigRational) -> Self;

    /// Multiplicative inverse; `None` when `self` is (or may be) zero.
    fn try_recip(&self) -> Option<Self>;

    fn pow_u32(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn try_recip(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
}

impl Scalar for f32 {
    fn from_i64(v: i64) -> Self {
        v as f32
    }

    fn from_rational(r: &BigRational) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }

    fn try_recip(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn try_recip(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.recip())
    }
}

impl Scalar for Ball {
    fn from_i64(v: i64) -> Self {
        Ball::from_i64(v)
    }

    /// Rounds at [`DEFAULT_PRECISION`]; use [`Ball::from_rational`] to pick
    /// another working precision.
    fn from_rational(r: &BigRational) -> Self {
        Ball::from_rational(r, DEFAULT_PRECISION)
    }

    fn try_recip(&self) -> Option<Self> {
        self.recip()
    }

    fn pow_u32(&self, e: u32) -> Self {
        self.pow(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube<T: Scalar>(x: T) -> T {
        x.pow_u32(3)
    }

    #[test]
    fn generic_power_agrees_across_scalars() {
        let r = BigRational::new(BigInt::from(2), BigInt::from(3));
        assert_eq!(cube(r.clone()), BigRational::new(BigInt::from(8), BigInt::from(27)));
        assert!((cube(2.0f64 / 3.0) - 8.0 / 27.0).abs() < 1e-15);
        assert!((cube(2.0f32 / 3.0) - 8.0 / 27.0).abs() < 1e-6);
        let b = cube(<Ball as Scalar>::from_rational(&r));
        assert!(b.contains_rational(&BigRational::new(BigInt::from(8), BigInt::from(27))));
    }

    #[test]
    fn recip_of_zero_is_none() {
        assert!(0.0f64.try_recip().is_none());
        assert!(BigRational::zero().try_recip().is_none());
        assert!(Ball::zero().try_recip().is_none());
    }
}
