//! Midpoint-radius real arithmetic with outward rounding.
//!
//! A [`Ball`] `m ± r` encloses a real value. Every operation returns a ball
//! that contains all results of applying the exact operation to members of
//! the inputs. Midpoints are truncated toward zero to the working precision
//! (so negation commutes with every operation); radii are kept to 32 bits and
//! always rounded up.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::dyadic::Dyadic;

/// Working precision, in bits, used when nothing else is requested.
pub const DEFAULT_PRECISION: u32 = 192;

const RADIUS_BITS: u32 = 32;

/// A closed ball `[mid - rad, mid + rad]`.
///
/// `precision` is the midpoint bit budget for results derived from this
/// ball. Exact constants carry precision 0 and adopt the precision of
/// whatever they are combined with. Equality is structural: two balls are
/// equal when they have identical midpoint, radius and precision.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ball {
    mid: Dyadic,
    rad: Dyadic,
    prec: u32,
}

fn working(a: u32, b: u32) -> u32 {
    match a.max(b) {
        0 => DEFAULT_PRECISION,
        p => p,
    }
}

impl Ball {
    fn finish(mid: Dyadic, rad: Dyadic, prec: u32) -> Ball {
        let (mid, err) = mid.truncate(prec);
        let rad = match err {
            Some(e) => rad + e,
            None => rad,
        };
        Ball {
            mid,
            rad: rad.round_up_magnitude(RADIUS_BITS),
            prec,
        }
    }

    /// An exact ball (zero radius) with no precision of its own.
    pub fn exact(value: Dyadic) -> Ball {
        Ball {
            mid: value,
            rad: Dyadic::zero(),
            prec: 0,
        }
    }

    pub fn from_i64(v: i64) -> Ball {
        Ball::exact(Dyadic::from_i64(v))
    }

    pub fn from_bigint(v: BigInt) -> Ball {
        Ball::exact(Dyadic::from_bigint(v))
    }

    /// Ball of the given midpoint and radius; the midpoint is rounded to
    /// `precision` bits and the rounding error absorbed into the radius.
    pub fn new(mid: Dyadic, rad: Dyadic, precision: u32) -> Ball {
        assert!(!rad.is_negative(), "ball radius must be non-negative");
        Ball::finish(mid, rad, precision.max(1))
    }

    /// `0 ± rad`.
    pub fn error(rad: Dyadic) -> Ball {
        assert!(!rad.is_negative(), "ball radius must be non-negative");
        Ball {
            mid: Dyadic::zero(),
            rad: rad.round_up_magnitude(RADIUS_BITS),
            prec: 0,
        }
    }

    /// Smallest-radius ball (up to rounding) with a midpoint of `precision`
    /// bits that contains `r`. Dyadic rationals that fit are represented
    /// exactly.
    pub fn from_rational(r: &BigRational, precision: u32) -> Ball {
        let precision = precision.max(1);
        let mid = Dyadic::floor_rational(r, precision);
        let err = r - mid.to_rational();
        let rad = if err.is_zero() {
            Dyadic::zero()
        } else {
            Dyadic::ceil_rational(&err, RADIUS_BITS)
        };
        Ball::finish(mid, rad, precision)
    }

    /// Ball covering the closed interval `[lo, hi]`.
    pub fn from_endpoints(lo: &Dyadic, hi: &Dyadic, precision: u32) -> Ball {
        assert!(lo <= hi, "interval endpoints out of order");
        let mid = (lo + hi).half();
        let rad = (hi - lo).half();
        Ball::finish(mid, rad, precision.max(1))
    }

    pub fn zero() -> Ball {
        Ball::exact(Dyadic::zero())
    }

    pub fn one() -> Ball {
        Ball::exact(Dyadic::one())
    }

    pub fn midpoint(&self) -> &Dyadic {
        &self.mid
    }

    pub fn radius(&self) -> &Dyadic {
        &self.rad
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Same value with a different precision tag; rounds the midpoint if the
    /// new budget is smaller.
    pub fn with_precision(&self, precision: u32) -> Ball {
        Ball::finish(self.mid.clone(), self.rad.clone(), precision.max(1))
    }

    pub fn lower(&self) -> Dyadic {
        &self.mid - &self.rad
    }

    pub fn upper(&self) -> Dyadic {
        &self.mid + &self.rad
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    /// Upper bound on `|x|` over the ball.
    pub fn mag_upper(&self) -> Dyadic {
        &self.mid.abs() + &self.rad
    }

    /// Lower bound on `|x|` over the ball (zero if the ball contains zero).
    pub fn mag_lower(&self) -> Dyadic {
        let d = &self.mid.abs() - &self.rad;
        if d.is_negative() {
            Dyadic::zero()
        } else {
            d
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.abs() <= self.rad
    }

    /// Every member is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.lower().is_positive()
    }

    /// Every member is strictly negative.
    pub fn is_negative(&self) -> bool {
        self.upper().is_negative()
    }

    pub fn contains_dyadic(&self, x: &Dyadic) -> bool {
        &self.lower() <= x && x <= &self.upper()
    }

    pub fn contains_rational(&self, x: &BigRational) -> bool {
        &self.lower().to_rational() <= x && x <= &self.upper().to_rational()
    }

    /// `other` is a subset of `self`.
    pub fn contains(&self, other: &Ball) -> bool {
        self.lower() <= other.lower() && other.upper() <= self.upper()
    }

    pub fn overlaps(&self, other: &Ball) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    /// Every member of `self` is below every member of `other`.
    pub fn certainly_lt(&self, other: &Ball) -> bool {
        self.upper() < other.lower()
    }

    /// Every member lies strictly inside the open interval `(lo, hi)`.
    pub fn strictly_inside(&self, lo: &BigRational, hi: &BigRational) -> bool {
        &self.lower().to_rational() > lo && &self.upper().to_rational() < hi
    }

    /// Adds `± e` to the ball.
    pub fn widen(&self, e: &Dyadic) -> Ball {
        Ball {
            mid: self.mid.clone(),
            rad: (&self.rad + &e.abs()).round_up_magnitude(RADIUS_BITS),
            prec: self.prec,
        }
    }

    pub fn add_ball(&self, other: &Ball) -> Ball {
        let prec = working(self.prec, other.prec);
        Ball::finish(&self.mid + &other.mid, &self.rad + &other.rad, prec)
    }

    pub fn sub_ball(&self, other: &Ball) -> Ball {
        let prec = working(self.prec, other.prec);
        Ball::finish(&self.mid - &other.mid, &self.rad + &other.rad, prec)
    }

    pub fn mul_ball(&self, other: &Ball) -> Ball {
        let prec = working(self.prec, other.prec);
        let mid = &self.mid * &other.mid;
        if self.rad.is_zero() && other.rad.is_zero() {
            return Ball::finish(mid, Dyadic::zero(), prec);
        }
        let am = self.mid.abs().round_up_magnitude(RADIUS_BITS);
        let bm = other.mid.abs().round_up_magnitude(RADIUS_BITS);
        let rad = &(&am * &other.rad) + &(&bm * &self.rad);
        let rad = &rad + &(&self.rad * &other.rad);
        Ball::finish(mid, rad, prec)
    }

    pub fn mul_i64(&self, k: i64) -> Ball {
        self.mul_ball(&Ball::from_i64(k))
    }

    /// Multiplies by a rational constant, rounding the constant at the
    /// working precision.
    pub fn mul_rational(&self, r: &BigRational) -> Ball {
        let prec = working(self.prec, 0);
        self.mul_ball(&Ball::from_rational(r, prec + 8))
            .with_precision(prec)
    }

    /// Reciprocal; `None` when the ball contains zero.
    pub fn recip(&self) -> Option<Ball> {
        if self.contains_zero() {
            return None;
        }
        if self.mid.is_negative() {
            return self.neg_ball().recip().map(|b| b.neg_ball());
        }
        let prec = working(self.prec, 0);
        if self.rad.is_zero() {
            if let Some(exact) = power_of_two_recip(&self.mid) {
                return Some(Ball {
                    mid: exact,
                    rad: Dyadic::zero(),
                    prec: self.prec,
                });
            }
        }
        let lo = self.lower().to_rational();
        let hi = self.upper().to_rational();
        let one = BigRational::one();
        let new_lo = Dyadic::floor_rational(&(&one / hi), prec + 2);
        let new_hi = Dyadic::ceil_rational(&(&one / lo), prec + 2);
        Some(Ball::from_endpoints(&new_lo, &new_hi, prec))
    }

    /// `self / other`; `None` when `other` contains zero.
    pub fn checked_div(&self, other: &Ball) -> Option<Ball> {
        other.recip().map(|r| self.mul_ball(&r))
    }

    /// Square root; `None` when the ball contains negative numbers.
    pub fn sqrt(&self) -> Option<Ball> {
        let lo = self.lower();
        if lo.is_negative() {
            return None;
        }
        let prec = working(self.prec, 0);
        let (lo_floor, _) = lo.sqrt_bounds(prec + 2);
        let (_, hi_ceil) = self.upper().sqrt_bounds(prec + 2);
        Some(Ball::from_endpoints(&lo_floor, &hi_ceil, prec))
    }

    pub fn neg_ball(&self) -> Ball {
        Ball {
            mid: -&self.mid,
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Ball {
        if !self.mid.is_negative() && !self.contains_zero() {
            self.clone()
        } else if self.is_negative() {
            self.neg_ball()
        } else {
            Ball::from_endpoints(&Dyadic::zero(), &self.mag_upper(), working(self.prec, 0))
        }
    }

    pub fn pow(&self, mut e: u32) -> Ball {
        let mut base = self.clone();
        let mut acc = Ball::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ball(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ball(&base);
            }
        }
        acc
    }

    /// Smallest ball containing both inputs.
    pub fn hull(&self, other: &Ball) -> Ball {
        let lo = Dyadic::min(&self.lower(), &other.lower());
        let hi = Dyadic::max(&self.upper(), &other.upper());
        Ball::from_endpoints(&lo, &hi, working(self.prec, other.prec))
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }
}

fn power_of_two_recip(d: &Dyadic) -> Option<Dyadic> {
    if d.mantissa() == &BigInt::one() {
        Some(Dyadic::pow2(-d.exponent()))
    } else {
        None
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $imp:ident) => {
        impl $tr<&Ball> for &Ball {
            type Output = Ball;
            fn $method(self, rhs: &Ball) -> Ball {
                self.$imp(rhs)
            }
        }
        impl $tr<Ball> for Ball {
            type Output = Ball;
            fn $method(self, rhs: Ball) -> Ball {
                (&self).$imp(&rhs)
            }
        }
        impl $tr<&Ball> for Ball {
            type Output = Ball;
            fn $method(self, rhs: &Ball) -> Ball {
                (&self).$imp(rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ball);
forward_binop!(Sub, sub, sub_ball);
forward_binop!(Mul, mul, mul_ball);

impl Neg for Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        self.neg_ball()
    }
}

impl Neg for &Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        self.neg_ball()
    }
}

impl Zero for Ball {
    fn zero() -> Ball {
        Ball::zero()
    }
    fn is_zero(&self) -> bool {
        self.mid.is_zero() && self.rad.is_zero()
    }
}

impl One for Ball {
    fn one() -> Ball {
        Ball::one()
    }
}

impl fmt::Debug for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Ball({:e} ± {:e}, {} bits)",
            self.mid.to_f64(),
            self.rad.to_f64(),
            self.prec
        )
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} ± {:e}", self.mid.to_f64(), self.rad.to_f64())
    }
}
