//! Exact binary floating-point values `mantissa * 2^exponent`.
//!
//! Dyadics are the storage format for ball midpoints and radii. Addition,
//! subtraction and multiplication are exact; everything that can lose
//! information (truncation, division, square roots) takes an explicit bit
//! budget and a rounding direction.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `mant * 2^exp`, normalised so that `mant` is odd (or the value is zero
/// with `exp == 0`). Normalisation makes structural equality value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        if mant.is_zero() {
            return Self::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        if tz == 0 {
            Dyadic { mant, exp }
        } else {
            Dyadic {
                mant: mant >> tz,
                exp: exp + tz as i64,
            }
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mant: BigInt::one(),
            exp: 0,
        }
    }

    pub fn from_i64(v: i64) -> Self {
        Self::new(BigInt::from(v), 0)
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Self::new(v, 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic {
            mant: BigInt::one(),
            exp: e,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    /// Number of significant bits in the mantissa.
    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    /// Smallest `t` with `|self| < 2^t`; `None` for zero.
    pub fn magnitude_exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp + self.bits() as i64)
        }
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    pub fn half(&self) -> Self {
        self.mul_pow2(-1)
    }

    /// Truncates toward zero to at most `bits` significant bits. Returns the
    /// truncated value and, if anything was discarded, an upper bound on the
    /// discarded magnitude. Truncation commutes with negation.
    pub fn truncate(&self, bits: u32) -> (Dyadic, Option<Dyadic>) {
        let have = self.bits();
        let bits = bits.max(1) as u64;
        if have <= bits {
            return (self.clone(), None);
        }
        let shift = have - bits;
        let (sign, mag) = self.mant.clone().into_parts();
        let kept = BigInt::from_biguint(sign, mag >> shift);
        let exp = self.exp + shift as i64;
        // The mantissa is odd, so at least one discarded bit is set.
        (Dyadic::new(kept, exp), Some(Dyadic::pow2(exp)))
    }

    /// Rounds a non-negative value up to at most `bits` significant bits.
    pub fn round_up_magnitude(&self, bits: u32) -> Dyadic {
        debug_assert!(!self.is_negative());
        let have = self.bits();
        let bits = bits.max(1) as u64;
        if have <= bits {
            return self.clone();
        }
        let shift = have - bits;
        let mag = self.mant.magnitude() >> shift;
        Dyadic::new(BigInt::from_biguint(Sign::Plus, mag + 1u32), self.exp + shift as i64)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as usize)
        } else {
            BigRational::new(
                self.mant.clone(),
                BigInt::one() << (-self.exp) as usize,
            )
        }
    }

    /// Largest dyadic with about `bits` significant bits that is `<= r`.
    pub fn floor_rational(r: &BigRational, bits: u32) -> Dyadic {
        Self::round_rational(r, bits, false)
    }

    /// Smallest dyadic with about `bits` significant bits that is `>= r`.
    pub fn ceil_rational(r: &BigRational, bits: u32) -> Dyadic {
        Self::round_rational(r, bits, true)
    }

    fn round_rational(r: &BigRational, bits: u32, up: bool) -> Dyadic {
        let num = r.numer();
        let den = r.denom();
        if num.is_zero() {
            return Dyadic::zero();
        }
        // Choose the scale so the quotient carries `bits + 1` bits.
        let s = bits as i64 + 1 - (num.bits() as i64 - den.bits() as i64);
        let (n, d) = if s >= 0 {
            (num << s as usize, den.clone())
        } else {
            (num.clone(), den << (-s) as usize)
        };
        let (q, rem) = n.div_mod_floor(&d);
        let q = if up && !rem.is_zero() { q + 1 } else { q };
        Dyadic::new(q, -s)
    }

    /// Floor and ceiling of `sqrt(self)` with about `bits` significant bits.
    /// `self` must be non-negative.
    pub fn sqrt_bounds(&self, bits: u32) -> (Dyadic, Dyadic) {
        debug_assert!(!self.is_negative());
        if self.is_zero() {
            return (Dyadic::zero(), Dyadic::zero());
        }
        let mut t = (2 * bits as i64 + 2 - self.bits() as i64).max(0);
        if (self.exp - t).rem_euclid(2) != 0 {
            t += 1;
        }
        let m = &self.mant << t as usize;
        let f = (self.exp - t) / 2;
        let s = m.sqrt();
        let exact = &s * &s == m;
        let lo = Dyadic::new(s.clone(), f);
        let hi = if exact { lo.clone() } else { Dyadic::new(s + 1, f) };
        (lo, hi)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.bits();
        let (m, e) = if bits > 64 {
            let shift = bits - 64;
            let (sign, mag) = self.mant.clone().into_parts();
            (BigInt::from_biguint(sign, mag >> shift), self.exp + shift as i64)
        } else {
            (self.mant.clone(), self.exp)
        };
        let m = m.to_f64().unwrap_or(f64::NAN);
        scale_pow2(m, e)
    }

    pub fn max(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn min(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }
}

fn scale_pow2(mut m: f64, mut e: i64) -> f64 {
    while e > 1000 {
        m *= 2f64.powi(1000);
        e -= 1000;
        if m.is_infinite() {
            return m;
        }
    }
    while e < -1000 {
        m *= 2f64.powi(-1000);
        e += 1000;
        if m == 0.0 {
            return m;
        }
    }
    m * 2f64.powi(e as i32)
}

fn add_aligned(a: &Dyadic, b: &Dyadic, negate_b: bool) -> Dyadic {
    if b.is_zero() {
        return a.clone();
    }
    if a.is_zero() {
        return if negate_b { -b } else { b.clone() };
    }
    let exp = a.exp.min(b.exp);
    let am = &a.mant << (a.exp - exp) as usize;
    let bm = &b.mant << (b.exp - exp) as usize;
    let m = if negate_b { am - bm } else { am + bm };
    Dyadic::new(m, exp)
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        add_aligned(self, rhs, false)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        add_aligned(&self, &rhs, false)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        add_aligned(self, rhs, true)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        add_aligned(&self, &rhs, true)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // Product of odd mantissas is odd: already normalised.
        Dyadic {
            mant: &self.mant * &rhs.mant,
            exp: self.exp + rhs.exp,
        }
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mant: -self.mant,
            exp: self.exp,
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // Same sign: compare magnitudes by exponent before subtracting.
        let (ta, tb) = (
            self.magnitude_exponent().unwrap(),
            other.magnitude_exponent().unwrap(),
        );
        if ta != tb {
            let mag = ta.cmp(&tb);
            return if sa > 0 { mag } else { mag.reverse() };
        }
        (self - other).signum().cmp(&0)
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_i64(v)
    }
}

impl From<BigInt> for Dyadic {
    fn from(v: BigInt) -> Self {
        Dyadic::from_bigint(v)
    }
}

/// Returns the exact dyadic value of `r`, or `None` when its denominator is
/// not a power of two.
pub fn exact_dyadic(r: &BigRational) -> Option<Dyadic> {
    let den = r.denom();
    let tz = den.trailing_zeros().unwrap_or(0);
    if den.magnitude() != &(BigUint::one() << tz) {
        return None;
    }
    Some(Dyadic::new(r.numer().clone(), -(tz as i64)))
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mant, self.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn normalises_trailing_zeros() {
        let d = Dyadic::new(BigInt::from(12), 0);
        assert_eq!(d.mantissa(), &BigInt::from(3));
        assert_eq!(d.exponent(), 2);
        assert_eq!(d, Dyadic::from_i64(12));
    }

    #[test]
    fn exact_ring_operations() {
        let a = Dyadic::new(BigInt::from(3), -2); // 0.75
        let b = Dyadic::from_i64(5);
        assert_eq!((&a + &b).to_rational(), rat(23, 4));
        assert_eq!((&a - &b).to_rational(), rat(-17, 4));
        assert_eq!((&a * &b).to_rational(), rat(15, 4));
        assert!(a < b);
        assert!(-&b < a);
    }

    #[test]
    fn truncation_is_sign_symmetric() {
        let x = Dyadic::new(BigInt::from(0b1011_0111), -3);
        let (t, err) = x.truncate(4);
        let (tn, errn) = (-&x).truncate(4);
        assert_eq!(tn, -&t);
        assert_eq!(err, errn);
        let e = err.unwrap();
        assert!((&x - &t).abs() < e);
    }

    #[test]
    fn rational_rounding_brackets_value() {
        let third = rat(1, 3);
        let lo = Dyadic::floor_rational(&third, 40);
        let hi = Dyadic::ceil_rational(&third, 40);
        assert!(lo.to_rational() < third && third < hi.to_rational());
        assert!((&hi - &lo) <= Dyadic::pow2(-40));
        let neg = rat(-7, 5);
        assert!(Dyadic::floor_rational(&neg, 30).to_rational() <= neg);
        assert!(Dyadic::ceil_rational(&neg, 30).to_rational() >= neg);
    }

    #[test]
    fn sqrt_bounds_bracket() {
        let two = Dyadic::from_i64(2);
        let (lo, hi) = two.sqrt_bounds(64);
        assert!(&lo * &lo < two && two < &hi * &hi);
        let four = Dyadic::from_i64(4);
        assert_eq!(four.sqrt_bounds(10), (Dyadic::from_i64(2), Dyadic::from_i64(2)));
    }

    #[test]
    fn exact_dyadic_detection() {
        assert_eq!(exact_dyadic(&rat(3, 8)), Some(Dyadic::new(BigInt::from(3), -3)));
        assert_eq!(exact_dyadic(&rat(1, 3)), None);
    }

    #[test]
    fn to_f64_large_and_small() {
        let big = Dyadic::pow2(2000);
        assert!(big.to_f64().is_infinite());
        let x = Dyadic::new(BigInt::from(5), -1);
        assert_eq!(x.to_f64(), 2.5);
        let tiny = Dyadic::new(BigInt::from(3), -1030);
        assert!(tiny.to_f64() > 0.0);
    }
}
