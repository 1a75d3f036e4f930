//! q-Pochhammer symbols and the truncated q-exponential family
//! `F_{q,<=n}(x) = sum_{k<=n} x^k / (q;q)_k`.
//!
//! Exact work happens over [`BigRational`]; [`series`] holds the
//! ball-valued infinite products and tails.

pub mod series;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::Ball;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use series::{f_q_product, g_inf, q_pochhammer_inf, tail_series};

/// A rational base `q > 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QBase(BigRational);

impl QBase {
    pub fn new(q: BigRational) -> Result<QBase> {
        if q <= BigRational::one() {
            return Err(Error::Domain(format!("q must exceed 1, got {q}")));
        }
        Ok(QBase(q))
    }

    pub fn from_integer(q: i64) -> Result<QBase> {
        QBase::new(BigRational::from_integer(BigInt::from(q)))
    }

    /// `q = p^2`.
    pub fn square_of(p: u32) -> Result<QBase> {
        let p = BigInt::from(p);
        QBase::new(BigRational::from_integer(&p * &p))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    /// `q^k` for any integer `k`.
    pub fn pow(&self, k: i64) -> BigRational {
        num_traits::pow::Pow::pow(&self.0, k as i32)
    }

    /// `p` with `p^2 = q`, when `q` is the square of an integer.
    pub fn integer_sqrt(&self) -> Option<u32> {
        if !self.0.is_integer() {
            return None;
        }
        let q = self.0.numer();
        let p = num_integer::Roots::sqrt(q);
        if &(&p * &p) == q {
            u32::try_from(p).ok()
        } else {
            None
        }
    }
}

impl fmt::Debug for QBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={}", self.0)
    }
}

impl fmt::Display for QBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `(a;q)_k`: `prod_{j<k}(1 - a q^j)` for `k > 0`, `1` for `k = 0`, and
/// `prod_{j=1}^{-k} (1 - a q^{-j})^{-1}` for `k < 0`.
pub fn q_pochhammer<T: Scalar>(a: &T, q: &T, k: i64) -> Result<T> {
    let one = T::one();
    if k >= 0 {
        let mut acc = T::one();
        let mut aqj = a.clone();
        for _ in 0..k {
            acc = acc * (one.clone() - aqj.clone());
            aqj = aqj * q.clone();
        }
        return Ok(acc);
    }
    let qinv = q
        .try_recip()
        .ok_or_else(|| Error::Domain("q must be non-zero for negative index".into()))?;
    let mut acc = T::one();
    let mut aqj = a.clone();
    for j in 1..=(-k) {
        aqj = aqj * qinv.clone();
        let factor = one.clone() - aqj.clone();
        let inv = factor.try_recip().ok_or(Error::Pole(j))?;
        acc = acc * inv;
    }
    Ok(acc)
}

/// Exact rational `(a;q)_k`.
pub fn q_pochhammer_exact(a: &BigRational, q: &BigRational, k: i64) -> Result<BigRational> {
    q_pochhammer(a, q, k)
}

/// A truncated q-exponential polynomial with coefficients in `T`.
///
/// `coeffs[k] = 1/(q;q)_k` for the polynomials built here; `coeffs[0] == 1`
/// and the coefficient signs alternate.
#[derive(Clone, PartialEq)]
pub struct QPolynomial<T = BigRational> {
    q: QBase,
    coeffs: Vec<T>,
}

impl<T> QPolynomial<T> {
    pub fn q(&self) -> &QBase {
        &self.q
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> QPolynomial<U> {
        QPolynomial {
            q: self.q.clone(),
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

impl<T: Scalar> QPolynomial<T> {
    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }
}

impl QPolynomial<BigRational> {
    pub fn from_coeffs(q: QBase, coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty(), "polynomial needs a constant term");
        QPolynomial { q, coeffs }
    }

    /// Converts the exact coefficients into another scalar type.
    pub fn to_scalar<U: Scalar>(&self) -> QPolynomial<U> {
        self.map(U::from_rational)
    }

    pub fn to_balls(&self, precision: u32) -> QPolynomial<Ball> {
        self.map(|c| Ball::from_rational(c, precision))
    }

    pub fn cleared(&self) -> ClearedPolynomial {
        ClearedPolynomial::new(&self.coeffs)
    }
}

impl<T: fmt::Debug> fmt::Debug for QPolynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QPolynomial")
            .field("q", &self.q)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

/// `F_{q,<=n}`, built through `coeffs[k] = coeffs[k-1] / (1 - q^k)`.
pub fn truncated_q_exponential(q: &QBase, n: usize) -> QPolynomial<BigRational> {
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(BigRational::one());
    let mut qk = BigRational::one();
    for k in 1..=n {
        qk = &qk * q.value();
        let prev: &BigRational = &coeffs[k - 1];
        let next = prev / (BigRational::one() - &qk);
        coeffs.push(next);
    }
    QPolynomial {
        q: q.clone(),
        coeffs,
    }
}

/// Exact Horner evaluation of a rational polynomial.
pub fn eval_exact(poly: &QPolynomial<BigRational>, x: &BigRational) -> BigRational {
    poly.eval(x)
}

/// One step of the shift recurrence:
/// `P_n(x) = (1 - x/q) P_{n-1}(x/q) + x^n / (q^n (q;q)_n)`.
pub fn recurrence_step(prev: &QPolynomial<BigRational>) -> QPolynomial<BigRational> {
    let q = prev.q.value();
    let n = prev.coeffs.len();
    let qinv = q.recip();
    // prev(x/q) coefficients.
    let mut scaled = Vec::with_capacity(n);
    let mut s = BigRational::one();
    for c in &prev.coeffs {
        scaled.push(c * &s);
        s = &s * &qinv;
    }
    let mut next = vec![BigRational::zero(); n + 1];
    for (k, c) in scaled.iter().enumerate() {
        next[k] += c;
        next[k + 1] -= c * &qinv;
    }
    let qq = q_pochhammer_exact(q, q, n as i64).expect("positive index never fails");
    next[n] += (prev.q.pow(n as i64) * qq).recip();
    QPolynomial {
        q: prev.q.clone(),
        coeffs: next,
    }
}

/// `F_{q,<=n}` built only from the shift recurrence starting at `P_0 = 1`.
pub fn poly_via_recurrence(q: &QBase, n: usize) -> QPolynomial<BigRational> {
    let mut p = QPolynomial {
        q: q.clone(),
        coeffs: vec![BigRational::one()],
    };
    for _ in 0..n {
        p = recurrence_step(&p);
    }
    p
}

/// Integer polynomial `D * P(x)` with `D > 0` the least common denominator,
/// for exact sign tests without rational normalisation at every step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClearedPolynomial {
    ints: Vec<BigInt>,
    denom: BigInt,
}

impl ClearedPolynomial {
    pub fn new(coeffs: &[BigRational]) -> Self {
        let denom = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints = coeffs
            .iter()
            .map(|c| c.numer() * (&denom / c.denom()))
            .collect();
        ClearedPolynomial { ints, denom }
    }

    pub fn degree(&self) -> usize {
        self.ints.len() - 1
    }

    pub fn integer_coeffs(&self) -> &[BigInt] {
        &self.ints
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denom
    }

    /// `t^n D P(s/t)` as an integer, for `x = s/t` with `t > 0`.
    fn homogeneous(&self, x: &BigRational) -> BigInt {
        let s = x.numer();
        let t = x.denom();
        let n = self.degree();
        let mut tpow = Vec::with_capacity(n + 1);
        tpow.push(BigInt::one());
        for i in 1..=n {
            let next = &tpow[i - 1] * t;
            tpow.push(next);
        }
        let mut acc = self.ints[n].clone();
        for k in (0..n).rev() {
            acc = acc * s + &self.ints[k] * &tpow[n - k];
        }
        acc
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let n = self.degree() as u32;
        let num = self.homogeneous(x);
        let den = &self.denom * num_traits::pow(x.denom().clone(), n as usize);
        BigRational::new(num, den)
    }

    /// Exact sign (-1, 0, 1) of `P(x)`.
    pub fn sign_at(&self, x: &BigRational) -> i32 {
        let v = self.homogeneous(x);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ri(n: i64) -> BigRational {
        r(n, 1)
    }

    #[test]
    fn pochhammer_tail_denominators() {
        // x^4/722925 and -x^5/739552275 in the tail of F_{4,<=3}.
        assert_eq!(q_pochhammer_exact(&ri(4), &ri(4), 4).unwrap(), ri(722925));
        assert_eq!(q_pochhammer_exact(&ri(4), &ri(4), 5).unwrap(), ri(-739552275));
        // (1;4)_4 has the factor 1 - 1 = 0.
        assert_eq!(q_pochhammer_exact(&ri(1), &ri(4), 4).unwrap(), ri(0));
    }

    #[test]
    fn pochhammer_empty_product() {
        assert_eq!(q_pochhammer_exact(&r(7, 3), &ri(5), 0).unwrap(), ri(1));
        assert_eq!(q_pochhammer(&0.25f64, &3.0, 0).unwrap(), 1.0);
    }

    #[test]
    fn pochhammer_negative_index_and_pole() {
        // (2;4)_{-2} = 1/((1-1/2)(1-1/8)) = 16/7
        assert_eq!(q_pochhammer_exact(&ri(2), &ri(4), -2).unwrap(), r(16, 7));
        assert_eq!(q_pochhammer_exact(&ri(16), &ri(4), -3), Err(Error::Pole(2)));
        assert!(matches!(
            q_pochhammer_exact(&ri(1), &ri(0), -1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn q_base_validation() {
        assert!(QBase::from_integer(1).is_err());
        assert!(QBase::new(r(1, 2)).is_err());
        assert!(QBase::new(r(3, 2)).is_ok());
        assert_eq!(QBase::square_of(3).unwrap().integer_sqrt(), Some(3));
        assert_eq!(QBase::from_integer(8).unwrap().integer_sqrt(), None);
        assert_eq!(QBase::new(r(9, 4)).unwrap().integer_sqrt(), None);
    }

    #[test]
    fn truncated_exponential_sign_table() {
        let p = truncated_q_exponential(&QBase::from_integer(4).unwrap(), 3);
        assert_eq!(p.coeffs(), &[ri(1), r(-1, 3), r(1, 45), r(-1, 2835)]);
    }

    #[test]
    fn truncated_exponential_small_cases() {
        let q9 = QBase::from_integer(9).unwrap();
        assert_eq!(truncated_q_exponential(&q9, 0).coeffs(), &[ri(1)]);
        assert_eq!(
            truncated_q_exponential(&q9, 2).coeffs(),
            &[ri(1), r(-1, 8), r(1, 640)]
        );
    }

    #[test]
    fn exact_evaluations_from_sign_table() {
        let p = truncated_q_exponential(&QBase::from_integer(4).unwrap(), 3);
        assert_eq!(eval_exact(&p, &ri(2)), r(1189, 2835));
        assert_eq!(eval_exact(&p, &ri(8)), r(-1205, 2835));
        assert_eq!(eval_exact(&p, &ri(32)), r(4339, 2835));
        assert_eq!(eval_exact(&p, &ri(128)), r(-1183085, 2835));
        assert_eq!(eval_exact(&p, &ri(0)), ri(1));
    }

    #[test]
    fn cleared_polynomial_agrees_with_horner() {
        let p = truncated_q_exponential(&QBase::new(r(7, 2)).unwrap(), 6);
        let c = p.cleared();
        assert!(c.denominator() > &BigInt::zero());
        for x in [r(1, 3), r(-5, 2), ri(17), r(123, 7)] {
            assert_eq!(c.eval(&x), eval_exact(&p, &x));
            let s = eval_exact(&p, &x);
            let expect = if s.is_zero() { 0 } else if s.is_positive() { 1 } else { -1 };
            assert_eq!(c.sign_at(&x), expect);
        }
    }

    #[test]
    fn recurrence_single_step() {
        let q = QBase::from_integer(5).unwrap();
        let p = poly_via_recurrence(&q, 1);
        assert_eq!(p.coeffs(), &[ri(1), r(1, -4)]);
        let q4 = QBase::from_integer(4).unwrap();
        assert_eq!(
            poly_via_recurrence(&q4, 3).coeffs(),
            &[ri(1), r(-1, 3), r(1, 45), r(-1, 2835)]
        );
    }

    #[test]
    fn recurrence_matches_direct_construction() {
        let q = QBase::from_integer(9).unwrap();
        assert_eq!(poly_via_recurrence(&q, 12), truncated_q_exponential(&q, 12));
    }

    #[test]
    fn generic_evaluation_agrees() {
        let p = truncated_q_exponential(&QBase::from_integer(4).unwrap(), 3);
        let pf = p.to_scalar::<f64>();
        assert!((pf.eval(&2.0) - 1189.0 / 2835.0).abs() < 1e-14);
        let pb = p.to_balls(128);
        assert!(pb.eval(&Ball::from_i64(8)).contains_rational(&r(-1205, 2835)));
    }
}
