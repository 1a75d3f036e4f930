//! Ball-valued infinite q-products and q-series with certified truncation.
//!
//! Every truncation adds an explicit remainder bound to the result radius:
//! products use `|log prod_{j>J}(1 - y_j)| <= 2 sum |y_j|` for `|y_j| <= 1/2`,
//! series use geometric or alternating-series remainders.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::ball::Ball;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

use super::{q_pochhammer_exact, QBase};

const GUARD_BITS: u32 = 32;
const MAX_TERMS: usize = 1 << 20;

/// Smallest `J` with `|a| q^{-J} / (q - 1) <= 2^{-(precision + 3)}`, and that
/// bound `s` rounded up. `|a|` is given as an upper bound.
fn product_cutoff(a_mag: &BigRational, q: &QBase, precision: u32) -> (usize, Dyadic) {
    let eps = Dyadic::pow2(-(precision as i64) - 3).to_rational();
    let q_minus_one = q.value() - BigRational::one();
    let mut scaled = a_mag / &q_minus_one;
    let qinv = q.value().recip();
    let mut j = 0usize;
    loop {
        j += 1;
        scaled = &scaled * &qinv;
        if scaled <= eps {
            return (j, Dyadic::ceil_rational(&scaled, 32));
        }
    }
}

/// Multiplier `1 ± 4s` enclosing a product tail `prod (1 - y_j)^{±1}` with
/// `sum |y_j| <= s <= 1/8`.
fn tail_factor(s: &Dyadic) -> Ball {
    Ball::one().widen(&s.mul_pow2(2))
}

/// `prod_{j=1}^{J} (1 - x q^{-j})` together with the index of the first
/// factor that may vanish.
fn head_product(x: &Ball, q: &QBase, terms: usize, wp: u32) -> (Ball, Option<i64>) {
    let qinv = q.value().recip();
    let mut qpow = BigRational::one();
    let mut acc = Ball::one().with_precision(wp);
    let mut first_zero = None;
    for j in 1..=terms {
        qpow = &qpow * &qinv;
        let factor = Ball::one() - x.mul_ball(&Ball::from_rational(&qpow, wp));
        if first_zero.is_none() && factor.contains_zero() {
            first_zero = Some(j as i64);
        }
        acc = acc * factor;
    }
    (acc, first_zero)
}

/// `(a;q)_{-inf} = prod_{j>=1} (1 - a q^{-j})^{-1}` for `q > 1`.
///
/// Fails with [`Error::Pole`] when some factor `1 - a q^{-j}` vanishes or
/// cannot be certified non-zero at the working precision.
pub fn q_pochhammer_inf(a: &Ball, q: &QBase, precision: u32) -> Result<Ball> {
    if a.is_exact() && a.midpoint().is_zero() {
        return Ok(Ball::one());
    }
    let wp = precision + GUARD_BITS;
    let a = a.with_precision(wp.max(a.precision()));
    let (terms, s) = product_cutoff(&a.mag_upper().to_rational(), q, precision);
    let (head, zero_at) = head_product(&a, q, terms, wp);
    if let Some(j) = zero_at {
        return Err(Error::Pole(j));
    }
    let inv = head.recip().ok_or(Error::Pole(0))?;
    Ok((inv * tail_factor(&s)).with_precision(precision))
}

/// `F_q(x) = prod_{j>=1} (1 - q^{-j} x)`, the entire function whose zeros
/// are exactly `q^j`, `j >= 1`.
pub fn f_q_product(q: &QBase, x: &Ball, precision: u32) -> Ball {
    if x.is_exact() && x.midpoint().is_zero() {
        return Ball::one();
    }
    let wp = precision + GUARD_BITS;
    let x = x.with_precision(wp.max(x.precision()));
    let (terms, s) = product_cutoff(&x.mag_upper().to_rational(), q, precision);
    let (head, _) = head_product(&x, q, terms, wp);
    (head * tail_factor(&s)).with_precision(precision)
}

/// `F_{q,>n}(x) = sum_{k>n} x^k / (q;q)_k`.
///
/// Terms satisfy `t_k / t_{k-1} = x / (1 - q^k)`, so once
/// `rho = |x| / (q^{k+1} - 1) < 1/2` the remainder after `t_k` is at most
/// `|t_k| rho / (1 - rho)`.
pub fn tail_series(q: &QBase, n: usize, x: &Ball, precision: u32) -> Ball {
    if x.is_exact() && x.midpoint().is_zero() {
        return Ball::zero();
    }
    let wp = precision + GUARD_BITS;
    let x = x.with_precision(wp.max(x.precision()));
    let x_mag = x.mag_upper().to_rational();
    let qv = q.value();
    let one = BigRational::one();

    let mut k = n + 1;
    let coeff = q_pochhammer_exact(qv, qv, k as i64)
        .expect("positive index")
        .recip();
    let mut term = x.pow(k as u32).mul_ball(&Ball::from_rational(&coeff, wp));
    let first_mag = term.mag_upper().to_rational();
    let target = &first_mag * Dyadic::pow2(-(precision as i64)).to_rational();
    let mut sum = term.clone();
    let mut qk1 = q.pow(k as i64 + 1);
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));

    loop {
        let rho = &x_mag / (&qk1 - &one);
        if rho < half {
            let rem = term.mag_upper().to_rational() * &rho / (&one - &rho);
            if rem <= target || k > n + MAX_TERMS {
                let rem = Dyadic::ceil_rational(&rem, 32);
                return sum.widen(&rem).with_precision(precision);
            }
        }
        k += 1;
        let ratio = (&one - &qk1).recip();
        term = term.mul_ball(&x).mul_ball(&Ball::from_rational(&ratio, wp));
        sum = sum + &term;
        qk1 = &qk1 * qv;
    }
}

/// `G_{q,inf}(t) = (1;q)_{-inf} sum_{l>=0} (-t)^l / q^{binom(l,2)}` for
/// `0 < t < 1`, where the series alternates with decreasing terms.
pub fn g_inf(q: &QBase, t: &Ball, precision: u32) -> Result<Ball> {
    let one = Ball::one();
    if !t.is_positive() || !t.certainly_lt(&one) {
        return Err(Error::Domain(format!(
            "G_{{q,inf}}(t) needs 0 < t < 1 certified, got {t}"
        )));
    }
    let wp = precision + GUARD_BITS;
    let t = t.with_precision(wp.max(t.precision()));
    let eps = Dyadic::pow2(-(precision as i64) - 2);
    let qinv = q.value().recip();

    let mut sum = Ball::zero();
    let mut term = Ball::one().with_precision(wp);
    let mut qinv_pow = BigRational::one(); // q^{-l}
    for _ in 0..MAX_TERMS {
        sum = sum + &term;
        // term_{l+1} = -term_l * t * q^{-l}
        let next = -(term.mul_ball(&t).mul_ball(&Ball::from_rational(&qinv_pow, wp)));
        qinv_pow = &qinv_pow * &qinv;
        if next.mag_upper() <= eps {
            sum = sum.widen(&next.mag_upper());
            break;
        }
        term = next;
    }
    let pinf = q_pochhammer_inf(&Ball::one(), q, precision)?;
    Ok((sum * pinf).with_precision(precision))
}
