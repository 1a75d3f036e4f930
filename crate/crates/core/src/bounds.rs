//! Root bounds `r_{n,j} q^{-j}` between 1 and `c_k` (`k = n + 1 - j`), the
//! coefficient inequality `sum |a_j - p^{-j}| < 1/(p^n (p-1))`, and the
//! auxiliary quantities `h_{q,k}` and `hat h_{q,k}`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::ball::Ball;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::momentmatch::CoefficientSet;
use crate::qseries::{g_inf, q_pochhammer_inf, QBase};
use crate::rootfind::roots_all;

const REFINE_MAX_ITER: usize = 200;

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn qpow(q: &BigRational, e: i64) -> BigRational {
    num_traits::pow::Pow::pow(q, e as i32)
}

fn tri(k: usize) -> i64 {
    binomial(k as i64 + 1, 2)
}

/// `c_1 = 1 - 2/q`, `c_k = 1 + (-1)^k 4 q^{-binom(k+1,2)}` for `k > 1`.
pub fn c_k(q: &BigRational, k: usize) -> BigRational {
    assert!(k >= 1, "k starts at 1");
    if k == 1 {
        return BigRational::one() - int(2) / q;
    }
    let t = int(4) * qpow(q, -tri(k));
    if k.is_multiple_of(2) {
        BigRational::one() + t
    } else {
        BigRational::one() - t
    }
}

fn min_max_one(c: &BigRational) -> (BigRational, BigRational) {
    let one = BigRational::one();
    if c < &one {
        (c.clone(), one)
    } else {
        (one, c.clone())
    }
}

fn ball_within(x: &Ball, lo: &BigRational, hi: &BigRational) -> bool {
    &x.lower().to_rational() >= lo && &x.upper().to_rational() <= hi
}

#[derive(Clone, Debug)]
pub struct BoundEntry {
    pub j: usize,
    pub k: usize,
    /// `r_{n,j} q^{-j}`.
    pub ratio: Ball,
    pub c_k: BigRational,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub p: u32,
    pub n: usize,
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

fn scaled_roots(p: u32, n: usize, precision: u32) -> Result<Vec<Ball>> {
    let q = int(p as i64 * p as i64);
    Ok(roots_all(p, n, precision)?
        .into_iter()
        .map(|r| r.value.mul_rational(&qpow(&q, -(r.index as i64))))
        .collect())
}

fn ball_outside(x: &Ball, lo: &BigRational, hi: &BigRational) -> bool {
    &x.upper().to_rational() < lo || &x.lower().to_rational() > hi
}

const BOUND_PRECISION_LIMIT: u32 = 1 << 14;

/// Checks `r_{n,j} q^{-j} in [min(1, c_k), max(1, c_k)]` for every `j`,
/// doubling the precision while some ratio straddles an end of its interval.
pub fn root_bound_check(p: u32, n: usize, precision: u32) -> Result<BoundReport> {
    let q = int(p as i64 * p as i64);
    let mut prec = precision.max(1);
    loop {
        let mut undecided = false;
        let entries: Vec<BoundEntry> = scaled_roots(p, n, prec)?
            .into_iter()
            .enumerate()
            .map(|(i, ratio)| {
                let j = i + 1;
                let k = n + 1 - j;
                let c = c_k(&q, k);
                let (lo, hi) = min_max_one(&c);
                let pass = ball_within(&ratio, &lo, &hi);
                undecided |= !pass && !ball_outside(&ratio, &lo, &hi);
                BoundEntry { j, k, ratio, c_k: c, pass }
            })
            .collect();
        if !undecided || prec >= BOUND_PRECISION_LIMIT {
            return Ok(BoundReport { p, n, entries });
        }
        prec *= 2;
    }
}

#[derive(Clone, Debug)]
pub struct TermBound {
    pub j: usize,
    pub k: usize,
    /// `|p^{-j} - a_j|`.
    pub deviation: Ball,
    /// `p^{-j} |1 - c_k^{-1/2}|`.
    pub root_ratio_bound: Ball,
    /// `2 / p^{j + 4k - 2}`.
    pub geometric_bound: BigRational,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct InequalityReport {
    pub p: u32,
    pub n: usize,
    /// `sum_j |a_j - p^{-j}|`.
    pub sum: Ball,
    /// `1 / (p^n (p - 1))`.
    pub bound: BigRational,
    pub sum_pass: bool,
    /// Largest value `(p - 1) sum a_j` lies below 1 and every value of
    /// `sum a_j X_j` stays within `p^{-n}` of `sum X_j p^{-j}`.
    pub containment_pass: bool,
    pub terms: Vec<TermBound>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.sum_pass && self.containment_pass && self.terms.iter().all(|t| t.pass)
    }
}

/// Certified check of `sum |a_j - p^{-j}| < 1/(p^n (p-1))` and the per-term
/// bounds behind it.
pub fn coefficient_inequality_check(cs: &CoefficientSet) -> Result<InequalityReport> {
    let p = cs
        .spec
        .uniform_base()
        .ok_or_else(|| Error::InvalidSpec("the inequality needs equal bases".into()))?;
    let n = cs.a.len();
    let pr = int(p as i64);
    let q = int(p as i64 * p as i64);
    let prec = cs.a.iter().map(|a| a.precision()).max().unwrap_or(0);
    let mut sum = Ball::zero();
    let mut top = Ball::zero();
    let mut terms = Vec::with_capacity(n);
    for (i, a) in cs.a.iter().enumerate() {
        let j = i + 1;
        let k = n + 1 - j;
        let target = qpow(&pr, -(j as i64));
        let deviation = a.sub_ball(&Ball::from_rational(&target, prec)).abs();
        sum = sum.add_ball(&deviation);
        top = top.add_ball(a);
        let c = Ball::from_rational(&c_k(&q, k), prec);
        let inv_sqrt = c
            .sqrt()
            .and_then(|s| s.recip())
            .ok_or_else(|| Error::Consistency("c_k is not positive".into()))?;
        let root_ratio_bound = (Ball::one() - inv_sqrt).abs().mul_rational(&target);
        let geometric_bound = int(2) * qpow(&pr, -((j + 4 * k) as i64 - 2));
        let pass = deviation.certainly_lt(&root_ratio_bound)
            && root_ratio_bound.upper().to_rational() < geometric_bound;
        terms.push(TermBound {
            j,
            k,
            deviation,
            root_ratio_bound,
            geometric_bound,
            pass,
        });
    }
    let bound = BigRational::one() / (qpow(&pr, n as i64) * int(p as i64 - 1));
    let sum_pass = sum.upper().to_rational() < bound;
    let spread = sum.mul_i64(p as i64 - 1).upper().to_rational();
    let containment_pass =
        spread < qpow(&pr, -(n as i64)) && top.mul_i64(p as i64 - 1).upper() < Dyadic::one();
    Ok(InequalityReport {
        p,
        n,
        sum,
        bound,
        sum_pass,
        containment_pass,
        terms,
    })
}

/// Mixed-base analogue: `sum (p_j - 1) |a_j - prod_{m<=j} p_m^{-1}|` against
/// `prod p_m^{-1}`. Returns the sum and whether it is certified below.
pub fn mixed_inequality_check(cs: &CoefficientSet) -> (Ball, BigRational, bool) {
    let mut cell = BigRational::one();
    let mut sum = Ball::zero();
    for (a, &p) in cs.a.iter().zip(cs.spec.bases()) {
        cell /= int(p as i64);
        let prec = a.precision();
        let dev = a.sub_ball(&Ball::from_rational(&cell, prec)).abs();
        sum = sum.add_ball(&dev.mul_i64(p as i64 - 1));
    }
    let pass = sum.upper().to_rational() < cell;
    (sum, cell, pass)
}

/// `(-1)^{k+1} (1 - c) q^{binom(k+1,2)} c^{-k-1} /
/// ((c^{-1}; q)_{-inf} (c; q)_{-inf} G_{q,inf}(c q^{-k-1}))`.
pub fn h_of_c(q: &QBase, k: usize, c: &BigRational, precision: u32) -> Result<Ball> {
    if !c.is_positive() {
        return Err(Error::Domain(format!("h needs c > 0, got {c}")));
    }
    let qv = q.value();
    let wp = precision + 32;
    let sign = if k % 2 == 1 { int(1) } else { int(-1) };
    let num = sign * (BigRational::one() - c) * qpow(qv, tri(k)) * qpow(c, -(k as i64) - 1);
    let num = Ball::from_rational(&num, wp);
    let c_ball = Ball::from_rational(c, wp);
    let cinv_ball = Ball::from_rational(&c.recip(), wp);
    let t = Ball::from_rational(&(c * qpow(qv, -(k as i64) - 1)), wp);
    let den = q_pochhammer_inf(&cinv_ball, q, wp)?
        .mul_ball(&q_pochhammer_inf(&c_ball, q, wp)?)
        .mul_ball(&g_inf(q, &t, wp)?);
    let h = num
        .checked_div(&den)
        .ok_or_else(|| Error::Consistency("h denominator contains 0".into()))?;
    Ok(h.with_precision(precision))
}

/// `h_{q,k}` at `c = c_k`.
pub fn h_qk(q: &QBase, k: usize, precision: u32) -> Result<Ball> {
    h_of_c(q, k, &c_k(q.value(), k), precision)
}

/// Lower bound `hat h_{q,k}` for `h_{q,k}` in product form; `q > 2`.
pub fn h_hat(q: &BigRational, k: usize) -> Result<BigRational> {
    let two = int(2);
    if q <= &two {
        return Err(Error::Domain(format!("hat h needs q > 2, got {q}")));
    }
    let one = BigRational::one();
    let c = c_k(q, k);
    let qm1 = q - &one;
    let common = (&one - &c / &qm1) * (&one - c.recip() / &qm1);
    let lead = if k == 1 { int(2) } else { int(4) };
    let tail = if k == 2 {
        (&one - q.recip()) * (&one - (q * &qm1).recip())
    } else {
        &one - qm1.recip()
    };
    Ok(lead * qpow(&c, -(k as i64) - 1) * common * tail)
}

/// Closed forms of `hat h_{q,1}` and `hat h_{q,2}` as rational functions of q.
pub fn h_hat_closed_form(q: &BigRational, k: usize) -> Option<BigRational> {
    let one = BigRational::one();
    let p = |e: i32| num_traits::pow::Pow::pow(q, e);
    match k {
        1 => {
            let num = int(2) * q * (p(2) - int(4) * q + int(2)) * (p(2) - int(2) * q + int(2));
            let den = num_traits::pow::Pow::pow(&(q - &one), 3)
                * num_traits::pow::Pow::pow(&(q - int(2)), 2);
            Some(num / den)
        }
        2 => {
            let num = int(4)
                * p(4)
                * (p(2) - q - &one)
                * (p(2) - int(2) * q + int(2))
                * (p(2) - int(2))
                * (p(4) - int(2) * p(3) - int(4));
            let den = num_traits::pow::Pow::pow(&(q - &one), 2)
                * num_traits::pow::Pow::pow(&(p(3) + int(4)), 4);
            Some(num / den)
        }
        _ => None,
    }
}

/// Bisects `hat h_{q,k} - 1` over `q in [lo, hi]` down to width `tol`.
/// Returns a bracket `(a, b)` with `hat h < 1` at `a` and `> 1` at `b`.
pub fn h_hat_threshold(
    k: usize,
    lo: &BigRational,
    hi: &BigRational,
    tol: &BigRational,
) -> Result<(BigRational, BigRational)> {
    let one = BigRational::one();
    let g = |q: &BigRational| -> Result<Ordering> { Ok(h_hat(q, k)?.cmp(&one)) };
    let (mut a, mut b) = (lo.clone(), hi.clone());
    if g(&a)? != Ordering::Less || g(&b)? != Ordering::Greater {
        return Err(Error::Domain(format!(
            "hat h_{{q,{k}}} - 1 does not change sign on [{lo}, {hi}]"
        )));
    }
    while &(&b - &a) >= tol {
        let m = (&a + &b) / int(2);
        match g(&m)? {
            Ordering::Less => a = m,
            Ordering::Greater => b = m,
            Ordering::Equal => return Ok((m.clone(), m)),
        }
    }
    Ok((a, b))
}

#[derive(Clone, Debug)]
pub struct RefinedC {
    /// Encloses the solution of `h(c) = 1` between 1 and `c_k`.
    pub value: Ball,
    pub iterations: usize,
    /// The bisection ended because `h - 1` could not be signed.
    pub stalled: bool,
}

/// Solves `h(c) = 1` for `c` between 1 and `c_k` by bisection.
pub fn refined_c_k(q: &QBase, k: usize, precision: u32) -> Result<RefinedC> {
    let qv = q.value();
    let ck = c_k(qv, k);
    let one = BigRational::one();
    // h vanishes at c = 1 and exceeds 1 at c_k.
    let h_end = h_of_c(q, k, &ck, precision)?;
    if !(h_end.lower() > Dyadic::one()) {
        return Err(Error::Consistency(format!(
            "no sign change of h - 1 between 1 and c_{k}"
        )));
    }
    let (mut near, mut far) = (one.clone(), ck);
    let tol = Dyadic::pow2(-(precision as i64)).to_rational();
    let mut iterations = 0;
    let mut stalled = false;
    while (&far - &near).abs() > tol && iterations < REFINE_MAX_ITER {
        iterations += 1;
        let mid = Dyadic::floor_rational(&((&near + &far) / int(2)), precision + 64).to_rational();
        if mid == near || mid == far {
            break;
        }
        let h = h_of_c(q, k, &mid, precision + 40)?;
        if h.upper() < Dyadic::one() {
            near = mid;
        } else if h.lower() > Dyadic::one() {
            far = mid;
        } else {
            stalled = true;
            break;
        }
    }
    let (lo, hi) = if near < far { (near, far) } else { (far, near) };
    let wp = precision + 32;
    let lo_d = Dyadic::floor_rational(&lo, wp);
    let hi_d = Dyadic::ceil_rational(&hi, wp);
    let value = Ball::from_endpoints(&lo_d, &hi_d, wp);
    let range_ok = {
        let l = lo_d.to_rational();
        let h = hi_d.to_rational();
        &l * &l * qv > one && &h * &h < *qv
    };
    if !range_ok {
        return Err(Error::Consistency("refined c_k left (q^-1/2, q^1/2)".into()));
    }
    Ok(RefinedC {
        value,
        iterations,
        stalled,
    })
}

/// `(-1)^{k+1} (1 - c) q^{binom(k+1,2)}` for an enclosure of `c`.
pub fn scaled_displacement(q: &QBase, k: usize, c: &Ball) -> Ball {
    let sign = if k % 2 == 1 { 1 } else { -1 };
    (Ball::one() - c.clone())
        .mul_i64(sign)
        .mul_rational(&qpow(q.value(), tri(k)))
}

#[derive(Clone, Debug)]
pub struct MonotoneReport {
    pub p: u32,
    pub k: usize,
    /// `c_{n,k}` for `n = k..=n_max`.
    pub values: Vec<Ball>,
    /// `Greater` for increasing, `Less` for decreasing, `Equal` for a single
    /// value.
    pub direction: Ordering,
    pub monotone: bool,
}

/// `c_{n,k} = r_{n,n+1-k} q^{-(n+1-k)}` for `n = k..=n_max`, certified
/// monotone in `n`.
pub fn monotonicity_check(p: u32, k: usize, n_max: usize, precision: u32) -> Result<MonotoneReport> {
    if k == 0 || k > n_max {
        return Err(Error::Domain(format!("need 1 <= k <= n_max, got k={k}")));
    }
    let values: Vec<Ball> = (k..=n_max)
        .map(|n| scaled_roots(p, n, precision).map(|v| v[n - k].clone()))
        .collect::<Result<_>>()?;
    let mut steps = Vec::with_capacity(values.len());
    for w in values.windows(2) {
        let step = if w[0].certainly_lt(&w[1]) {
            Ordering::Greater
        } else if w[1].certainly_lt(&w[0]) {
            Ordering::Less
        } else {
            return Err(Error::PrecisionEscalation(format!(
                "c_{{n,{k}}} values {} and {} overlap",
                w[0], w[1]
            )));
        };
        steps.push(step);
    }
    let direction = steps.first().copied().unwrap_or(Ordering::Equal);
    let monotone = steps.iter().all(|&s| s == direction);
    Ok(MonotoneReport {
        p,
        k,
        values,
        direction,
        monotone,
    })
}

#[derive(Clone, Debug)]
pub struct SpacingEntry {
    pub j: usize,
    pub k: usize,
    /// `|r_{n,j} q^{-j} - 1|`.
    pub deviation: Ball,
    /// `5 q^{-binom(k+1,2)}`.
    pub bound: BigRational,
    pub pass: bool,
}

/// Explicit-constant surrogate for `r_{n,j} q^{-j} = 1 + O(q^{-binom(k+1,2)})`:
/// `|r_{n,j} q^{-j} - 1| <= 5 q^{-binom(k+1,2)}` for `k >= 2`.
pub fn spacing_check(p: u32, n: usize, precision: u32) -> Result<Vec<SpacingEntry>> {
    let q = int(p as i64 * p as i64);
    Ok(scaled_roots(p, n, precision)?
        .into_iter()
        .enumerate()
        .filter_map(|(i, ratio)| {
            let j = i + 1;
            let k = n + 1 - j;
            (k >= 2).then(|| {
                let deviation = (ratio - Ball::one()).abs();
                let bound = int(5) * qpow(&q, -tri(k));
                let pass = deviation.upper().to_rational() <= bound;
                SpacingEntry {
                    j,
                    k,
                    deviation,
                    bound,
                    pass,
                }
            })
        })
        .collect())
}
