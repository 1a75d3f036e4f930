//! Isolation and refinement of the positive roots of `F_{q,<=n}` for
//! `q = p^2`.
//!
//! Root `j` is bracketed by `(p^{2j-1}, p^{2j+1})`; the polynomial alternates
//! in sign at the points `p^{2k+1}`. Refinement is plain bisection with exact
//! integer sign tests, so every enclosure is certified.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::ball::Ball;
use crate::dyadic::{exact_dyadic, Dyadic};
use crate::error::{Error, Result};
use crate::qseries::{truncated_q_exponential, ClearedPolynomial, QBase, QPolynomial};

/// Extra midpoint bits carried by root balls so the final enclosure is
/// represented without rounding.
const ENCLOSURE_GUARD: u32 = 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootBracket {
    pub lo: BigRational,
    pub hi: BigRational,
    pub sign_lo: i32,
    pub sign_hi: i32,
    /// 1-based root index.
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedRoot {
    pub value: Ball,
    pub index: usize,
    pub bracket: RootBracket,
}

fn int_pow(p: u32, e: u32) -> BigRational {
    BigRational::from_integer(num_traits::pow(BigInt::from(p), e as usize))
}

/// Brackets for every root of `poly`, whose base must be `p^2` with `p >= 2`.
pub fn bracket_roots(poly: &QPolynomial<BigRational>, p: u32) -> Result<Vec<RootBracket>> {
    if p < 2 {
        return Err(Error::Domain(format!("bracketing needs p >= 2, got {p}")));
    }
    let q = BigRational::from_integer(BigInt::from(p) * BigInt::from(p));
    if poly.q().value() != &q {
        return Err(Error::Domain(format!(
            "polynomial base {} is not {p}^2",
            poly.q()
        )));
    }
    let n = poly.degree();
    let cleared = poly.cleared();
    let points: Vec<BigRational> = (0..=n).map(|k| int_pow(p, 2 * k as u32 + 1)).collect();
    let signs: Vec<i32> = points.iter().map(|x| cleared.sign_at(x)).collect();
    for (k, &s) in signs.iter().enumerate() {
        let expect = if k % 2 == 0 { 1 } else { -1 };
        if s != expect {
            return Err(Error::Consistency(format!(
                "F_{{{q},<={n}}}({p}^{}) has sign {s}, expected {expect}",
                2 * k + 1
            )));
        }
    }
    Ok((1..=n)
        .map(|j| RootBracket {
            lo: points[j - 1].clone(),
            hi: points[j].clone(),
            sign_lo: signs[j - 1],
            sign_hi: signs[j],
            index: j,
        })
        .collect())
}

fn root_ball(lo: &Dyadic, hi: &Dyadic, precision: u32) -> Ball {
    Ball::from_endpoints(lo, hi, precision + ENCLOSURE_GUARD)
}

/// Bisects `bracket` until its width is at most `2^-precision * max(1, lo)`
/// and both ends have moved strictly inside the original bracket.
pub fn refine_root(
    poly: &QPolynomial<BigRational>,
    bracket: &RootBracket,
    precision: u32,
) -> CertifiedRoot {
    let done = |value: Ball| CertifiedRoot {
        value,
        index: bracket.index,
        bracket: bracket.clone(),
    };
    if poly.degree() == 1 {
        // 1 + c x = 0
        let root = -poly.coeffs()[1].recip();
        return done(Ball::from_rational(&root, precision + ENCLOSURE_GUARD));
    }
    let cleared = poly.cleared();
    let value = refine_cleared(&cleared, bracket, precision)
        .expect("bracket endpoints are dyadic");
    done(value)
}

fn refine_cleared(cleared: &ClearedPolynomial, bracket: &RootBracket, precision: u32) -> Option<Ball> {
    let orig_lo = exact_dyadic(&bracket.lo)?;
    let orig_hi = exact_dyadic(&bracket.hi)?;
    let mut lo = orig_lo.clone();
    let mut hi = orig_hi.clone();
    let scale = Dyadic::max(&Dyadic::one(), &lo);
    let tol_exp = scale.magnitude_exponent().unwrap_or(1) - 1 - precision as i64;
    let tol = Dyadic::pow2(tol_exp);
    let sign_lo = bracket.sign_lo;
    loop {
        let width = &hi - &lo;
        if width <= tol && lo != orig_lo && hi != orig_hi {
            return Some(root_ball(&lo, &hi, precision));
        }
        let mid = (&lo + &hi).half();
        match cleared.sign_at(&mid.to_rational()) {
            0 => return Some(Ball::exact(mid).with_precision(precision + ENCLOSURE_GUARD)),
            s if s == sign_lo => lo = mid,
            _ => hi = mid,
        }
    }
}

/// The `n` roots of `F_{p^2,<=n}` in increasing order.
pub fn roots_all(p: u32, n: usize, precision: u32) -> Result<Vec<CertifiedRoot>> {
    if n == 0 {
        return Err(Error::Domain("need n >= 1".into()));
    }
    let poly = truncated_q_exponential(&QBase::square_of(p)?, n);
    roots_of(&poly, p, precision)
}

/// Roots of an already constructed `F_{p^2,<=n}`.
pub fn roots_of(poly: &QPolynomial<BigRational>, p: u32, precision: u32) -> Result<Vec<CertifiedRoot>> {
    let brackets = bracket_roots(poly, p)?;
    Ok(brackets
        .par_iter()
        .map(|b| refine_root(poly, b, precision))
        .collect())
}

/// Sign of the polynomial at both ends of a root enclosure.
pub fn enclosure_signs(poly: &QPolynomial<BigRational>, root: &CertifiedRoot) -> (i32, i32) {
    let c = poly.cleared();
    (
        c.sign_at(&root.value.lower().to_rational()),
        c.sign_at(&root.value.upper().to_rational()),
    )
}

/// True when the enclosures are strictly increasing and pairwise disjoint.
pub fn strictly_increasing(roots: &[CertifiedRoot]) -> bool {
    roots.windows(2).all(|w| w[0].value.certainly_lt(&w[1].value))
        && roots.first().is_none_or(|r| r.value.is_positive())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn brackets_for_q4_n3() {
        let poly = truncated_q_exponential(&QBase::from_integer(4).unwrap(), 3);
        let b = bracket_roots(&poly, 2).unwrap();
        let ends: Vec<_> = b.iter().map(|b| (b.lo.clone(), b.hi.clone())).collect();
        assert_eq!(
            ends,
            vec![(rat(2), rat(8)), (rat(8), rat(32)), (rat(32), rat(128))]
        );
        assert_eq!(b[0].sign_lo, 1);
        assert_eq!(b[2].sign_hi, -1);
    }

    #[test]
    fn bracketing_rejects_wrong_base() {
        let poly = truncated_q_exponential(&QBase::from_integer(5).unwrap(), 2);
        assert!(matches!(bracket_roots(&poly, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn linear_root_is_exact() {
        let r = roots_all(2, 1, 64).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].value.is_exact());
        assert_eq!(r[0].value.midpoint(), &Dyadic::from_i64(3));
        let r = roots_all(3, 1, 64).unwrap();
        assert_eq!(r[0].value.midpoint(), &Dyadic::from_i64(8));
    }

    #[test]
    fn quadratic_roots_match_closed_form() {
        // x^2 - 15x + 45 = 0
        let r = roots_all(2, 2, 96).unwrap();
        let s5 = 5f64.sqrt();
        assert!((r[0].value.to_f64() - (15.0 - 3.0 * s5) / 2.0).abs() < 1e-13);
        assert!((r[1].value.to_f64() - (15.0 + 3.0 * s5) / 2.0).abs() < 1e-13);
        // Exact check: the enclosure endpoints straddle the quadratic's root.
        for root in &r {
            let lo = root.value.lower().to_rational();
            let hi = root.value.upper().to_rational();
            let f = |x: &BigRational| x * x - rat(15) * x + rat(45);
            let product = f(&lo) * f(&hi);
            assert!(product <= BigRational::zero());
        }
    }

    #[test]
    fn enclosure_width_and_sign_change() {
        let poly = truncated_q_exponential(&QBase::from_integer(16).unwrap(), 6);
        let roots = roots_of(&poly, 4, 128).unwrap();
        assert!(strictly_increasing(&roots));
        for r in &roots {
            let (a, b) = enclosure_signs(&poly, r);
            assert!(a * b < 0, "root {} lacks a sign change", r.index);
            assert!(r.value.strictly_inside(&r.bracket.lo, &r.bracket.hi));
            let width = r.value.radius().mul_pow2(1).to_rational();
            let scale = r.value.midpoint().to_rational().max(rat(1));
            assert!(width <= scale * Dyadic::pow2(-128).to_rational());
        }
    }

    #[test]
    fn coarse_enclosures_contain_fine_ones() {
        let coarse = roots_all(3, 5, 40).unwrap();
        let fine = roots_all(3, 5, 120).unwrap();
        for (c, f) in coarse.iter().zip(&fine) {
            assert!(c.value.contains(&f.value));
            assert!(f.value.radius() < c.value.radius());
        }
    }
}
