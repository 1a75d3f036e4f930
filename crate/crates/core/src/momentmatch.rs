//! Coefficients `a_j` that make `sum a_j X_j` match the first `2n` moments of
//! the uniform distribution on `[-1, 1]`, together with moment, power-sum
//! and cumulant checks.
//!
//! For equal bases the coefficients come from the roots `r_j` of
//! `F_{p^2,<=n}` via `a_j = r_j^{-1/2}`. Mixed bases solve
//! `sum_j b_j^k (p_j^{2k} - 1) = 1`, `k = 1..n`, for `b_j = a_j^2` by damped
//! Newton iteration, then certify the result with a Krawczyk test.

use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::Ball;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::rootfind::roots_all;
use crate::scalar::Scalar;

const NEWTON_MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 60;
const NEWTON_GUARD: u32 = 32;

/// Bases `p_1..p_n` of the summands, each at least 2.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BaseSpec {
    bases: Vec<u32>,
}

impl BaseSpec {
    pub fn new(bases: Vec<u32>) -> Result<Self> {
        if bases.is_empty() {
            return Err(Error::InvalidSpec("at least one base is required".into()));
        }
        if let Some(&p) = bases.iter().find(|&&p| p < 2) {
            return Err(Error::InvalidSpec(format!("base {p} is below 2")));
        }
        Ok(BaseSpec { bases })
    }

    pub fn uniform(p: u32, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        Self::new(vec![p; n])
    }

    pub fn bases(&self) -> &[u32] {
        &self.bases
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// The common base when all bases agree.
    pub fn uniform_base(&self) -> Option<u32> {
        let p = self.bases[0];
        self.bases.iter().all(|&b| b == p).then_some(p)
    }

    /// Number of outcomes `prod p_j`.
    pub fn count(&self) -> u128 {
        self.bases
            .iter()
            .try_fold(1u128, |acc, &p| acc.checked_mul(p as u128))
            .unwrap_or(u128::MAX)
    }
}

impl fmt::Display for BaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.bases.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    PolynomialRoots,
    NewtonMixed,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::PolynomialRoots => "polynomial-roots",
            Method::NewtonMixed => "newton-mixed",
        }
    }
}

/// Solved coefficients. `a` is listed in the order of the bases, which is
/// descending whenever `descending` is set; `r_j = a_j^{-2}`, `b_j = a_j^2`.
#[derive(Clone, Debug)]
pub struct CoefficientSet {
    pub spec: BaseSpec,
    pub a: Vec<Ball>,
    pub r: Vec<Ball>,
    pub b: Vec<Ball>,
    pub method: Method,
    pub converged: bool,
    pub descending: bool,
    pub iterations: usize,
}

fn certified_descending(a: &[Ball]) -> bool {
    a.windows(2).all(|w| w[1].certainly_lt(&w[0])) && a.last().is_some_and(|x| x.is_positive())
}

/// Coefficients for `n` summands of base `p` from the roots of `F_{p^2,<=n}`.
pub fn coefficients(p: u32, n: usize, precision: u32) -> Result<CoefficientSet> {
    let spec = BaseSpec::uniform(p, n)?;
    let roots = roots_all(p, n, precision + NEWTON_GUARD)?;
    let r: Vec<Ball> = roots.into_iter().map(|c| c.value).collect();
    let mut b = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    for rj in &r {
        let bj = rj.recip().ok_or(Error::Consistency("root enclosure contains 0".into()))?;
        let aj = bj.sqrt().ok_or(Error::Consistency("negative root".into()))?;
        b.push(bj);
        a.push(aj);
    }
    let descending = certified_descending(&a);
    if !descending {
        return Err(Error::PrecisionEscalation(format!(
            "coefficients for p={p}, n={n} are not separated at {precision} bits"
        )));
    }
    Ok(CoefficientSet {
        spec,
        a,
        r,
        b,
        method: Method::PolynomialRoots,
        converged: true,
        descending,
        iterations: 0,
    })
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `p^{2k} - 1`.
fn weight(p: u32, k: usize) -> BigInt {
    num_traits::pow(BigInt::from(p), 2 * k) - 1
}

/// `sum_j b_j^k - 1/(p^{2k} - 1)` for `k = 1..n`; equal bases only.
pub fn power_sum_residuals(cs: &CoefficientSet) -> Result<Vec<Ball>> {
    let p = cs
        .spec
        .uniform_base()
        .ok_or_else(|| Error::InvalidSpec("power sums need equal bases".into()))?;
    let n = cs.b.len();
    let prec = cs.b.iter().map(|b| b.precision()).max().unwrap_or(0);
    Ok((1..=n)
        .map(|k| {
            let sum = cs
                .b
                .iter()
                .fold(Ball::zero(), |acc, b| acc + b.pow(k as u32));
            let target = BigRational::new(BigInt::one(), weight(p, k));
            sum - Ball::from_rational(&target, prec)
        })
        .collect())
}

/// `sum_j b_j^k (p_j^{2k} - 1) - 1` for `k = 1..n`.
pub fn mixed_system_residuals(cs: &CoefficientSet) -> Vec<Ball> {
    let n = cs.b.len();
    (1..=n)
        .map(|k| {
            let sum = cs
                .b
                .iter()
                .zip(cs.spec.bases())
                .fold(Ball::zero(), |acc, (b, &p)| {
                    acc + b.pow(k as u32) * Ball::from_bigint(weight(p, k))
                });
            sum - Ball::one()
        })
        .collect()
}

/// `E[X^k]` for `X` uniform on `{p-1, p-3, ..., 1-p}`.
pub fn discrete_uniform_moment(p: u32, k: u32) -> BigRational {
    if k % 2 == 1 {
        return BigRational::zero();
    }
    let sum: BigInt = (0..p)
        .map(|d| num_traits::pow(BigInt::from(p as i64 - 1 - 2 * d as i64), k as usize))
        .sum();
    BigRational::new(sum, BigInt::from(p))
}

/// `E[Y^k]` for `Y` uniform on `[-1, 1]`.
pub fn uniform_moment(k: u32) -> BigRational {
    if k % 2 == 1 {
        BigRational::zero()
    } else {
        rat(1, k as i64 + 1)
    }
}

/// Cumulants `kappa_1..kappa_m` from moments `mu_0 = 1, mu_1..mu_m` via
/// `kappa_m = mu_m - sum_{i<m} C(m-1, i-1) kappa_i mu_{m-i}`.
pub fn cumulants_from_moments<T: Scalar>(mu: &[T]) -> Vec<T> {
    let m = mu.len().saturating_sub(1);
    let mut kappa: Vec<T> = Vec::with_capacity(m + 1);
    kappa.push(T::zero());
    for j in 1..=m {
        let mut acc = mu[j].clone();
        for i in 1..j {
            let c = T::from_i64(binomial(j as i64 - 1, i as i64 - 1));
            acc = acc - c * kappa[i].clone() * mu[j - i].clone();
        }
        kappa.push(acc);
    }
    kappa
}

#[derive(Clone, Debug)]
pub struct CumulantReport {
    pub p: u32,
    /// `kappa_{2k}(X_p)` for `k = 1..K`.
    pub kappa_x: Vec<BigRational>,
    /// `kappa_{2k}(Y)` for `k = 1..K`.
    pub kappa_y: Vec<BigRational>,
    /// `kappa_{2k}(X_p) - (p^{2k} - 1) kappa_{2k}(Y)`.
    pub residuals: Vec<Ball>,
    /// `(-1)^{k+1} kappa_{2k}(X_2) > 0` for every `k`; `None` unless `p = 2`.
    pub alternating_signs: Option<bool>,
}

impl CumulantReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| r.contains_zero()) && self.alternating_signs != Some(false)
    }
}

/// Even cumulants of `X_p` against `(p^{2k} - 1)` times those of `Y`.
pub fn cumulants_check(p: u32, max_k: usize, precision: u32) -> CumulantReport {
    let m = 2 * max_k;
    let mu_x: Vec<BigRational> = (0..=m as u32).map(|k| discrete_uniform_moment(p, k)).collect();
    let mu_y: Vec<BigRational> = (0..=m as u32).map(uniform_moment).collect();
    let kx = cumulants_from_moments(&mu_x);
    let ky = cumulants_from_moments(&mu_y);
    let kappa_x: Vec<BigRational> = (1..=max_k).map(|k| kx[2 * k].clone()).collect();
    let kappa_y: Vec<BigRational> = (1..=max_k).map(|k| ky[2 * k].clone()).collect();
    let residuals = (1..=max_k)
        .map(|k| {
            let r = &kappa_x[k - 1] - int(weight(p, k)) * &kappa_y[k - 1];
            Ball::from_rational(&r, precision)
        })
        .collect();
    let alternating_signs = (p == 2).then(|| {
        kappa_x.iter().enumerate().all(|(i, c)| {
            // k = i + 1
            if i % 2 == 0 {
                c.is_positive()
            } else {
                c.is_negative()
            }
        })
    });
    CumulantReport {
        p,
        kappa_x,
        kappa_y,
        residuals,
        alternating_signs,
    }
}

/// `kappa_{2k}` of `sum a_j X_j` from the per-summand cumulants.
pub fn combined_even_cumulant(cs: &CoefficientSet, k: usize) -> Ball {
    cs.a
        .iter()
        .zip(cs.spec.bases())
        .fold(Ball::zero(), |acc, (a, &p)| {
            let mu: Vec<BigRational> = (0..=2 * k as u32)
                .map(|i| discrete_uniform_moment(p, i))
                .collect();
            let kx = cumulants_from_moments(&mu)[2 * k].clone();
            acc + a.pow(2 * k as u32).mul_rational(&kx)
        })
}

fn system_value(bases: &[u32], b: &[BigRational]) -> Vec<BigRational> {
    let n = b.len();
    (1..=n)
        .map(|k| {
            let mut s = -BigRational::one();
            for (bj, &p) in b.iter().zip(bases) {
                s += num_traits::pow(bj.clone(), k) * int(weight(p, k));
            }
            s
        })
        .collect()
}

fn system_jacobian(bases: &[u32], b: &[BigRational]) -> Vec<Vec<BigRational>> {
    let n = b.len();
    (1..=n)
        .map(|k| {
            b.iter()
                .zip(bases)
                .map(|(bj, &p)| {
                    num_traits::pow(bj.clone(), k - 1) * int(weight(p, k)) * int(k as i64)
                })
                .collect()
        })
        .collect()
}

/// Solves `m x = rhs` by Gaussian elimination; `Err(column)` when singular.
fn solve_linear(
    mut m: Vec<Vec<BigRational>>,
    mut rhs: Vec<BigRational>,
) -> std::result::Result<Vec<BigRational>, usize> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !m[r][col].is_zero())
            .max_by(|&x, &y| m[x][col].abs().cmp(&m[y][col].abs()))
            .ok_or(col)?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = m[col][col].recip();
        for row in col + 1..n {
            if m[row][col].is_zero() {
                continue;
            }
            let f = &m[row][col] * &inv;
            let (top, bottom) = m.split_at_mut(row);
            for (dst, src) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *dst -= &f * src;
            }
            let t = &f * &rhs[col];
            rhs[row] -= t;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for row in (0..n).rev() {
        let mut s = rhs[row].clone();
        for c in row + 1..n {
            s -= &m[row][c] * &x[c];
        }
        x[row] = s / &m[row][row];
    }
    Ok(x)
}

fn inverse(m: &[Vec<BigRational>]) -> std::result::Result<Vec<Vec<BigRational>>, usize> {
    let n = m.len();
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let e: Vec<BigRational> = (0..n)
            .map(|r| if r == i { BigRational::one() } else { BigRational::zero() })
            .collect();
        cols.push(solve_linear(m.to_vec(), e)?);
    }
    Ok((0..n).map(|r| (0..n).map(|c| cols[c][r].clone()).collect()).collect())
}

fn max_abs(v: &[BigRational]) -> BigRational {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(BigRational::zero)
}

fn round_dyadic(x: &BigRational, bits: u32) -> BigRational {
    Dyadic::floor_rational(x, bits).to_rational()
}

struct NewtonOutcome {
    b: Vec<BigRational>,
    step: Vec<BigRational>,
    converged: bool,
    iterations: usize,
}

fn damped_newton(bases: &[u32], precision: u32) -> Result<NewtonOutcome> {
    let n = bases.len();
    let bits = precision + NEWTON_GUARD;
    let mut b: Vec<BigRational> = Vec::with_capacity(n);
    let mut acc = BigRational::one();
    for &p in bases {
        acc /= int(p as i64 * p as i64);
        b.push(acc.clone());
    }
    let tiny = Dyadic::pow2(-(precision as i64) - 16).to_rational();
    let step_tol = Dyadic::pow2(-(precision as i64) - 8).to_rational();
    let mut f = system_value(bases, &b);
    let mut norm = max_abs(&f);
    let mut last_step = vec![BigRational::zero(); n];
    for it in 1..=NEWTON_MAX_ITER {
        let jac = system_jacobian(bases, &b);
        let rhs: Vec<BigRational> = f.iter().map(|v| -v).collect();
        let delta = solve_linear(jac, rhs).map_err(Error::SingularJacobian)?;
        let mut lambda = BigRational::one();
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<BigRational> = b
                .iter()
                .zip(&delta)
                .map(|(x, d)| round_dyadic(&(x + &lambda * d), bits))
                .collect();
            if trial.iter().all(|x| x.is_positive()) {
                let tf = system_value(bases, &trial);
                let tn = max_abs(&tf);
                if tn < norm || tn <= tiny {
                    accepted = Some((trial, tf, tn));
                    break;
                }
            }
            lambda /= int(2);
        }
        let Some((trial, tf, tn)) = accepted else {
            return Ok(NewtonOutcome {
                b,
                step: delta,
                converged: false,
                iterations: it,
            });
        };
        last_step = b.iter().zip(&trial).map(|(x, y)| y - x).collect();
        b = trial;
        f = tf;
        norm = tn;
        let rel = b
            .iter()
            .zip(&last_step)
            .map(|(x, d)| (d / x).abs())
            .max()
            .unwrap_or_else(BigRational::zero);
        if rel <= step_tol && norm <= tiny {
            return Ok(NewtonOutcome {
                b,
                step: last_step,
                converged: true,
                iterations: it,
            });
        }
    }
    Ok(NewtonOutcome {
        b,
        step: last_step,
        converged: false,
        iterations: NEWTON_MAX_ITER,
    })
}

/// Krawczyk operator test around `m`. Returns enclosures that contain a
/// unique zero of the system when the test succeeds.
fn krawczyk(bases: &[u32], m: &[BigRational], precision: u32) -> Result<Option<Vec<Ball>>> {
    let n = m.len();
    let wp = precision + 64;
    let jm = system_jacobian(bases, m);
    let y = inverse(&jm).map_err(Error::SingularJacobian)?;
    let y: Vec<Vec<Ball>> = y
        .iter()
        .map(|row| row.iter().map(|v| Ball::from_rational(v, wp)).collect())
        .collect();
    let mb: Vec<Ball> = m.iter().map(|v| Ball::from_rational(v, wp)).collect();
    let fm: Vec<Ball> = system_value(bases, m)
        .iter()
        .map(|v| Ball::from_rational(v, wp))
        .collect();
    let yf: Vec<Ball> = (0..n)
        .map(|i| (0..n).fold(Ball::zero(), |acc, l| acc + y[i][l].mul_ball(&fm[l])))
        .collect();
    for widen in 0..8i64 {
        let eps: Vec<Dyadic> = m
            .iter()
            .map(|v| {
                let mag = Dyadic::ceil_rational(v, 32);
                mag.mul_pow2(-(precision as i64) - 4 + 8 * widen)
            })
            .collect();
        let boxes: Vec<Ball> = mb.iter().zip(&eps).map(|(c, e)| c.widen(e)).collect();
        let deltas: Vec<Ball> = eps.iter().map(|e| Ball::error(e.clone())).collect();
        // J(B)
        let jb: Vec<Vec<Ball>> = (1..=n)
            .map(|k| {
                boxes
                    .iter()
                    .zip(bases)
                    .map(|(bx, &p)| {
                        bx.pow(k as u32 - 1)
                            .mul_ball(&Ball::from_bigint(weight(p, k) * BigInt::from(k)))
                    })
                    .collect()
            })
            .collect();
        let mut inside = true;
        let mut result = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = mb[i].sub_ball(&yf[i]);
            for l in 0..n {
                let yj = (0..n).fold(Ball::zero(), |s, t| s + y[i][t].mul_ball(&jb[t][l]));
                let ident = if i == l { Ball::one() } else { Ball::zero() };
                acc = acc + (ident - yj).mul_ball(&deltas[l]);
            }
            if !(boxes[i].lower() < acc.lower() && acc.upper() < boxes[i].upper()) {
                inside = false;
                break;
            }
            result.push(acc);
        }
        if inside {
            return Ok(Some(result));
        }
    }
    Ok(None)
}

/// Solves the moment system for arbitrary bases by damped Newton iteration
/// from `b_j = prod_{m<=j} p_m^{-2}` followed by a Krawczyk certification.
///
/// Failure to converge or certify is reported through `converged = false`
/// with the best iterate, not as an error.
pub fn mixed_base_solve(spec: &BaseSpec, precision: u32) -> Result<CoefficientSet> {
    let bases = spec.bases();
    let outcome = damped_newton(bases, precision)?;
    let certified = if outcome.converged {
        krawczyk(bases, &outcome.b, precision)?
    } else {
        None
    };
    let converged = certified.is_some();
    let b: Vec<Ball> = match certified {
        Some(balls) => balls.into_iter().map(|x| x.with_precision(precision + 32)).collect(),
        None => outcome
            .b
            .iter()
            .zip(&outcome.step)
            .map(|(v, d)| {
                Ball::from_rational(v, precision + 32).widen(&Dyadic::ceil_rational(&d.abs(), 32))
            })
            .collect(),
    };
    let mut a = Vec::with_capacity(b.len());
    let mut r = Vec::with_capacity(b.len());
    for bj in &b {
        a.push(bj.sqrt().unwrap_or_else(|| bj.abs().sqrt().expect("non-negative")));
        r.push(bj.recip().unwrap_or_else(|| Ball::error(Dyadic::zero())));
    }
    let descending = certified_descending(&a);
    Ok(CoefficientSet {
        spec: spec.clone(),
        a,
        r,
        b,
        method: Method::NewtonMixed,
        converged,
        descending,
        iterations: outcome.iterations,
    })
}

/// Equal bases go through the polynomial roots; anything else through
/// [`mixed_base_solve`].
pub fn solve(spec: &BaseSpec, precision: u32) -> Result<CoefficientSet> {
    match spec.uniform_base() {
        Some(p) => coefficients(p, spec.len(), precision),
        None => mixed_base_solve(spec, precision),
    }
}
