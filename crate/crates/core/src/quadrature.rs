//! The equal-weight quadrature formula `Z` given by all values of
//! `sum a_j X_j`, its exactness, the ruler property and tensor-product
//! cubature.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::ball::Ball;
use crate::error::{Error, Result};
use crate::momentmatch::{uniform_moment, BaseSpec, CoefficientSet};

pub mod figure;

pub const NODE_CAP: u128 = 1_000_000;
pub const CUBATURE_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadratureNode {
    pub value: Ball,
    /// Outcomes `X_j`, each in `{p_j - 1, p_j - 3, ..., 1 - p_j}`.
    pub outcome: Vec<i32>,
}

#[derive(Clone, Debug)]
pub struct QuadratureFormula {
    pub spec: BaseSpec,
    /// Ascending.
    pub nodes: Vec<QuadratureNode>,
    pub weight: BigRational,
    /// Guaranteed exactness degree `2n + 1`.
    pub degree: usize,
}

impl QuadratureFormula {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn values(&self) -> Vec<Ball> {
        self.nodes.iter().map(|n| n.value.clone()).collect()
    }

    /// `node[i] == -node[len-1-i]` exactly, midpoint and radius.
    pub fn is_negation_closed(&self) -> bool {
        let n = self.nodes.len();
        (0..n).all(|i| self.nodes[i].value == self.nodes[n - 1 - i].value.neg_ball())
    }

    /// Builds a formula from node balls, sorting and separating them.
    pub fn from_nodes(spec: BaseSpec, mut nodes: Vec<QuadratureNode>) -> Result<Self> {
        nodes.sort_by(|x, y| x.value.midpoint().cmp(y.value.midpoint()));
        if let Some(i) = (1..nodes.len()).find(|&i| !nodes[i - 1].value.certainly_lt(&nodes[i].value)) {
            return Err(Error::PrecisionEscalation(format!(
                "nodes {} and {} overlap: {} vs {}",
                i - 1,
                i,
                nodes[i - 1].value,
                nodes[i].value
            )));
        }
        let count = nodes.len();
        let degree = 2 * spec.len() + 1;
        Ok(QuadratureFormula {
            spec,
            nodes,
            weight: BigRational::new(BigInt::one(), BigInt::from(count)),
            degree,
        })
    }
}

fn support(p: u32) -> impl Iterator<Item = i32> {
    (0..p as i32).map(move |d| 2 * d - (p as i32 - 1))
}

/// All `prod p_j` values of `sum a_j X_j`, sorted ascending.
pub fn enumerate_nodes(cs: &CoefficientSet) -> Result<QuadratureFormula> {
    if !cs.converged {
        return Err(Error::InvalidSpec("coefficients did not converge".into()));
    }
    let count = cs.spec.count();
    if count > NODE_CAP {
        return Err(Error::SizeCap {
            what: "quadrature nodes",
            requested: count,
            cap: NODE_CAP,
        });
    }
    let bases = cs.spec.bases();
    // terms[j][d] = a_j * X_j for outcome index d.
    let terms: Vec<Vec<(i32, Ball)>> = bases
        .iter()
        .zip(&cs.a)
        .map(|(&p, a)| support(p).map(|x| (x, a.mul_i64(x as i64))).collect())
        .collect();
    let mut nodes = vec![QuadratureNode {
        value: Ball::zero(),
        outcome: Vec::new(),
    }];
    for level in &terms {
        let mut next = Vec::with_capacity(nodes.len() * level.len());
        for node in &nodes {
            for (x, t) in level {
                let mut outcome = node.outcome.clone();
                outcome.push(*x);
                next.push(QuadratureNode {
                    value: node.value.add_ball(t),
                    outcome,
                });
            }
        }
        nodes = next;
    }
    QuadratureFormula::from_nodes(cs.spec.clone(), nodes)
}

/// `weight * sum node^k - E[Y^k]` for `k = 0..=max_degree`. Odd residuals are
/// exactly zero when the node set is closed under negation.
pub fn exactness_residuals(qf: &QuadratureFormula, max_degree: usize) -> Vec<Ball> {
    let symmetric = qf.is_negation_closed();
    let mut sums = vec![Ball::zero(); max_degree + 1];
    for node in &qf.nodes {
        let mut pw = Ball::one();
        for (k, s) in sums.iter_mut().enumerate() {
            if k > 0 {
                pw = pw.mul_ball(&node.value);
            }
            if !(symmetric && k % 2 == 1) {
                *s = s.add_ball(&pw);
            }
        }
    }
    sums.into_iter()
        .enumerate()
        .map(|(k, s)| {
            if symmetric && k % 2 == 1 {
                return Ball::zero();
            }
            let prec = s.precision();
            s.mul_rational(&qf.weight)
                .sub_ball(&Ball::from_rational(&uniform_moment(k as u32), prec))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RulerEntry {
    /// Digit `d_j = (X_j + p_j - 1) / 2` of every summand.
    pub digits: Vec<u32>,
    /// Subinterval predicted by the digits.
    pub index: u128,
    /// Position of the node in ascending order.
    pub rank: usize,
    /// The node ball lies strictly inside its predicted open subinterval.
    pub inside: bool,
}

#[derive(Clone, Debug)]
pub struct RulerReport {
    pub entries: Vec<RulerEntry>,
    /// Subinterval indices form a permutation of `0..count`.
    pub bijection: bool,
    pub all_inside: bool,
    pub index_matches_rank: bool,
    /// Set for mixed bases, where the property is unproven.
    pub mixed: bool,
}

impl RulerReport {
    pub fn passed(&self) -> bool {
        self.bijection && self.all_inside && self.index_matches_rank
    }

    /// Entries that break the property.
    pub fn violations(&self) -> impl Iterator<Item = &RulerEntry> {
        self.entries
            .iter()
            .filter(|e| !e.inside || e.index != e.rank as u128)
    }
}

/// Checks that each node lies strictly inside the cell
/// `(c - w, c + w)` with `c = sum X_j prod_{m<=j} p_m^{-1}` and
/// `w = prod p_m^{-1}`, and that cell numbers follow the digits.
pub fn ruler_check(qf: &QuadratureFormula) -> RulerReport {
    let bases = qf.spec.bases();
    let total: BigInt = bases.iter().map(|&p| BigInt::from(p)).product();
    let scale = Ball::from_bigint(total.clone());
    let count = qf.nodes.len();
    let mut seen = vec![false; count];
    let mut bijection = true;
    let mut all_inside = true;
    let mut index_matches_rank = true;
    let mut entries = Vec::with_capacity(count);
    for (rank, node) in qf.nodes.iter().enumerate() {
        // Scaled by N = prod p: the cell is (C - 1, C + 1) with C an integer.
        let mut c = BigInt::zero();
        let mut index: u128 = 0;
        let mut digits = Vec::with_capacity(bases.len());
        for (&p, &x) in bases.iter().zip(&node.outcome) {
            c = c * BigInt::from(p) + BigInt::from(x);
            let d = ((x + p as i32 - 1) / 2) as u32;
            index = index * p as u128 + d as u128;
            digits.push(d);
        }
        let scaled = node.value.mul_ball(&scale);
        let lo = crate::dyadic::Dyadic::from_bigint(&c - 1);
        let hi = crate::dyadic::Dyadic::from_bigint(&c + 1);
        let inside = scaled.lower() > lo && scaled.upper() < hi;
        all_inside &= inside;
        index_matches_rank &= index == rank as u128;
        match seen.get_mut(index as usize) {
            Some(slot) if !*slot => *slot = true,
            _ => bijection = false,
        }
        entries.push(RulerEntry {
            digits,
            index,
            rank,
            inside,
        });
    }
    bijection &= seen.iter().all(|&s| s);
    RulerReport {
        entries,
        bijection,
        all_inside,
        index_matches_rank,
        mixed: qf.spec.uniform_base().is_none(),
    }
}

/// Full tensor grid `axis^d` in lexicographic order.
pub fn tensor_grid<T: Clone>(axis: &[T], d: usize, cap: u128) -> Result<Vec<Vec<T>>> {
    if d == 0 {
        return Err(Error::InvalidSpec("dimension must be at least 1".into()));
    }
    let requested = (axis.len() as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if requested > cap {
        return Err(Error::SizeCap {
            what: "cubature points",
            requested,
            cap,
        });
    }
    let mut grid: Vec<Vec<T>> = vec![Vec::with_capacity(d)];
    for _ in 0..d {
        let mut next = Vec::with_capacity(grid.len() * axis.len());
        for point in &grid {
            for x in axis {
                let mut p = point.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        grid = next;
    }
    Ok(grid)
}

#[derive(Clone, Debug)]
pub struct Cubature {
    pub dim: usize,
    pub points: Vec<Vec<Ball>>,
    pub weight: BigRational,
}

/// The product formula `Z^d` with weight `1 / count^d`.
pub fn product_cubature(qf: &QuadratureFormula, d: usize) -> Result<Cubature> {
    let points = tensor_grid(&qf.values(), d, CUBATURE_CAP)?;
    let weight = BigRational::new(BigInt::one(), BigInt::from(points.len()));
    Ok(Cubature { dim: d, points, weight })
}

/// `weight * sum prod x_i^{alpha_i} - prod E[Y^{alpha_i}]`.
pub fn monomial_residual(cub: &Cubature, alpha: &[u32]) -> Ball {
    assert_eq!(alpha.len(), cub.dim, "multi-index length must equal the dimension");
    let sum = cub.points.iter().fold(Ball::zero(), |acc, pt| {
        let term = pt
            .iter()
            .zip(alpha)
            .fold(Ball::one(), |t, (x, &e)| t.mul_ball(&x.pow(e)));
        acc.add_ball(&term)
    });
    let target = alpha
        .iter()
        .fold(BigRational::one(), |t, &e| t * uniform_moment(e));
    let prec = sum.precision();
    sum.mul_rational(&cub.weight)
        .sub_ball(&Ball::from_rational(&target, prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentmatch::{coefficients, mixed_base_solve};

    fn formula(p: u32, n: usize) -> QuadratureFormula {
        enumerate_nodes(&coefficients(p, n, 128).unwrap()).unwrap()
    }

    #[test]
    fn printed_nodes_p2_n3() {
        let qf = formula(2, 3);
        assert_eq!(qf.len(), 8);
        let top = qf.nodes[7].value.to_f64();
        assert!((top - 3.592044 / 4.0).abs() < 5e-7);
        assert_eq!(qf.nodes[7].outcome, vec![1, 1, 1]);
        assert!(qf.is_negation_closed());
        assert_eq!(qf.weight, BigRational::new(1.into(), 8.into()));
        assert_eq!(qf.degree, 7);
    }

    #[test]
    fn gauss_two_point() {
        let qf = formula(2, 1);
        let v = 1.0 / 3f64.sqrt();
        assert!((qf.nodes[0].value.to_f64() + v).abs() < 1e-15);
        assert!((qf.nodes[1].value.to_f64() - v).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_four_point() {
        let qf = formula(2, 2);
        let want = [-0.794654472, -0.187592474, 0.187592474, 0.794654472];
        for (n, w) in qf.nodes.iter().zip(want) {
            assert!((n.value.to_f64() - w).abs() < 1e-9);
        }
        let res = exactness_residuals(&qf, 6);
        assert!(res[..=5].iter().all(|r| r.contains_zero()));
        assert!(!res[6].contains_zero());
        // Direct f64 evaluation of the degree-6 residual.
        let direct: f64 = want.iter().map(|x| x.powi(6)).sum::<f64>() / 4.0 - 1.0 / 7.0;
        assert!((res[6].to_f64() - direct).abs() < 1e-8);
    }

    #[test]
    fn odd_residuals_exactly_zero() {
        let qf = formula(3, 2);
        let res = exactness_residuals(&qf, 9);
        for k in (1..=9).step_by(2) {
            assert_eq!(res[k], Ball::zero());
        }
    }

    #[test]
    fn mixed_nodes_match_figure() {
        let cs = mixed_base_solve(&BaseSpec::new(vec![2, 3]).unwrap(), 96).unwrap();
        let qf = enumerate_nodes(&cs).unwrap();
        let want = [3.426608, 1.988709, 0.550810];
        for (i, w) in want.iter().enumerate() {
            assert!((qf.nodes[5 - i].value.to_f64() - w / 4.0).abs() < 5e-7);
        }
        let rep = ruler_check(&qf);
        assert!(rep.mixed);
        assert!(rep.passed());
    }

    #[test]
    fn ruler_small_cases() {
        for (p, n) in [(2, 1), (2, 3), (3, 3), (5, 2)] {
            let rep = ruler_check(&formula(p, n));
            assert!(rep.passed(), "p={p} n={n}");
            assert!(!rep.mixed);
        }
        let qf = formula(2, 3);
        let rep = ruler_check(&qf);
        // +a1 - a2 - a3 ~ 0.102245 sits in cell 4 = (0, 1/4).
        let e = rep.entries.iter().find(|e| e.digits == vec![1, 0, 0]).unwrap();
        assert_eq!(e.index, 4);
        assert!((qf.nodes[e.rank].value.to_f64() - 0.102245).abs() < 1e-6);
    }

    #[test]
    fn tensor_grid_order_and_cap() {
        let g = tensor_grid(&[1, 2], 2, 100).unwrap();
        assert_eq!(g, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        assert!(matches!(
            tensor_grid(&[0u8; 10], 7, 1000),
            Err(Error::SizeCap { .. })
        ));
        assert_eq!(tensor_grid(&[7], 1, 1).unwrap(), vec![vec![7]]);
    }

    #[test]
    fn cubature_exactness() {
        let qf = formula(2, 1);
        let cub = product_cubature(&qf, 2).unwrap();
        assert_eq!(cub.points.len(), 4);
        assert!(monomial_residual(&cub, &[2, 2]).contains_zero());
        let qf = formula(2, 2);
        let cub = product_cubature(&qf, 2).unwrap();
        assert_eq!(cub.points.len(), 16);
        for i in 0..=5 {
            for j in 0..=5 {
                assert!(monomial_residual(&cub, &[i, j]).contains_zero(), "{i},{j}");
            }
        }
        assert!(!monomial_residual(&cub, &[6, 0]).contains_zero());
    }
}
