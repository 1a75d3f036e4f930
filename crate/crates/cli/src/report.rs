//! Serialized documents. Field names and order are the stable interface.

use serde::{Deserialize, Serialize};

use qmoments::decimal::{format_ball, format_radius};
use qmoments::{Ball, BaseSpec, CoefficientSet, Dyadic, QuadratureFormula};

fn squares(spec: &BaseSpec) -> Vec<u64> {
    spec.bases().iter().map(|&p| p as u64 * p as u64).collect()
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct CoefficientRadius {
    pub a: String,
    pub r: String,
    pub b: String,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct CoefficientsDoc {
    pub bases: Vec<u32>,
    pub q: Vec<u64>,
    pub a: Vec<String>,
    pub r: Vec<String>,
    pub b: Vec<String>,
    pub radius: Vec<CoefficientRadius>,
    pub method: String,
    pub converged: bool,
}

impl CoefficientsDoc {
    pub fn new(cs: &CoefficientSet, digits: u32) -> Self {
        let fmt = |v: &[Ball]| v.iter().map(|x| format_ball(x, digits)).collect();
        CoefficientsDoc {
            bases: cs.spec.bases().to_vec(),
            q: squares(&cs.spec),
            a: fmt(&cs.a),
            r: fmt(&cs.r),
            b: fmt(&cs.b),
            radius: cs
                .a
                .iter()
                .zip(&cs.r)
                .zip(&cs.b)
                .map(|((a, r), b)| CoefficientRadius {
                    a: format_radius(a.radius()),
                    r: format_radius(r.radius()),
                    b: format_radius(b.radius()),
                })
                .collect(),
            method: cs.method.as_str().to_string(),
            converged: cs.converged,
        }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct NodesDoc {
    pub bases: Vec<u32>,
    pub q: Vec<u64>,
    pub count: u64,
    pub weight: String,
    pub degree: usize,
    pub nodes: Vec<String>,
    pub radius: Vec<String>,
    pub outcomes: Vec<Vec<i32>>,
}

impl NodesDoc {
    pub fn new(qf: &QuadratureFormula, digits: u32) -> Self {
        NodesDoc {
            bases: qf.spec.bases().to_vec(),
            q: squares(&qf.spec),
            count: qf.len() as u64,
            weight: qf.weight.to_string(),
            degree: qf.degree,
            nodes: qf.nodes.iter().map(|n| format_ball(&n.value, digits)).collect(),
            radius: qf.nodes.iter().map(|n| format_radius(n.value.radius())).collect(),
            outcomes: qf.nodes.iter().map(|n| n.outcome.clone()).collect(),
        }
    }
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Upper bound on the largest residual magnitude, when the check has one.
    pub residual: Option<String>,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            pass,
            residual: None,
            detail: detail.into(),
        }
    }

    pub fn with_residual(mut self, balls: &[Ball]) -> Self {
        let worst = balls
            .iter()
            .fold(Dyadic::zero(), |m, b| Dyadic::max(&m, &b.mag_upper()));
        self.residual = Some(format_radius(&worst));
        self
    }
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct VerifyDoc {
    pub bases: Vec<u32>,
    pub q: Vec<u64>,
    pub source: String,
    pub precision: u32,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyDoc {
    pub fn new(spec: &BaseSpec, source: &str, precision: u32, checks: Vec<Check>) -> Self {
        VerifyDoc {
            bases: spec.bases().to_vec(),
            q: squares(spec),
            source: source.to_string(),
            precision,
            passed: checks.iter().all(|c| c.pass),
            checks,
        }
    }
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct CubatureMeta {
    pub bases: Vec<u32>,
    pub q: Vec<u64>,
    pub dim: usize,
    pub points: u64,
    pub weight: String,
    pub degree: usize,
    pub max_radius: String,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct CubatureDoc {
    #[serde(flatten)]
    pub meta: CubatureMeta,
    pub coordinates: Vec<Vec<String>>,
}
