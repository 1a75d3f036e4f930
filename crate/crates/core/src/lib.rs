//! Certified construction of equal-weight quadrature formulas from sums of
//! scaled discrete uniform variables, and checks of the moment, root and
//! ruler properties they satisfy.
//!
//! Exact work happens in [`Rational`]; everything approximate is a [`Ball`]
//! whose radius is a proven error bound. The polynomial and moment code is
//! generic over [`Scalar`], so the same routines also run on `f64` and `f32`.

pub mod ball;
pub mod bounds;
pub mod decimal;
pub mod dyadic;
pub mod error;
pub mod momentmatch;
pub mod qseries;
pub mod quadrature;
pub mod rootfind;
pub mod scalar;

pub use ball::{Ball, DEFAULT_PRECISION};
pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use momentmatch::{BaseSpec, CoefficientSet, Method};
pub use qseries::{ClearedPolynomial, QBase, QPolynomial};
pub use quadrature::figure::FigureFormat;
pub use quadrature::{QuadratureFormula, QuadratureNode, RulerReport};
pub use rootfind::{CertifiedRoot, RootBracket};
pub use scalar::Scalar;

pub type Rational = num_rational::BigRational;
pub type Integer = num_bigint::BigInt;

pub type ExactQPolynomial = QPolynomial<Rational>;
pub type BallQPolynomial = QPolynomial<Ball>;
pub type F64QPolynomial = QPolynomial<f64>;
pub type F32QPolynomial = QPolynomial<f32>;
