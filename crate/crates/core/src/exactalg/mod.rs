//! Exact arithmetic: rationals, rational polynomials, number fields `ℚ(λ)`,
//! formal Laurent polynomials in a transcendental `λ`, interval enclosures and
//! Pisot certification.

mod field;
mod interval;
mod pisot;
mod poly;
mod rational;

pub use field::{FieldElement, FieldMode, Irreducibility, LaurentPoly, NumberField};
pub use interval::{Interval, RatInterval};
pub use pisot::{pisot_certify, ComplexDisc, PisotReport, PisotStatus};
pub use poly::{refine_root, Poly};
pub use rational::Rational;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse exact number from {0:?}")]
    Parse(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("element is not invertible modulo the defining polynomial")]
    NotInvertible,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("{0}")]
    InvalidInput(String),
    #[error("malformed canonical key")]
    MalformedKey,
}
