#![allow(dead_code)]

use std::path::PathBuf;

use ifsdim::exactalg::{FieldElement, LaurentPoly, NumberField, Poly, Rational};
use ifsdim::ifs::{AffineMap, IFSystem};

pub fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

pub fn algebraic(coeffs: &[i64], lo: i64, hi: i64) -> NumberField {
    NumberField::algebraic(Poly::from_ints(coeffs), Rational::from_int(lo), Rational::from_int(hi)).unwrap()
}

pub fn golden() -> NumberField {
    algebraic(&[-1, -1, 1], 1, 2)
}

pub fn laurent(field: &NumberField, low: i32, coeffs: &[i64]) -> FieldElement {
    field.reduce(&LaurentPoly::from_ints(low, coeffs)).unwrap()
}

/// `{x/λ, x/λ + 1 − 1/λ}` with the given weights.
pub fn bernoulli(field: &NumberField, probs: Option<Vec<Rational>>) -> IFSystem {
    let inv = laurent(field, -1, &[1]);
    let shift = laurent(field, -1, &[-1, 1]);
    let maps = vec![AffineMap::scalar(inv.clone(), field.zero()), AffineMap::scalar(inv, shift)];
    match probs {
        None => IFSystem::uniform(field.clone(), maps).unwrap(),
        Some(p) => IFSystem::new(field.clone(), maps, p).unwrap(),
    }
}

/// `{x/λ, x + 1}` with equal weights.
pub fn digit_pair(field: &NumberField) -> IFSystem {
    let maps = vec![
        AffineMap::scalar(laurent(field, -1, &[1]), field.zero()),
        AffineMap::scalar(field.one(), field.one()),
    ];
    IFSystem::uniform(field.clone(), maps).unwrap()
}

pub fn rational_pair(a: Rational, b: Rational, c: Rational, d: Rational) -> IFSystem {
    let f = NumberField::rational();
    let maps = vec![
        AffineMap::scalar(FieldElement::Rational(a), FieldElement::Rational(b)),
        AffineMap::scalar(FieldElement::Rational(c), FieldElement::Rational(d)),
    ];
    IFSystem::uniform(f, maps).unwrap()
}
