use std::fmt;

use num_bigint::{BigInt, Sign};
use serde::{Deserialize, Serialize};

use super::interval::{Interval, RatInterval};
use super::pisot::{pisot_certify, PisotStatus};
use super::poly::{refine_root, Poly};
use super::rational::Rational;
use super::ExactError;

/// Which coefficient ring a [`NumberField`] provides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldMode {
    RationalOnly,
    Algebraic,
    Formal,
}

/// How far irreducibility of the defining polynomial has been established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Irreducibility {
    /// Not applicable or proven (degree 1, or degree 2–3 without rational roots).
    Certified,
    /// Squarefree and free of rational roots, but degree ≥ 4: results that rely on
    /// exact equality are conditional on irreducibility.
    Conditional,
}

/// A finite Laurent polynomial `Σ coeffs[k] λ^(low + k)` as supplied by a user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPoly {
    pub low: i32,
    pub coeffs: Vec<Rational>,
}

impl LaurentPoly {
    pub fn constant(c: Rational) -> Self {
        LaurentPoly { low: 0, coeffs: vec![c] }
    }

    /// `c λ^k`
    pub fn monomial(c: Rational, k: i32) -> Self {
        LaurentPoly { low: k, coeffs: vec![c] }
    }

    pub fn from_ints(low: i32, coeffs: &[i64]) -> Self {
        LaurentPoly {
            low,
            coeffs: coeffs.iter().map(|&c| Rational::from_int(c)).collect(),
        }
    }

    fn terms(&self) -> impl Iterator<Item = (i32, &Rational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(k, c)| (self.low + k as i32, c))
    }
}

/// An element in canonical reduced form.
///
/// * `Rational`: plain rational (rational-only fields).
/// * `Algebraic`: coefficients of a polynomial in `λ` of degree below the defining
///   polynomial's degree, constant term first, trailing zeros stripped.
/// * `Laurent`: `(exponent, coefficient)` pairs sorted by exponent, no zero
///   coefficients.
///
/// Because forms are canonical, structural equality is field equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum FieldElement {
    Rational(Rational),
    Algebraic(Vec<Rational>),
    Laurent(Vec<(i32, Rational)>),
}

#[derive(Clone, Debug)]
struct AlgebraicData {
    min_poly: Poly,
    modulus: Poly,
    interval: RatInterval,
    lambda_inv: Option<Vec<Rational>>,
    lambda64: RatInterval,
}

#[derive(Clone, Debug)]
enum Kind {
    Rational,
    Algebraic(AlgebraicData),
    Formal { shadow: f64 },
}

/// Coefficient ring for map entries: `ℚ`, `ℚ(λ) = ℚ[x]/(m)`, or Laurent
/// polynomials in an indeterminate `λ`.
///
/// Immutable after construction.
#[derive(Clone, Debug)]
pub struct NumberField {
    kind: Kind,
    irreducibility: Irreducibility,
    pisot: PisotStatus,
}

const DEFAULT_BITS: u32 = 64;

impl NumberField {
    pub fn rational() -> Self {
        NumberField {
            kind: Kind::Rational,
            irreducibility: Irreducibility::Certified,
            pisot: PisotStatus::Inconclusive,
        }
    }

    /// Formal Laurent ring with `λ` treated as transcendental; `shadow` is only used
    /// for numeric reporting.
    pub fn formal(shadow: f64) -> Result<Self, ExactError> {
        if !(shadow.is_finite() && shadow > 0.0) {
            return Err(ExactError::InvalidField(format!(
                "formal shadow value must be a positive finite number, got {shadow}"
            )));
        }
        Ok(NumberField {
            kind: Kind::Formal { shadow },
            irreducibility: Irreducibility::Certified,
            pisot: PisotStatus::No,
        })
    }

    /// `ℚ(λ)` where `λ` is the unique root of `min_poly` in `[lo, hi]`.
    ///
    /// `min_poly` must have integer coefficients and be squarefree; a rational root
    /// makes a polynomial of degree > 1 reducible and is rejected.
    pub fn algebraic(min_poly: Poly, lo: Rational, hi: Rational) -> Result<Self, ExactError> {
        let deg = min_poly
            .degree()
            .filter(|&d| d >= 1)
            .ok_or_else(|| ExactError::InvalidField("defining polynomial must have degree ≥ 1".into()))?;
        if !min_poly.has_integer_coeffs() {
            return Err(ExactError::InvalidField(
                "defining polynomial must have integer coefficients".into(),
            ));
        }
        if lo > hi {
            return Err(ExactError::InvalidField("isolating interval is inverted".into()));
        }
        if !min_poly.is_squarefree() {
            return Err(ExactError::InvalidField(format!("{min_poly} is not squarefree")));
        }
        let roots_in = min_poly.count_roots(&lo, &hi) + usize::from(min_poly.eval(&lo).is_zero());
        if roots_in != 1 {
            return Err(ExactError::InvalidField(format!(
                "{min_poly} has {roots_in} roots in [{lo}, {hi}], expected exactly one"
            )));
        }
        let irreducibility = if deg == 1 {
            Irreducibility::Certified
        } else {
            match min_poly.rational_roots() {
                Some(r) if !r.is_empty() => {
                    return Err(ExactError::InvalidField(format!(
                        "{min_poly} has rational root {} and is reducible",
                        r[0]
                    )))
                }
                Some(_) if deg <= 3 => Irreducibility::Certified,
                _ => Irreducibility::Conditional,
            }
        };
        let modulus = min_poly.monic();
        let c0 = modulus.coeff(0);
        let lambda_inv = if c0.is_zero() {
            None
        } else {
            // m(x) = x q(x) + c0  ⇒  λ^{-1} = -q(λ)/c0
            let q: Vec<Rational> = modulus.coeffs()[1..].to_vec();
            let scale = (&Rational::from_int(-1) / &c0).expect("nonzero");
            Some(strip(q.iter().map(|c| c * &scale).collect()))
        };
        let interval = RatInterval::new(lo, hi);
        let lambda64 = refine_root(&modulus, &interval, DEFAULT_BITS);
        let mut field = NumberField {
            kind: Kind::Algebraic(AlgebraicData {
                min_poly,
                modulus,
                interval,
                lambda_inv,
                lambda64,
            }),
            irreducibility,
            pisot: PisotStatus::Inconclusive,
        };
        field.pisot = match pisot_certify(&field, DEFAULT_BITS) {
            Ok(r) => r.status,
            Err(_) => PisotStatus::Inconclusive,
        };
        Ok(field)
    }

    pub fn mode(&self) -> FieldMode {
        match self.kind {
            Kind::Rational => FieldMode::RationalOnly,
            Kind::Algebraic(_) => FieldMode::Algebraic,
            Kind::Formal { .. } => FieldMode::Formal,
        }
    }

    pub fn irreducibility(&self) -> Irreducibility {
        self.irreducibility
    }

    /// Pisot status certified at construction (64-bit precision).
    pub fn pisot_flag(&self) -> PisotStatus {
        self.pisot
    }

    /// Defining polynomial as given (integer coefficients), algebraic mode only.
    pub fn min_poly(&self) -> Option<&Poly> {
        match &self.kind {
            Kind::Algebraic(a) => Some(&a.min_poly),
            _ => None,
        }
    }

    pub fn isolating_interval(&self) -> Option<&RatInterval> {
        match &self.kind {
            Kind::Algebraic(a) => Some(&a.interval),
            _ => None,
        }
    }

    pub fn shadow_value(&self) -> Option<f64> {
        match self.kind {
            Kind::Formal { shadow } => Some(shadow),
            _ => None,
        }
    }

    /// Degree of `ℚ(λ)` over `ℚ` (1 for rational, `None` for formal).
    pub fn degree(&self) -> Option<usize> {
        match &self.kind {
            Kind::Rational => Some(1),
            Kind::Algebraic(a) => a.modulus.degree(),
            Kind::Formal { .. } => None,
        }
    }

    /// Numeric value of `λ` (midpoint of a 64-bit enclosure, or the shadow).
    pub fn lambda_f64(&self) -> Option<f64> {
        match &self.kind {
            Kind::Rational => None,
            Kind::Algebraic(a) => Some(a.lambda64.to_interval().mid()),
            Kind::Formal { shadow } => Some(*shadow),
        }
    }

    /// Isolating interval for `λ` of width at most `2^-bits`.
    pub fn lambda_interval(&self, bits: u32) -> Option<RatInterval> {
        match &self.kind {
            Kind::Algebraic(a) if bits <= DEFAULT_BITS => Some(a.lambda64.clone()),
            Kind::Algebraic(a) => Some(refine_root(&a.modulus, &a.lambda64, bits)),
            _ => None,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.from_rational(Rational::zero())
    }

    pub fn one(&self) -> FieldElement {
        self.from_rational(Rational::one())
    }

    pub fn from_rational(&self, r: Rational) -> FieldElement {
        match self.kind {
            Kind::Rational => FieldElement::Rational(r),
            Kind::Algebraic(_) => FieldElement::Algebraic(strip(vec![r])),
            Kind::Formal { .. } => {
                if r.is_zero() {
                    FieldElement::Laurent(Vec::new())
                } else {
                    FieldElement::Laurent(vec![(0, r)])
                }
            }
        }
    }

    pub fn from_int(&self, n: i64) -> FieldElement {
        self.from_rational(Rational::from_int(n))
    }

    /// The generator `λ`.
    pub fn lambda(&self) -> Result<FieldElement, ExactError> {
        self.reduce(&LaurentPoly::monomial(Rational::one(), 1))
    }

    /// Canonical form of a raw Laurent polynomial in `λ`.
    pub fn reduce(&self, raw: &LaurentPoly) -> Result<FieldElement, ExactError> {
        match &self.kind {
            Kind::Rational => {
                let mut value = Rational::zero();
                for (e, c) in raw.terms() {
                    if e != 0 {
                        return Err(ExactError::InvalidField(
                            "rational-only field has no generator λ".into(),
                        ));
                    }
                    value += c;
                }
                Ok(FieldElement::Rational(value))
            }
            Kind::Algebraic(a) => {
                let shifted: Vec<Rational> = raw.coeffs.clone();
                let p = Poly::new(shifted).rem(&a.modulus)?;
                let mut out = strip(p.into_coeffs());
                if raw.low > 0 {
                    let x = strip(vec![Rational::zero(), Rational::one()]);
                    let x = self.alg_reduce(&x, a)?;
                    for _ in 0..raw.low {
                        out = self.alg_mul(&out, &x, a)?;
                    }
                } else if raw.low < 0 {
                    let inv = a.lambda_inv.as_ref().ok_or_else(|| {
                        ExactError::InvalidField(
                            "λ is not invertible: defining polynomial has zero constant term".into(),
                        )
                    })?;
                    for _ in 0..(-raw.low) {
                        out = self.alg_mul(&out, inv, a)?;
                    }
                }
                Ok(FieldElement::Algebraic(out))
            }
            Kind::Formal { .. } => {
                Ok(FieldElement::Laurent(raw.terms().map(|(e, c)| (e, c.clone())).collect()))
            }
        }
    }

    fn alg_reduce(&self, v: &[Rational], a: &AlgebraicData) -> Result<Vec<Rational>, ExactError> {
        Ok(strip(Poly::new(v.to_vec()).rem(&a.modulus)?.into_coeffs()))
    }

    fn alg_mul(
        &self,
        x: &[Rational],
        y: &[Rational],
        a: &AlgebraicData,
    ) -> Result<Vec<Rational>, ExactError> {
        if x.is_empty() || y.is_empty() {
            return Ok(Vec::new());
        }
        let mut prod = vec![Rational::zero(); x.len() + y.len() - 1];
        for (i, p) in x.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for (j, q) in y.iter().enumerate() {
                if !q.is_zero() {
                    prod[i + j] += &(p * q);
                }
            }
        }
        // reduce modulo the monic modulus from the top down
        let m = a.modulus.coeffs();
        let k = m.len() - 1;
        for top in (k..prod.len()).rev() {
            let c = std::mem::take(&mut prod[top]);
            if c.is_zero() {
                continue;
            }
            for (j, mj) in m[..k].iter().enumerate() {
                if !mj.is_zero() {
                    prod[top - k + j] -= &(&c * mj);
                }
            }
        }
        prod.truncate(k);
        Ok(strip(prod))
    }

    fn check(&self, a: &FieldElement) -> Result<(), ExactError> {
        let ok = matches!(
            (&self.kind, a),
            (Kind::Rational, FieldElement::Rational(_))
                | (Kind::Algebraic(_), FieldElement::Algebraic(_))
                | (Kind::Formal { .. }, FieldElement::Laurent(_))
        );
        if ok {
            Ok(())
        } else {
            Err(ExactError::MixedFields)
        }
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, ExactError> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (FieldElement::Rational(x), FieldElement::Rational(y)) => FieldElement::Rational(x + y),
            (FieldElement::Algebraic(x), FieldElement::Algebraic(y)) => {
                let n = x.len().max(y.len());
                FieldElement::Algebraic(strip(
                    (0..n)
                        .map(|k| match (x.get(k), y.get(k)) {
                            (Some(p), Some(q)) => p + q,
                            (Some(p), None) => p.clone(),
                            (None, Some(q)) => q.clone(),
                            (None, None) => Rational::zero(),
                        })
                        .collect(),
                ))
            }
            (FieldElement::Laurent(x), FieldElement::Laurent(y)) => {
                FieldElement::Laurent(laurent_add(x, y))
            }
            _ => return Err(ExactError::MixedFields),
        })
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        match a {
            FieldElement::Rational(x) => FieldElement::Rational(-x),
            FieldElement::Algebraic(x) => FieldElement::Algebraic(x.iter().map(|c| -c).collect()),
            FieldElement::Laurent(x) => {
                FieldElement::Laurent(x.iter().map(|(e, c)| (*e, -c)).collect())
            }
        }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, ExactError> {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, ExactError> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (&self.kind, a, b) {
            (_, FieldElement::Rational(x), FieldElement::Rational(y)) => FieldElement::Rational(x * y),
            (Kind::Algebraic(data), FieldElement::Algebraic(x), FieldElement::Algebraic(y)) => {
                FieldElement::Algebraic(self.alg_mul(x, y, data)?)
            }
            (_, FieldElement::Laurent(x), FieldElement::Laurent(y)) => {
                FieldElement::Laurent(laurent_mul(x, y))
            }
            _ => return Err(ExactError::MixedFields),
        })
    }

    /// Multiplicative inverse. Formal-mode elements are invertible only when they are
    /// monomials `c λ^k`.
    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement, ExactError> {
        self.check(a)?;
        if self.is_zero(a) {
            return Err(ExactError::DivisionByZero);
        }
        match (&self.kind, a) {
            (_, FieldElement::Rational(x)) => Ok(FieldElement::Rational(x.recip()?)),
            (Kind::Algebraic(data), FieldElement::Algebraic(x)) => {
                let (g, s) = Poly::new(x.clone()).gcd_inverse_part(&data.modulus);
                if g.degree() != Some(0) {
                    return Err(ExactError::NotInvertible);
                }
                Ok(FieldElement::Algebraic(self.alg_reduce(s.coeffs(), data)?))
            }
            (_, FieldElement::Laurent(x)) => {
                if x.len() == 1 {
                    Ok(FieldElement::Laurent(vec![(-x[0].0, x[0].1.recip()?)]))
                } else {
                    Err(ExactError::NotInvertible)
                }
            }
            _ => Err(ExactError::MixedFields),
        }
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, ExactError> {
        self.mul(a, &self.inv(b)?)
    }

    pub fn pow(&self, a: &FieldElement, exp: i32) -> Result<FieldElement, ExactError> {
        let base = if exp < 0 { self.inv(a)? } else { a.clone() };
        let mut acc = self.one();
        for _ in 0..exp.unsigned_abs() {
            acc = self.mul(&acc, &base)?;
        }
        Ok(acc)
    }

    pub fn is_zero(&self, a: &FieldElement) -> bool {
        match a {
            FieldElement::Rational(x) => x.is_zero(),
            FieldElement::Algebraic(x) => x.is_empty(),
            FieldElement::Laurent(x) => x.is_empty(),
        }
    }

    /// Exact equality test.
    pub fn equal(&self, a: &FieldElement, b: &FieldElement) -> Result<bool, ExactError> {
        self.check(a)?;
        self.check(b)?;
        Ok(a == b)
    }

    /// If `a` is rational, its value.
    pub fn as_rational(&self, a: &FieldElement) -> Option<Rational> {
        match a {
            FieldElement::Rational(x) => Some(x.clone()),
            FieldElement::Algebraic(x) if x.len() <= 1 => {
                Some(x.first().cloned().unwrap_or_default())
            }
            FieldElement::Laurent(x) if x.is_empty() => Some(Rational::zero()),
            FieldElement::Laurent(x) if x.len() == 1 && x[0].0 == 0 => Some(x[0].1.clone()),
            _ => None,
        }
    }

    /// Rational enclosure of the value of `a` with width at most
    /// `2^-bits · max(1, |a|)`. Formal mode evaluates at the shadow value (the
    /// enclosure then only accounts for floating-point rounding).
    pub fn eval_interval(&self, a: &FieldElement, bits: u32) -> Result<RatInterval, ExactError> {
        self.check(a)?;
        match (&self.kind, a) {
            (Kind::Rational, FieldElement::Rational(x)) => Ok(RatInterval::point(x.clone())),
            (Kind::Algebraic(data), FieldElement::Algebraic(x)) => {
                if x.len() <= 1 {
                    return Ok(RatInterval::point(x.first().cloned().unwrap_or_default()));
                }
                let p = Poly::new(x.clone());
                let mut work = bits + 8;
                for _ in 0..32 {
                    let lam = if work <= DEFAULT_BITS {
                        data.lambda64.clone()
                    } else {
                        refine_root(&data.modulus, &data.lambda64, work)
                    };
                    let iv = p.eval_interval(&lam).round_outward(bits + 4);
                    let scale = std::cmp::max(Rational::one(), iv.magnitude());
                    let allowed = (&scale / &pow2(bits)).expect("nonzero");
                    if iv.width() <= allowed {
                        return Ok(iv);
                    }
                    let ratio = (&iv.width() / &allowed).expect("nonzero").to_f64();
                    work += ratio.log2().ceil().max(1.0) as u32 + 2;
                }
                Err(ExactError::PrecisionExhausted(format!(
                    "could not reach {bits} bits for {}",
                    self.display(a)
                )))
            }
            (Kind::Formal { shadow }, FieldElement::Laurent(x)) => {
                let lam = Interval::point(*shadow);
                let mut acc = Interval::point(0.0);
                for (e, c) in x {
                    let pw = powi_interval(lam, *e);
                    acc = acc + Interval::from_rational(c) * pw;
                }
                Ok(RatInterval::new(
                    Rational::from_f64(acc.lo).ok_or(ExactError::PrecisionExhausted("overflow".into()))?,
                    Rational::from_f64(acc.hi).ok_or(ExactError::PrecisionExhausted("overflow".into()))?,
                ))
            }
            _ => Err(ExactError::MixedFields),
        }
    }

    /// Outward `f64` enclosure, computed by interval Horner evaluation at a
    /// 64-bit enclosure of `λ` (the shadow value in formal mode).
    pub fn to_interval(&self, a: &FieldElement) -> Interval {
        match (&self.kind, a) {
            (_, FieldElement::Rational(x)) => Interval::from_rational(x),
            (Kind::Algebraic(data), FieldElement::Algebraic(x)) => {
                let lam = data.lambda64.to_interval();
                x.iter()
                    .rev()
                    .fold(Interval::point(0.0), |acc, c| acc * lam + Interval::from_rational(c))
            }
            (Kind::Formal { shadow }, FieldElement::Laurent(x)) => {
                let lam = Interval::point(*shadow);
                x.iter().fold(Interval::point(0.0), |acc, (e, c)| {
                    acc + Interval::from_rational(c) * powi_interval(lam, *e)
                })
            }
            _ => Interval::point(f64::NAN),
        }
    }

    /// Numeric value (midpoint of the default enclosure).
    pub fn to_f64(&self, a: &FieldElement) -> f64 {
        match (&self.kind, a) {
            (_, FieldElement::Rational(x)) => x.to_f64(),
            (Kind::Formal { shadow }, FieldElement::Laurent(x)) => {
                x.iter().map(|(e, c)| c.to_f64() * shadow.powi(*e)).sum()
            }
            _ => self.to_interval(a).mid(),
        }
    }

    /// Stable canonical serialization, used as a hashing key.
    pub fn encode(&self, a: &FieldElement, out: &mut Vec<u8>) {
        match a {
            FieldElement::Rational(x) => encode_rational(x, out),
            FieldElement::Algebraic(x) => {
                write_varint(x.len() as u64, out);
                for c in x {
                    encode_rational(c, out);
                }
            }
            FieldElement::Laurent(x) => {
                write_varint(x.len() as u64, out);
                for (e, c) in x {
                    write_varint(zigzag(*e as i64), out);
                    encode_rational(c, out);
                }
            }
        }
    }

    pub fn decode(&self, input: &mut &[u8]) -> Result<FieldElement, ExactError> {
        Ok(match self.kind {
            Kind::Rational => FieldElement::Rational(decode_rational(input)?),
            Kind::Algebraic(_) => {
                let n = read_varint(input)? as usize;
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    v.push(decode_rational(input)?);
                }
                FieldElement::Algebraic(v)
            }
            Kind::Formal { .. } => {
                let n = read_varint(input)? as usize;
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    let e = unzigzag(read_varint(input)?) as i32;
                    v.push((e, decode_rational(input)?));
                }
                FieldElement::Laurent(v)
            }
        })
    }

    /// Human-readable form such as `1 - λ^-1`.
    pub fn display(&self, a: &FieldElement) -> String {
        let terms: Vec<(i32, Rational)> = match a {
            FieldElement::Rational(x) => vec![(0, x.clone())],
            FieldElement::Algebraic(x) => x
                .iter()
                .enumerate()
                .map(|(k, c)| (k as i32, c.clone()))
                .collect(),
            FieldElement::Laurent(x) => x.clone(),
        };
        let parts: Vec<String> = terms
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| match e {
                0 => c.to_string(),
                1 if c.is_one() => "λ".to_string(),
                1 => format!("{c}·λ"),
                _ if c.is_one() => format!("λ^{e}"),
                _ => format!("{c}·λ^{e}"),
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    /// A short description of the field for reports.
    pub fn describe(&self) -> String {
        match &self.kind {
            Kind::Rational => "Q".into(),
            Kind::Algebraic(a) => format!(
                "Q(λ), m(x) = {}, λ ∈ [{}, {}]",
                a.min_poly, a.interval.lo, a.interval.hi
            ),
            Kind::Formal { shadow } => format!("Q[λ, λ^-1] formal, shadow λ ≈ {shadow}"),
        }
    }
}

fn pow2(bits: u32) -> Rational {
    Rational::from_bigint(BigInt::from(1u8) << bits as usize)
}

fn powi_interval(x: Interval, e: i32) -> Interval {
    let mut acc = Interval::point(1.0);
    let base = if e < 0 { Interval::point(1.0) / x } else { x };
    for _ in 0..e.unsigned_abs() {
        acc = acc * base;
    }
    acc
}

fn strip(mut v: Vec<Rational>) -> Vec<Rational> {
    while v.last().is_some_and(Rational::is_zero) {
        v.pop();
    }
    v
}

fn laurent_add(x: &[(i32, Rational)], y: &[(i32, Rational)]) -> Vec<(i32, Rational)> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        match (x.get(i), y.get(j)) {
            (Some(a), Some(b)) if a.0 == b.0 => {
                let s = &a.1 + &b.1;
                if !s.is_zero() {
                    out.push((a.0, s));
                }
                i += 1;
                j += 1;
            }
            (Some(a), Some(b)) if a.0 < b.0 => {
                out.push(a.clone());
                i += 1;
            }
            (Some(_), Some(b)) => {
                out.push(b.clone());
                j += 1;
            }
            (Some(a), None) => {
                out.push(a.clone());
                i += 1;
            }
            (None, Some(b)) => {
                out.push(b.clone());
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

fn laurent_mul(x: &[(i32, Rational)], y: &[(i32, Rational)]) -> Vec<(i32, Rational)> {
    if x.is_empty() || y.is_empty() {
        return Vec::new();
    }
    if x.len() == 1 || y.len() == 1 {
        let (mono, other) = if x.len() == 1 { (&x[0], y) } else { (&y[0], x) };
        return other
            .iter()
            .map(|(e, c)| (e + mono.0, c * &mono.1))
            .collect();
    }
    let mut terms: Vec<(i32, Rational)> = Vec::with_capacity(x.len() * y.len());
    for (ea, ca) in x {
        for (eb, cb) in y {
            terms.push((ea + eb, ca * cb));
        }
    }
    terms.sort_by_key(|t| t.0);
    let mut out: Vec<(i32, Rational)> = Vec::with_capacity(terms.len());
    for (e, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == e => last.1 += &c,
            _ => out.push((e, c)),
        }
    }
    out.retain(|t| !t.1.is_zero());
    out
}

fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

fn unzigzag(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

fn write_varint(mut v: u64, out: &mut Vec<u8>) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

fn read_varint(input: &mut &[u8]) -> Result<u64, ExactError> {
    let mut v = 0u64;
    let mut shift = 0;
    loop {
        let (&b, rest) = input.split_first().ok_or(ExactError::MalformedKey)?;
        *input = rest;
        if shift >= 64 {
            return Err(ExactError::MalformedKey);
        }
        v |= ((b & 0x7f) as u64) << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
        shift += 7;
    }
}

fn encode_rational(r: &Rational, out: &mut Vec<u8>) {
    match r.as_small() {
        Some((n, d)) => {
            out.push(0);
            write_varint(zigzag(n), out);
            write_varint(d as u64, out);
        }
        None => {
            out.push(1);
            for part in [r.numer(), r.denom()] {
                let (sign, bytes) = part.to_bytes_le();
                out.push(matches!(sign, Sign::Minus) as u8);
                write_varint(bytes.len() as u64, out);
                out.extend_from_slice(&bytes);
            }
        }
    }
}

fn decode_rational(input: &mut &[u8]) -> Result<Rational, ExactError> {
    let (&tag, rest) = input.split_first().ok_or(ExactError::MalformedKey)?;
    *input = rest;
    match tag {
        0 => {
            let n = unzigzag(read_varint(input)?);
            let d = read_varint(input)? as i64;
            if d <= 0 {
                return Err(ExactError::MalformedKey);
            }
            Ok(Rational::new(n, d))
        }
        1 => {
            let mut parts = Vec::with_capacity(2);
            for _ in 0..2 {
                let (&neg, rest) = input.split_first().ok_or(ExactError::MalformedKey)?;
                *input = rest;
                let len = read_varint(input)? as usize;
                if input.len() < len {
                    return Err(ExactError::MalformedKey);
                }
                let (bytes, rest) = input.split_at(len);
                *input = rest;
                let sign = if neg == 1 { Sign::Minus } else { Sign::Plus };
                parts.push(BigInt::from_bytes_le(sign, bytes));
            }
            let d = parts.pop().unwrap();
            let n = parts.pop().unwrap();
            Rational::checked_new(n, d).map_err(|_| ExactError::MalformedKey)
        }
        _ => Err(ExactError::MalformedKey),
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElement::Rational(x) => write!(f, "{x}"),
            FieldElement::Algebraic(x) => write!(f, "alg{x:?}"),
            FieldElement::Laurent(x) => write!(f, "laurent{x:?}"),
        }
    }
}
