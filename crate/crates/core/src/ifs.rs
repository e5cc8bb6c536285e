//! Affine iterated function systems: validation, entropy of the probability
//! vector, and the Lyapunov exponent (exact for conformal systems, Monte Carlo
//! otherwise).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{ExactError, FieldElement, Interval, NumberField, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IfsError {
    #[error("probabilities must sum to 1 exactly, got {0}")]
    ProbabilitySum(Rational),
    #[error("probability p_{index} = {value} is not positive")]
    NonPositiveProbability { index: usize, value: Rational },
    #[error("{maps} maps but {probs} probabilities")]
    CountMismatch { maps: usize, probs: usize },
    #[error("system has no maps")]
    Empty,
    #[error("map {index}: {reason}")]
    Shape { index: usize, reason: String },
    #[error("map {0} has zero linear part")]
    ZeroLinear(usize),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// `x ↦ A x + b` with entries in a [`NumberField`]; `linear` is row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    dim: usize,
    linear: Vec<FieldElement>,
    translation: Vec<FieldElement>,
}

impl AffineMap {
    pub fn new(
        linear: Vec<Vec<FieldElement>>,
        translation: Vec<FieldElement>,
    ) -> Result<Self, String> {
        let dim = translation.len();
        if dim == 0 {
            return Err("dimension must be positive".into());
        }
        if linear.len() != dim || linear.iter().any(|row| row.len() != dim) {
            return Err(format!("linear part must be {dim}×{dim} to match the translation"));
        }
        Ok(AffineMap {
            dim,
            linear: linear.into_iter().flatten().collect(),
            translation,
        })
    }

    /// One-dimensional map `x ↦ a x + b`.
    pub fn scalar(a: FieldElement, b: FieldElement) -> Self {
        AffineMap { dim: 1, linear: vec![a], translation: vec![b] }
    }

    pub fn identity(field: &NumberField, dim: usize) -> Self {
        let linear = (0..dim * dim)
            .map(|k| if k % (dim + 1) == 0 { field.one() } else { field.zero() })
            .collect();
        AffineMap { dim, linear, translation: vec![field.zero(); dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &FieldElement {
        &self.linear[i * self.dim + j]
    }

    pub fn linear(&self) -> &[FieldElement] {
        &self.linear
    }

    pub fn translation(&self) -> &[FieldElement] {
        &self.translation
    }

    /// `self ∘ other`, i.e. `(A₁A₂, A₁b₂ + b₁)`.
    pub fn compose(&self, other: &AffineMap, field: &NumberField) -> Result<AffineMap, ExactError> {
        let d = self.dim;
        if d == 1 {
            let a = field.mul(&self.linear[0], &other.linear[0])?;
            let b = field.add(&field.mul(&self.linear[0], &other.translation[0])?, &self.translation[0])?;
            return Ok(AffineMap { dim: 1, linear: vec![a], translation: vec![b] });
        }
        let mut linear = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = field.zero();
                for k in 0..d {
                    acc = field.add(&acc, &field.mul(self.entry(i, k), other.entry(k, j))?)?;
                }
                linear.push(acc);
            }
        }
        let mut translation = Vec::with_capacity(d);
        for i in 0..d {
            let mut acc = self.translation[i].clone();
            for k in 0..d {
                acc = field.add(&acc, &field.mul(self.entry(i, k), &other.translation[k])?)?;
            }
            translation.push(acc);
        }
        Ok(AffineMap { dim: d, linear, translation })
    }

    /// Canonical byte key; equal keys ⇔ equal maps.
    pub fn encode(&self, field: &NumberField, out: &mut Vec<u8>) {
        for e in self.linear.iter().chain(&self.translation) {
            field.encode(e, out);
        }
    }

    pub fn decode(field: &NumberField, dim: usize, mut bytes: &[u8]) -> Result<AffineMap, ExactError> {
        let mut linear = Vec::with_capacity(dim * dim);
        for _ in 0..dim * dim {
            linear.push(field.decode(&mut bytes)?);
        }
        let mut translation = Vec::with_capacity(dim);
        for _ in 0..dim {
            translation.push(field.decode(&mut bytes)?);
        }
        if !bytes.is_empty() {
            return Err(ExactError::MalformedKey);
        }
        Ok(AffineMap { dim, linear, translation })
    }

    /// If `AᵀA = c·I`, returns `c`.
    pub fn conformal_factor(&self, field: &NumberField) -> Result<Option<FieldElement>, ExactError> {
        let d = self.dim;
        if d == 1 {
            return Ok(Some(field.mul(&self.linear[0], &self.linear[0])?));
        }
        let mut c = None;
        for i in 0..d {
            for j in i..d {
                let mut acc = field.zero();
                for k in 0..d {
                    acc = field.add(&acc, &field.mul(self.entry(k, i), self.entry(k, j))?)?;
                }
                if i == j {
                    match &c {
                        None => c = Some(acc),
                        Some(c0) if *c0 == acc => {}
                        Some(_) => return Ok(None),
                    }
                } else if !field.is_zero(&acc) {
                    return Ok(None);
                }
            }
        }
        Ok(c)
    }

    pub fn determinant(&self, field: &NumberField) -> Result<FieldElement, ExactError> {
        let rows: Vec<Vec<FieldElement>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.entry(i, j).clone()).collect())
            .collect();
        det(&rows, field)
    }

    pub fn is_zero_linear(&self, field: &NumberField) -> bool {
        self.linear.iter().all(|e| field.is_zero(e))
    }

    pub fn to_numeric(&self, field: &NumberField) -> NumericMap {
        NumericMap {
            dim: self.dim,
            linear: self.linear.iter().map(|e| field.to_f64(e)).collect(),
            translation: self.translation.iter().map(|e| field.to_f64(e)).collect(),
        }
    }
}

fn det(rows: &[Vec<FieldElement>], field: &NumberField) -> Result<FieldElement, ExactError> {
    let n = rows.len();
    if n == 1 {
        return Ok(rows[0][0].clone());
    }
    let mut acc = field.zero();
    for (j, a) in rows[0].iter().enumerate() {
        if field.is_zero(a) {
            continue;
        }
        let minor: Vec<Vec<FieldElement>> = rows[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, e)| e.clone()).collect())
            .collect();
        let term = field.mul(a, &det(&minor, field)?)?;
        acc = if j % 2 == 0 { field.add(&acc, &term)? } else { field.sub(&acc, &term)? };
    }
    Ok(acc)
}

/// Floating-point copy of an [`AffineMap`] for sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericMap {
    pub dim: usize,
    pub linear: Vec<f64>,
    pub translation: Vec<f64>,
}

impl NumericMap {
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            out[i] = self.translation[i] + (0..d).map(|k| self.linear[i * d + k] * x[k]).sum::<f64>();
        }
    }
}

/// Row-major product of two `d×d` matrices.
pub(crate) fn mat_mul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

/// Largest singular value of a row-major `d×d` matrix.
pub(crate) fn spectral_norm(m: &[f64], d: usize) -> f64 {
    match d {
        1 => m[0].abs(),
        2 => {
            let (a, b, c, e) = (m[0], m[1], m[2], m[3]);
            let s = a * a + b * b + c * c + e * e;
            let det = a * e - b * c;
            let disc = (s * s - 4.0 * det * det).max(0.0).sqrt();
            ((s + disc) / 2.0).sqrt()
        }
        _ => nalgebra::DMatrix::from_row_slice(d, d, m)
            .singular_values()
            .max(),
    }
}

/// The maps `f_i`, probabilities `p_i` and dimension `d` of an IFS.
#[derive(Clone, Debug)]
pub struct IFSystem {
    field: NumberField,
    maps: Vec<AffineMap>,
    probs: Vec<Rational>,
    dim: usize,
}

impl IFSystem {
    pub fn new(field: NumberField, maps: Vec<AffineMap>, probs: Vec<Rational>) -> Result<Self, IfsError> {
        if maps.is_empty() {
            return Err(IfsError::Empty);
        }
        if maps.len() != probs.len() {
            return Err(IfsError::CountMismatch { maps: maps.len(), probs: probs.len() });
        }
        let dim = maps[0].dim();
        for (index, f) in maps.iter().enumerate() {
            if f.dim() != dim {
                return Err(IfsError::Shape {
                    index,
                    reason: format!("dimension {} differs from {dim}", f.dim()),
                });
            }
            if f.is_zero_linear(&field) {
                return Err(IfsError::ZeroLinear(index));
            }
        }
        for (index, p) in probs.iter().enumerate() {
            if !p.is_positive() {
                return Err(IfsError::NonPositiveProbability { index: index + 1, value: p.clone() });
            }
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() {
            return Err(IfsError::ProbabilitySum(total));
        }
        Ok(IFSystem { field, maps, probs, dim })
    }

    /// Equal-probability system.
    pub fn uniform(field: NumberField, maps: Vec<AffineMap>) -> Result<Self, IfsError> {
        let m = maps.len().max(1) as i64;
        let probs = vec![Rational::new(1, m); maps.len()];
        IFSystem::new(field, maps, probs)
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn probabilities(&self) -> &[Rational] {
        &self.probs
    }

    pub fn m(&self) -> usize {
        self.maps.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_uniform(&self) -> bool {
        self.probs.iter().all(|p| *p == self.probs[0])
    }

    /// `f_{w_0} ∘ f_{w_1} ∘ … ∘ f_{w_{n-1}}` for 0-based letters.
    pub fn compose_word(&self, word: &[usize]) -> Result<AffineMap, ExactError> {
        let mut acc = AffineMap::identity(&self.field, self.dim);
        for &i in word {
            acc = acc.compose(&self.maps[i], &self.field)?;
        }
        Ok(acc)
    }

    pub fn numeric_maps(&self) -> Vec<NumericMap> {
        self.maps.iter().map(|f| f.to_numeric(&self.field)).collect()
    }

    pub(crate) fn letter_sampler(&self) -> LetterSampler {
        LetterSampler::new(&self.probs)
    }
}

/// Draws letters with probabilities `p_i` from a uniform `u64`.
#[derive(Clone, Debug)]
pub(crate) struct LetterSampler {
    cumulative: Vec<f64>,
}

impl LetterSampler {
    pub(crate) fn new(probs: &[Rational]) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p.to_f64();
                acc
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = f64::INFINITY;
        }
        LetterSampler { cumulative }
    }

    pub(crate) fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cumulative.iter().position(|&c| u < c).unwrap_or(0)
    }
}

/// Random generator for stream `stream` of `seed`; streams are independent, so
/// results do not depend on how work is split across threads.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractionStatus {
    /// `χ < 0` from the exact conformal formula.
    CertifiedExact,
    /// `Σ p_i log‖f_i‖ < 0` with rigorous norm upper bounds.
    CertifiedNormSum,
    Unverified,
    /// `χ ≥ 0` from the exact conformal formula.
    Fails,
}

impl ContractionStatus {
    pub fn is_certified(self) -> bool {
        matches!(self, ContractionStatus::CertifiedExact | ContractionStatus::CertifiedNormSum)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Enclosure of `Σ p_i log‖f_i‖` (upper end uses norm upper bounds).
    pub norm_log_sum: Interval,
    pub contraction: ContractionStatus,
    /// 1-based indices of maps with singular linear part.
    pub degenerate_maps: Vec<usize>,
    pub notes: Vec<String>,
}

/// Upper bound on `ln‖A‖₂` together with a lower bound where one is cheap.
fn log_norm_bounds(f: &AffineMap, field: &NumberField) -> Result<Interval, ExactError> {
    if let Some(c) = f.conformal_factor(field)? {
        return Ok(field.to_interval(&c).ln().scale(0.5));
    }
    let d = f.dim();
    let abs: Vec<f64> = f.linear().iter().map(|e| field.to_interval(e).abs().hi).collect();
    let row = (0..d).map(|i| (0..d).map(|j| abs[i * d + j]).sum::<f64>()).fold(0.0, f64::max);
    let col = (0..d).map(|j| (0..d).map(|i| abs[i * d + j]).sum::<f64>()).fold(0.0, f64::max);
    let frob2: f64 = abs.iter().map(|a| a * a).sum();
    let hi = Interval::around(row * col, 2).sqrt().hi.min(Interval::around(frob2, 2 * d as u32 * d as u32).sqrt().hi);
    let max_entry = abs.iter().cloned().fold(0.0, f64::max);
    // every entry is bounded by the operator norm; use a conservative floor when all lower bounds vanish
    let lo = f
        .linear()
        .iter()
        .map(|e| {
            let iv = field.to_interval(e);
            if iv.lo > 0.0 {
                iv.lo
            } else if iv.hi < 0.0 {
                -iv.hi
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    let lo = if lo > 0.0 { lo } else { max_entry * f64::EPSILON };
    Ok(Interval::new(lo.ln().next_down().next_down(), hi.ln().next_up().next_up()))
}

/// Checks contraction on average and flags degenerate maps.
pub fn validate(system: &IFSystem) -> Result<ValidationReport, IfsError> {
    let field = system.field();
    let mut sum = Interval::point(0.0);
    let mut degenerate = Vec::new();
    let mut notes = Vec::new();
    for (i, (f, p)) in system.maps().iter().zip(system.probabilities()).enumerate() {
        if field.is_zero(&f.determinant(field)?) {
            degenerate.push(i + 1);
        }
        sum = sum + Interval::from_rational(p) * log_norm_bounds(f, field)?;
    }
    if !degenerate.is_empty() {
        notes.push(format!("maps {degenerate:?} have singular linear parts (degenerate)"));
    }
    let contraction = match lyapunov_exact(system)? {
        Some(chi) if chi.interval.hi < 0.0 => ContractionStatus::CertifiedExact,
        Some(chi) if chi.interval.lo >= 0.0 => ContractionStatus::Fails,
        _ if sum.hi < 0.0 => ContractionStatus::CertifiedNormSum,
        _ => ContractionStatus::Unverified,
    };
    match contraction {
        ContractionStatus::Fails => notes.push("Lyapunov exponent is not negative: the system does not contract on average".into()),
        ContractionStatus::Unverified => notes.push("contraction on average could not be certified".into()),
        _ => {}
    }
    Ok(ValidationReport { norm_log_sum: sum, contraction, degenerate_maps: degenerate, notes })
}

/// `h(p̄) = Σ p_i log p_i` (non-positive).
pub fn entropy_h(probs: &[Rational]) -> Interval {
    let mut acc = Interval::point(0.0);
    for p in probs {
        if p.is_one() {
            continue;
        }
        let iv = Interval::from_rational(p);
        acc = acc + iv * iv.ln();
    }
    Interval::new(acc.lo, acc.hi.min(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LyapunovKind {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub value: f64,
    /// Rigorous enclosure (exact kind) or `value ± halfwidth` (Monte Carlo).
    pub interval: Interval,
    pub kind: LyapunovKind,
    pub confidence_halfwidth: f64,
    pub word_length: Option<usize>,
    pub trials: Option<usize>,
    /// Fraction of Monte Carlo words whose composed norm ended below 1, where `log⁺`
    /// would clip to 0.
    pub log_plus_clipped: Option<f64>,
    pub label: String,
}

/// `χ = Σ p_i · ½ log c_i` when every linear part satisfies `AᵀA = c_i I`.
pub fn lyapunov_exact(system: &IFSystem) -> Result<Option<LyapunovEstimate>, ExactError> {
    let field = system.field();
    let mut acc = Interval::point(0.0);
    for (f, p) in system.maps().iter().zip(system.probabilities()) {
        let c = match f.conformal_factor(field)? {
            Some(c) if !field.is_zero(&c) => c,
            _ => return Ok(None),
        };
        let civ = field.to_interval(&c);
        if civ.lo <= 0.0 {
            return Ok(None);
        }
        acc = acc + Interval::from_rational(p) * civ.ln().scale(0.5);
    }
    let label = match field.shadow_value() {
        Some(_) => "exact (conformal), evaluated at the formal shadow value".to_string(),
        None => "exact (conformal)".to_string(),
    };
    Ok(Some(LyapunovEstimate {
        value: acc.mid(),
        interval: acc,
        kind: LyapunovKind::Exact,
        confidence_halfwidth: 0.0,
        word_length: None,
        trials: None,
        log_plus_clipped: None,
        label,
    }))
}

/// Monte Carlo estimate of `χ` from `trials` random words of length `n`.
///
/// Trial `t` draws its letters from stream `t` of `seed`, so the estimate is
/// identical for any thread count.
pub fn lyapunov_mc(system: &IFSystem, n: usize, trials: usize, seed: u64) -> LyapunovEstimate {
    assert!(n >= 1 && trials >= 2, "need n ≥ 1 and at least two trials");
    let d = system.dim();
    let mats: Vec<Vec<f64>> = system.numeric_maps().into_iter().map(|m| m.linear).collect();
    let sampler = system.letter_sampler();
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            let mut prod = {
                let mut id = vec![0.0; d * d];
                for i in 0..d {
                    id[i * d + i] = 1.0;
                }
                id
            };
            let mut log_scale = 0.0;
            for _ in 0..n {
                let i = sampler.draw(&mut rng);
                prod = mat_mul(&prod, &mats[i], d);
                let s = prod.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                if s > 0.0 {
                    log_scale += s.ln();
                    prod.iter_mut().for_each(|x| *x /= s);
                } else {
                    return f64::NEG_INFINITY;
                }
            }
            (log_scale + spectral_norm(&prod, d).ln()) / n as f64
        })
        .collect();
    let t = trials as f64;
    let mean = samples.iter().sum::<f64>() / t;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (t - 1.0);
    let clipped = samples.iter().filter(|&&x| x < 0.0).count() as f64 / t;
    // a small allowance for rounding keeps the halfwidth positive
    let halfwidth = 1.96 * var.sqrt() / t.sqrt() + 1e-12 * (1.0 + mean.abs());
    LyapunovEstimate {
        value: mean,
        interval: Interval::new(mean - halfwidth, mean + halfwidth),
        kind: LyapunovKind::MonteCarlo,
        confidence_halfwidth: halfwidth,
        word_length: Some(n),
        trials: Some(trials),
        log_plus_clipped: Some(clipped),
        label: "monte-carlo, upper-bound-leaning estimate".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{LaurentPoly, Poly};

    fn q(n: i64, d: i64) -> FieldElement {
        FieldElement::Rational(Rational::new(n, d))
    }

    fn expanding_pair() -> IFSystem {
        IFSystem::uniform(
            NumberField::rational(),
            vec![AffineMap::scalar(q(2, 1), q(1, 1)), AffineMap::scalar(q(1, 16), q(1, 1))],
        )
        .unwrap()
    }

    #[test]
    fn expanding_pair_contracts_exactly() {
        let s = expanding_pair();
        let v = validate(&s).unwrap();
        assert_eq!(v.contraction, ContractionStatus::CertifiedExact);
        let expect = -1.5 * std::f64::consts::LN_2;
        assert!(v.norm_log_sum.contains(expect));
        let chi = lyapunov_exact(&s).unwrap().unwrap();
        assert!(chi.interval.contains(expect));
        assert!(chi.interval.width() < 1e-14);
    }

    #[test]
    fn doubling_maps_fail() {
        let s = IFSystem::uniform(
            NumberField::rational(),
            vec![AffineMap::scalar(q(2, 1), q(0, 1)), AffineMap::scalar(q(2, 1), q(1, 1))],
        )
        .unwrap();
        let v = validate(&s).unwrap();
        assert_eq!(v.contraction, ContractionStatus::Fails);
        assert!(v.norm_log_sum.contains(std::f64::consts::LN_2));
    }

    #[test]
    fn probability_errors() {
        let f = NumberField::rational();
        let maps = vec![AffineMap::scalar(q(1, 2), q(0, 1)), AffineMap::scalar(q(1, 2), q(1, 1))];
        let err = IFSystem::new(f.clone(), maps.clone(), vec![Rational::new(1, 2), Rational::new(1, 3)]);
        assert!(matches!(err, Err(IfsError::ProbabilitySum(_))));
        let err = IFSystem::new(f.clone(), maps.clone(), vec![Rational::one(), Rational::zero()]);
        assert!(matches!(err, Err(IfsError::NonPositiveProbability { index: 2, .. })));
        let zero = vec![AffineMap::scalar(q(0, 1), q(1, 1))];
        assert!(matches!(IFSystem::uniform(f, zero), Err(IfsError::ZeroLinear(0))));
    }

    #[test]
    fn entropy_values() {
        let ln2 = std::f64::consts::LN_2;
        assert!(entropy_h(&[Rational::new(1, 2), Rational::new(1, 2)]).contains(-ln2));
        assert_eq!(entropy_h(&[Rational::one()]).hi, 0.0);
        let h = entropy_h(&[Rational::new(1, 2), Rational::new(1, 4), Rational::new(1, 4)]);
        assert!(h.contains(-1.5 * ln2));
    }

    #[test]
    fn single_contraction_mc_is_exact() {
        let s = IFSystem::uniform(NumberField::rational(), vec![AffineMap::scalar(q(1, 2), q(0, 1))]).unwrap();
        let est = lyapunov_mc(&s, 64, 16, 1);
        assert!((est.value + std::f64::consts::LN_2).abs() < 1e-12);
        assert!(est.confidence_halfwidth > 0.0);
    }

    #[test]
    fn ababa_system_exact_chi() {
        let f = NumberField::algebraic(Poly::from_ints(&[-4, 1]), Rational::from_int(3), Rational::from_int(5)).unwrap();
        let lam = f.lambda().unwrap();
        let lam_m2 = f.reduce(&LaurentPoly::monomial(Rational::one(), -2)).unwrap();
        let s = IFSystem::uniform(
            f.clone(),
            vec![AffineMap::scalar(lam, f.one()), AffineMap::scalar(lam_m2, f.zero())],
        )
        .unwrap();
        let chi = lyapunov_exact(&s).unwrap().unwrap();
        assert!(chi.interval.contains(-0.5 * 4f64.ln()));
    }

    #[test]
    fn rotation_is_conformal_and_non_conformal_is_not() {
        let f = NumberField::rational();
        // (3/5, -4/5; 4/5, 3/5) scaled by 1/3
        let rot = AffineMap::new(
            vec![vec![q(1, 5), q(-4, 15)], vec![q(4, 15), q(1, 5)]],
            vec![q(0, 1), q(0, 1)],
        )
        .unwrap();
        assert_eq!(rot.conformal_factor(&f).unwrap(), Some(q(1, 9)));
        let shear = AffineMap::new(vec![vec![q(1, 2), q(1, 2)], vec![q(0, 1), q(1, 2)]], vec![q(0, 1), q(0, 1)]).unwrap();
        assert_eq!(shear.conformal_factor(&f).unwrap(), None);
        let s = IFSystem::uniform(f, vec![shear]).unwrap();
        let v = validate(&s).unwrap();
        assert_eq!(v.contraction, ContractionStatus::CertifiedNormSum);
        let mc = lyapunov_mc(&s, 256, 64, 3);
        // oracle: powers of a Jordan block grow polynomially, so χ = log(1/2)
        assert!((mc.value + std::f64::consts::LN_2).abs() < 0.05);
    }

    #[test]
    fn degenerate_map_is_flagged() {
        let f = NumberField::rational();
        let proj = AffineMap::new(vec![vec![q(1, 2), q(0, 1)], vec![q(0, 1), q(0, 1)]], vec![q(0, 1), q(1, 1)]).unwrap();
        let rot = AffineMap::new(vec![vec![q(1, 2), q(0, 1)], vec![q(0, 1), q(1, 2)]], vec![q(0, 1), q(0, 1)]).unwrap();
        let s = IFSystem::uniform(f, vec![proj, rot]).unwrap();
        let v = validate(&s).unwrap();
        assert_eq!(v.degenerate_maps, vec![1]);
    }

    #[test]
    fn key_roundtrip() {
        let s = expanding_pair();
        let g = s.compose_word(&[0, 1, 1, 0]).unwrap();
        let mut key = Vec::new();
        g.encode(s.field(), &mut key);
        assert_eq!(AffineMap::decode(s.field(), 1, &key).unwrap(), g);
    }

    #[test]
    fn word_lipschitz_is_product() {
        let s = expanding_pair();
        let g = s.compose_word(&[0, 0, 1, 0, 1]).unwrap();
        assert_eq!(g.linear()[0], q(2 * 2 * 2, 16 * 16));
    }
}
