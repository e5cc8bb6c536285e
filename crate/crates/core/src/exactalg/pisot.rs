//! Certification that the generator of an algebraic field is a Pisot number.
//!
//! Approximate roots of the monic defining polynomial `m` are found with
//! Durand–Kerner. For approximations `z_1..z_n` the companion-like matrix
//! `A = diag(z) - 1·wᵀ` with `w_i = m(z_i) / Π_{j≠i}(z_i - z_j)` has
//! characteristic polynomial `m`, so its Gershgorin discs
//! `D_i = {|z - (z_i - w_i)| ≤ Σ_{j≠i} |w_j|}` enclose the roots. The discs are
//! evaluated in exact Gaussian-rational arithmetic with upward-rounded radii,
//! and every certificate is a strict inequality between exact quantities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{FieldMode, Irreducibility, NumberField};
use super::poly::Poly;
use super::rational::Rational;
use super::ExactError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PisotStatus {
    Yes,
    No,
    Inconclusive,
}

/// A closed disc in the complex plane, reported in `f64`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexDisc {
    pub re: f64,
    pub im: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PisotReport {
    pub status: PisotStatus,
    /// Enclosing discs for the conjugates other than `λ`.
    pub conjugates: Vec<ComplexDisc>,
    /// Upper bound on the largest conjugate modulus (`None` when unavailable).
    pub max_conjugate_modulus: Option<f64>,
    pub precision: u32,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
struct Gauss {
    re: Rational,
    im: Rational,
}

impl Gauss {
    fn new(re: Rational, im: Rational) -> Self {
        Gauss { re, im }
    }

    fn real(re: Rational) -> Self {
        Gauss { re, im: Rational::zero() }
    }

    fn add(&self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re + &o.re, &self.im + &o.im)
    }

    fn sub(&self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re - &o.re, &self.im - &o.im)
    }

    fn mul(&self, o: &Gauss) -> Gauss {
        Gauss::new(
            &(&self.re * &o.re) - &(&self.im * &o.im),
            &(&self.re * &o.im) + &(&self.im * &o.re),
        )
    }

    fn norm2(&self) -> Rational {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    fn div(&self, o: &Gauss) -> Result<Gauss, ExactError> {
        let n = o.norm2();
        let conj = Gauss::new(o.re.clone(), -&o.im);
        let p = self.mul(&conj);
        Ok(Gauss::new((&p.re / &n)?, (&p.im / &n)?))
    }

    fn round(&self, bits: u32) -> Gauss {
        Gauss::new(self.re.round_dyadic(bits, false), self.im.round_dyadic(bits, false))
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// Upper bound on `sqrt(x)` for rational `x ≥ 0`, as an exact rational.
fn sqrt_up(x: &Rational) -> Rational {
    let s = x.to_f64_up().sqrt().next_up();
    Rational::from_f64(s).unwrap_or_else(|| Rational::from_int(i64::MAX))
}

fn eval_gauss(p: &Poly, z: &Gauss) -> Gauss {
    p.coeffs()
        .iter()
        .rev()
        .fold(Gauss::real(Rational::zero()), |acc, c| acc.mul(z).add(&Gauss::real(c.clone())))
}

fn durand_kerner(p: &Poly) -> Vec<Complex64> {
    let coeffs: Vec<f64> = p.coeffs().iter().map(Rational::to_f64).collect();
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let bound = p.cauchy_bound().to_f64();
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * bound.min(2.0)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(1e-12, 1e-12);
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-16 * bound.max(1.0) {
            break;
        }
    }
    // Newton polish in f64
    let dp: Vec<f64> = p.derivative().coeffs().iter().map(Rational::to_f64).collect();
    let deval = |z: Complex64| dp.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let d = deval(*zi);
            if d.norm() > 0.0 {
                *zi -= eval(*zi) / d;
            }
        }
    }
    z
}

/// Decides whether `λ` is a Pisot number.
///
/// Returns `Yes` only when every conjugate disc is certified strictly inside the
/// unit disc and `λ > 1`; `No` when `λ ≤ 1`, `λ` is not an algebraic integer, or a
/// conjugate disc lies entirely on or outside the unit circle; otherwise
/// `Inconclusive`. A `No` that relies on a polynomial whose irreducibility is only
/// conditional is downgraded to `Inconclusive`.
pub fn pisot_certify(field: &NumberField, precision: u32) -> Result<PisotReport, ExactError> {
    let report = |status, reason: &str| PisotReport {
        status,
        conjugates: Vec::new(),
        max_conjugate_modulus: None,
        precision,
        reason: reason.to_string(),
    };
    match field.mode() {
        FieldMode::RationalOnly => return Ok(report(PisotStatus::Inconclusive, "rational field has no generator")),
        FieldMode::Formal => return Ok(report(PisotStatus::No, "formal generator is transcendental")),
        FieldMode::Algebraic => {}
    }
    let m = field.min_poly().expect("algebraic").clone();
    let conditional = field.irreducibility() == Irreducibility::Conditional;
    let iso = field.lambda_interval(precision.max(64)).expect("algebraic");
    if iso.hi <= Rational::one() {
        return Ok(report(PisotStatus::No, "λ ≤ 1"));
    }
    let lead = m.leading();
    if !(lead.is_one() || (-&lead).is_one()) {
        let status = if conditional { PisotStatus::Inconclusive } else { PisotStatus::No };
        return Ok(report(status, "λ is not an algebraic integer"));
    }
    let monic = m.monic();
    let n = monic.degree().unwrap_or(0);
    if n == 1 {
        return Ok(PisotReport {
            status: if iso.lo > Rational::one() { PisotStatus::Yes } else { PisotStatus::No },
            conjugates: Vec::new(),
            max_conjugate_modulus: Some(0.0),
            precision,
            reason: "integer generator".into(),
        });
    }

    let bits = precision.max(53);
    let mut z: Vec<Gauss> = durand_kerner(&monic)
        .into_iter()
        .map(|c| {
            Gauss::new(
                Rational::from_f64(c.re).unwrap_or_default(),
                Rational::from_f64(c.im).unwrap_or_default(),
            )
            .round(bits)
        })
        .collect();
    if bits > 53 {
        let dm = monic.derivative();
        for _ in 0..(bits / 50 + 1) {
            for zi in z.iter_mut() {
                let d = eval_gauss(&dm, zi);
                if d.norm2().is_zero() {
                    continue;
                }
                *zi = zi.sub(&eval_gauss(&monic, zi).div(&d)?).round(bits);
            }
        }
    }

    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let mut denom = Gauss::real(Rational::one());
        for j in 0..n {
            if i != j {
                denom = denom.mul(&z[i].sub(&z[j]));
            }
        }
        if denom.norm2().is_zero() {
            return Ok(report(PisotStatus::Inconclusive, "root approximations collided"));
        }
        w.push(eval_gauss(&monic, &z[i]).div(&denom)?);
    }
    let abs_w: Vec<Rational> = w.iter().map(|wi| sqrt_up(&wi.norm2())).collect();
    let total: Rational = abs_w.iter().sum();
    let centers: Vec<Gauss> = z.iter().zip(&w).map(|(zi, wi)| zi.sub(wi)).collect();
    let radii: Vec<Rational> = abs_w.iter().map(|a| &total - a).collect();

    for i in 0..n {
        for j in (i + 1)..n {
            let gap2 = centers[i].sub(&centers[j]).norm2();
            let r = &radii[i] + &radii[j];
            if gap2 <= &r * &r {
                return Ok(report(PisotStatus::Inconclusive, "enclosing discs overlap"));
            }
        }
    }

    // λ lies in its isolating segment, so it belongs to the only disc meeting it
    let meets = |c: &Gauss, r: &Rational| {
        let x = std::cmp::min(std::cmp::max(c.re.clone(), iso.lo.clone()), iso.hi.clone());
        Gauss::real(x).sub(c).norm2() <= r * r
    };
    let hits: Vec<usize> = (0..n).filter(|&i| meets(&centers[i], &radii[i])).collect();
    let lam_idx = match hits.as_slice() {
        [i] => *i,
        _ => return Ok(report(PisotStatus::Inconclusive, "could not locate λ among the discs")),
    };

    let one = Rational::one();
    let mut status = PisotStatus::Yes;
    let mut conjugates = Vec::new();
    let mut max_mod = 0.0f64;
    for i in (0..n).filter(|&i| i != lam_idx) {
        let c2 = centers[i].norm2();
        let r = &radii[i];
        let strictly_inside = *r < one && c2 < (&one - r) * (&one - r);
        let outside = c2 >= (&one + r) * (&one + r);
        let cf = centers[i].to_c64();
        let rf = r.to_f64_up();
        max_mod = max_mod.max(sqrt_up(&c2).to_f64_up() + rf);
        conjugates.push(ComplexDisc { re: cf.re, im: cf.im, radius: rf });
        if outside {
            status = PisotStatus::No;
        } else if !strictly_inside && status == PisotStatus::Yes {
            status = PisotStatus::Inconclusive;
        }
    }
    if status == PisotStatus::No && conditional {
        status = PisotStatus::Inconclusive;
    }
    let reason = match status {
        PisotStatus::Yes => "all conjugate discs inside the unit disc",
        PisotStatus::No => "a conjugate lies on or outside the unit circle",
        PisotStatus::Inconclusive => "a conjugate disc meets the unit circle",
    };
    Ok(PisotReport {
        status,
        conjugates,
        max_conjugate_modulus: Some(max_mod),
        precision,
        reason: reason.into(),
    })
}
