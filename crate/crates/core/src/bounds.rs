//! Dimension bounds for the stationary measure and the singularity verdict.
//!
//! With `χ < 0` the Lyapunov exponent, `h = Σ p_i log p_i`, `θ` the growth rate
//! of the semigroup and `H_μ log θ = lim H_n/n`:
//!
//! * entropy bound: `dim ≤ H_μ log θ / |χ|`
//! * non-free bound: `dim ≤ |h| log θ / (|χ| log m)`
//! * basic bound: `dim ≤ |h| / |χ|`
//!
//! Every division rounds toward the larger bound.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{FieldMode, Interval, Irreducibility};
use crate::ifs::{ContractionStatus, LyapunovEstimate, LyapunovKind};
use crate::semigroup::GrowthReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("Lyapunov exponent is not certified negative (upper end {0})")]
    ChiNotNegative(f64),
    #[error("the non-free bound needs at least two maps")]
    SingleMap,
}

/// Where a number came from; anything other than `Exact` blocks certification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    MonteCarlo,
    Heuristic,
    ConditionalIrreducibility,
    FormalShadow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub provenance: Vec<Provenance>,
}

impl Bound {
    pub fn certified(&self) -> bool {
        self.provenance.iter().all(|p| *p == Provenance::Exact)
    }
}

fn abs_chi(chi: Interval) -> Result<Interval, BoundError> {
    if chi.hi < 0.0 {
        Ok(-chi)
    } else {
        Err(BoundError::ChiNotNegative(chi.hi))
    }
}

/// `hmu_logtheta_upper / |χ|`, rounded up.
pub fn bound_thm2(hmu_logtheta_upper: f64, chi: Interval) -> Result<f64, BoundError> {
    let c = abs_chi(chi)?;
    if hmu_logtheta_upper <= 0.0 {
        return Ok(0.0);
    }
    Ok((Interval::point(hmu_logtheta_upper) / c).hi)
}

/// `|h| log θ / (|χ| log m)`, rounded up.
pub fn bound_cor_nonfree(h: Interval, theta_upper: f64, chi: Interval, m: usize) -> Result<f64, BoundError> {
    let c = abs_chi(chi)?;
    if m < 2 {
        return Err(BoundError::SingleMap);
    }
    if theta_upper <= 1.0 {
        return Ok(0.0);
    }
    let num = h.abs() * Interval::point(theta_upper).ln();
    let den = c * Interval::point(m as f64).ln();
    Ok((num / den).hi)
}

/// `|h| / |χ|`, rounded up, and whether it is below `d`.
pub fn bound_cor1(h: Interval, chi: Interval, d: usize) -> Result<(f64, bool), BoundError> {
    let c = abs_chi(chi)?;
    let v = (h.abs() / c).hi;
    Ok((v, v < d as f64))
}

/// Inputs gathered by the analysis pipeline.
#[derive(Clone, Debug)]
pub struct VerdictInputs<'a> {
    pub dim: usize,
    pub m: usize,
    pub h: Interval,
    pub chi: &'a LyapunovEstimate,
    pub contraction: ContractionStatus,
    pub growth: Option<&'a GrowthReport>,
    pub field_mode: FieldMode,
    pub irreducibility: Irreducibility,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionVerdict {
    pub dim: usize,
    pub chi: Interval,
    pub chi_kind: LyapunovKind,
    pub h: Interval,
    pub theta_upper: Option<f64>,
    pub theta_source: String,
    pub hmu_logtheta_upper: Option<f64>,
    pub bound_thm2: Option<Bound>,
    pub bound_cor_nonfree: Option<Bound>,
    /// Non-free bound with the relation-derived `θ`, when it improves on Fekete.
    pub bound_cor_nonfree_relation: Option<Bound>,
    pub bound_cor1: Option<Bound>,
    pub best_bound: Option<f64>,
    pub best_source: Option<String>,
    /// Smallest bound whose whole chain is exact.
    pub best_certified_bound: Option<f64>,
    pub singular_certified: bool,
    /// `best_bound < d` regardless of provenance.
    pub singular_evidence: bool,
    pub withheld: Option<String>,
    pub conditions: Vec<String>,
}

/// Combines the applicable bounds into a verdict.
pub fn assemble_verdict(inp: &VerdictInputs<'_>) -> DimensionVerdict {
    let chi = inp.chi.interval;
    let mut v = DimensionVerdict {
        dim: inp.dim,
        chi,
        chi_kind: inp.chi.kind,
        h: inp.h,
        theta_upper: None,
        theta_source: String::new(),
        hmu_logtheta_upper: None,
        bound_thm2: None,
        bound_cor_nonfree: None,
        bound_cor_nonfree_relation: None,
        bound_cor1: None,
        best_bound: None,
        best_source: None,
        best_certified_bound: None,
        singular_certified: false,
        singular_evidence: false,
        withheld: None,
        conditions: Vec::new(),
    };
    if inp.contraction == ContractionStatus::Fails || chi.hi >= 0.0 {
        v.withheld = Some(format!(
            "the system is not shown to contract on average (χ ∈ [{:.6}, {:.6}]); no dimension bound applies",
            chi.lo, chi.hi
        ));
        return v;
    }

    let mut chi_prov = vec![];
    match inp.chi.kind {
        LyapunovKind::Exact => {}
        LyapunovKind::MonteCarlo => {
            chi_prov.push(Provenance::MonteCarlo);
            v.conditions.push("χ is a Monte Carlo estimate: bounds are evidence only".into());
        }
    }
    if inp.field_mode == FieldMode::Formal {
        chi_prov.push(Provenance::FormalShadow);
        v.conditions.push("χ is evaluated at the numeric shadow of the formal λ".into());
    }
    let mut growth_prov = chi_prov.clone();
    if inp.irreducibility == Irreducibility::Conditional {
        growth_prov.push(Provenance::ConditionalIrreducibility);
        v.conditions.push("class counts assume the defining polynomial is irreducible".into());
    }

    let habs = inp.h.abs();
    let m = inp.m;
    let (hmu, theta, theta_source) = match inp.growth {
        Some(g) => {
            if let Some(k) = g.truncated_at {
                v.conditions.push(format!("enumeration truncated at level {k}; bounds use levels 1..{}", k - 1));
            }
            (g.hmu_logtheta_upper, g.theta_fekete, format!("fekete (level {})", g.theta_fekete_level))
        }
        None => {
            v.conditions.push("no enumeration: H_μ log θ ≤ |h| and θ ≤ m used".into());
            (habs.hi, m as f64, "number of maps".to_string())
        }
    };
    let prov_for_growth = if inp.growth.is_some() { growth_prov.clone() } else { chi_prov.clone() };
    let mk = |value: f64, prov: &[Provenance]| {
        let mut p = prov.to_vec();
        if p.is_empty() {
            p.push(Provenance::Exact);
        }
        p.sort();
        p.dedup();
        Bound { value, provenance: p }
    };

    v.hmu_logtheta_upper = Some(hmu);
    v.theta_upper = Some(theta);
    v.theta_source = theta_source;
    v.bound_thm2 = bound_thm2(hmu, chi).ok().map(|b| mk(b, &prov_for_growth));
    if m >= 2 {
        v.bound_cor_nonfree = bound_cor_nonfree(inp.h, theta, chi, m).ok().map(|b| mk(b, &prov_for_growth));
        if let Some(tr) = inp.growth.and_then(|g| g.theta_relation.as_ref()) {
            if tr.value < theta {
                let mut p = prov_for_growth.clone();
                p.push(Provenance::Heuristic);
                v.bound_cor_nonfree_relation =
                    bound_cor_nonfree(inp.h, tr.value, chi, m).ok().map(|b| mk(b, &p));
                v.conditions.push(format!(
                    "θ ≤ {:.6} from a relation of length {} is heuristic",
                    tr.value, tr.relation_length
                ));
            }
        }
    }
    v.bound_cor1 = bound_cor1(inp.h, chi, inp.dim).ok().map(|(b, _)| mk(b, &chi_prov));

    let named = [
        ("entropy", &v.bound_thm2),
        ("non-free", &v.bound_cor_nonfree),
        ("non-free (relation θ)", &v.bound_cor_nonfree_relation),
        ("basic", &v.bound_cor1),
    ];
    let mut best: Option<(f64, &str)> = None;
    let mut best_cert: Option<f64> = None;
    for (name, b) in named {
        if let Some(b) = b {
            if best.map_or(true, |(x, _)| b.value < x) {
                best = Some((b.value, name));
            }
            if b.certified() && best_cert.map_or(true, |x| b.value < x) {
                best_cert = Some(b.value);
            }
        }
    }
    let d = inp.dim as f64;
    v.best_bound = best.map(|b| b.0);
    v.best_source = best.map(|b| b.1.to_string());
    v.best_certified_bound = best_cert;
    v.singular_evidence = best.is_some_and(|b| b.0 < d);
    v.singular_certified = best_cert.is_some_and(|b| b < d);
    v
}

/// Checks `thm2 ≤ non-free ≤ basic` within a relative slack.
pub fn chain_holds(v: &DimensionVerdict, slack: f64) -> bool {
    let (Some(a), Some(b), Some(c)) = (&v.bound_thm2, &v.bound_cor_nonfree, &v.bound_cor1) else {
        return true;
    };
    let le = |x: f64, y: f64| x <= y * (1.0 + slack) + slack;
    le(a.value, b.value) && le(b.value, c.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn exact_chi(x: f64) -> LyapunovEstimate {
        LyapunovEstimate {
            value: x,
            interval: Interval::around(x, 2),
            kind: LyapunovKind::Exact,
            confidence_halfwidth: 0.0,
            word_length: None,
            trials: None,
            log_plus_clipped: None,
            label: "exact".into(),
        }
    }

    #[test]
    fn basic_bound_two_thirds() {
        let (b, sing) = bound_cor1(Interval::around(-LN2, 1), Interval::around(-1.5 * LN2, 1), 1).unwrap();
        assert!((b - 2.0 / 3.0).abs() < 1e-12);
        assert!(b >= 2.0 / 3.0);
        assert!(sing);
    }

    #[test]
    fn non_free_examples() {
        let h = Interval::around(-LN2, 1);
        let b = bound_cor_nonfree(h, 2.0, Interval::around(-4f64.ln(), 1), 2).unwrap();
        assert!((b - 0.5).abs() < 1e-12);
        let b = bound_cor_nonfree(h, 1.9277, Interval::around(-0.5 * 4f64.ln(), 1), 2).unwrap();
        assert!((b - 0.9469).abs() < 1e-3, "{b}");
        assert_eq!(bound_cor_nonfree(h, 2.0, Interval::around(-1.0, 1), 1), Err(BoundError::SingleMap));
    }

    #[test]
    fn thm2_zero_entropy() {
        assert_eq!(bound_thm2(0.0, Interval::around(-1.0, 1)).unwrap(), 0.0);
        assert!(bound_thm2(1.0, Interval::new(-0.1, 0.1)).is_err());
        let b = bound_thm2(LN2, Interval::around(-5f64.ln(), 1)).unwrap();
        assert!((b - LN2 / 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_blocks_certification() {
        let exact = exact_chi(-1.5 * LN2);
        let mut mc = exact.clone();
        mc.kind = LyapunovKind::MonteCarlo;
        let base = VerdictInputs {
            dim: 1,
            m: 2,
            h: Interval::around(-LN2, 1),
            chi: &exact,
            contraction: ContractionStatus::CertifiedExact,
            growth: None,
            field_mode: FieldMode::RationalOnly,
            irreducibility: Irreducibility::Certified,
        };
        let v1 = assemble_verdict(&base);
        assert!(v1.singular_certified);
        let v2 = assemble_verdict(&VerdictInputs { chi: &mc, ..base.clone() });
        assert!(!v2.singular_certified);
        assert!(v2.singular_evidence);
        assert_eq!(v1.best_bound, v2.best_bound);
    }

    #[test]
    fn failing_contraction_withholds() {
        let chi = exact_chi(LN2);
        let v = assemble_verdict(&VerdictInputs {
            dim: 1,
            m: 2,
            h: Interval::around(-LN2, 1),
            chi: &chi,
            contraction: ContractionStatus::Fails,
            growth: None,
            field_mode: FieldMode::RationalOnly,
            irreducibility: Irreducibility::Certified,
        });
        assert!(v.withheld.is_some());
        assert!(v.best_bound.is_none());
    }
}
