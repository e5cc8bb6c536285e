use serde::{Deserialize, Serialize};

use super::{ExpandError, SemigroupLevel};
use crate::exactalg::{ExactError, FieldElement, FieldMode, Interval};
use crate::ifs::{AffineMap, IFSystem};

/// Largest precision tried when two images cannot be separated.
const MAX_BITS: u32 = 2048;

/// Gap statistics for the images `g(0)` of the classes of one level (d = 1).
///
/// Images are first enclosed in `f64` intervals; pairs whose enclosures overlap
/// are re-evaluated from `precision` bits upward, doubling until separated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationStat {
    pub n: usize,
    pub classes: usize,
    /// Enclosure of the smallest gap between distinct images.
    pub min_gap: Interval,
    /// `exp(n χ)`.
    pub gamma_power: f64,
    /// `min_gap / γ^n`, using the lower end of the gap.
    pub constant: f64,
    /// Classes whose image coincides exactly with another class's image.
    pub coincident_images: usize,
    /// Adjacent pairs that stayed unresolved at the maximal precision.
    pub unresolved_pairs: usize,
    pub precision: u32,
}

/// Minimal gap between the distinct translation parts of a level.
///
/// Gaps are normalised by `γ^n = exp(nχ)`; without `chi` the constant is NaN.
pub fn separation_stats(
    level: &SemigroupLevel,
    system: &IFSystem,
    bits: u32,
    chi: Option<f64>,
) -> Result<SeparationStat, ExpandError> {
    if system.dim() != 1 {
        return Err(ExpandError::Exact(ExactError::InvalidInput(
            "separation statistics need a one-dimensional system".into(),
        )));
    }
    let field = system.field();
    let translations: Vec<FieldElement> = (0..level.d())
        .map(|i| -> Result<FieldElement, ExactError> {
            let g: AffineMap = level.class_map(system, i)?;
            Ok(g.translation()[0].clone())
        })
        .collect::<Result<_, _>>()?;
    let eval = |e: &FieldElement, b: u32| -> Result<Interval, ExactError> {
        Ok(field.eval_interval(e, b)?.to_interval())
    };
    let mut items: Vec<(Interval, usize)> = translations
        .iter()
        .enumerate()
        .map(|(i, t)| (field.to_interval(t), i))
        .collect();
    items.sort_by(|a, b| a.0.mid().total_cmp(&b.0.mid()).then(a.1.cmp(&b.1)));

    let mut min_gap: Option<Interval> = None;
    let mut coincident = 0;
    let mut unresolved = 0;
    let mut used = 53;
    for w in items.windows(2) {
        let (a, ia) = w[0];
        let (b, ib) = w[1];
        let mut gap = Interval::new(b.lo - a.hi, b.hi - a.lo);
        if gap.lo <= 0.0 {
            if translations[ia] == translations[ib] {
                coincident += 1;
                continue;
            }
            let mut resolved = false;
            if field.mode() != FieldMode::Formal {
                let mut p = bits;
                while p <= MAX_BITS {
                    let (a2, b2) = (eval(&translations[ia], p)?, eval(&translations[ib], p)?);
                    let diff = if a2.mid() <= b2.mid() {
                        Interval::new(b2.lo - a2.hi, b2.hi - a2.lo)
                    } else {
                        Interval::new(a2.lo - b2.hi, a2.hi - b2.lo)
                    };
                    used = used.max(p);
                    if diff.lo > 0.0 {
                        gap = diff;
                        resolved = true;
                        break;
                    }
                    p *= 2;
                }
            }
            if !resolved {
                unresolved += 1;
                gap = Interval::new(0.0, gap.hi.max(0.0));
            }
        }
        min_gap = Some(match min_gap {
            None => gap,
            Some(g) => g.min(&gap),
        });
    }
    let min_gap = min_gap.unwrap_or(Interval::point(f64::INFINITY));
    let gamma_power = chi.map_or(f64::NAN, |c| (c * level.n as f64).exp());
    Ok(SeparationStat {
        n: level.n,
        classes: level.d(),
        min_gap,
        gamma_power,
        constant: min_gap.lo / gamma_power,
        coincident_images: coincident,
        unresolved_pairs: unresolved,
        precision: used,
    })
}
