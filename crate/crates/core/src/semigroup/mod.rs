//! Exact level-by-level enumeration of the distinct compositions `D_n` of an
//! IFS, with the convolution masses `μ_n`.
//!
//! A level is a list of classes sorted by canonical key. Expansion composes each
//! class with every generator on the right, then sorts the candidates by
//! `(key, word)` and merges runs of equal keys. The sort makes the result
//! independent of how the candidates were produced across threads.

mod growth;
mod relations;
mod separation;

pub use growth::{
    entropy_bounds, growth_series, theta_fekete, theta_from_relation, GrowthOptions, GrowthReport,
    ThetaRelation,
};
pub use relations::{find_relations, format_word, Relation, RelationFilter};
pub use separation::{separation_stats, SeparationStat};

use rayon::prelude::*;
use thiserror::Error;

use crate::exactalg::{ExactError, Rational};
use crate::ifs::{AffineMap, IFSystem};

/// Default cap on the number of classes in a level.
pub const DEFAULT_BUDGET: usize = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpandError {
    #[error("level {level} would hold {classes} classes, over the budget of {budget}")]
    Budget { level: usize, classes: usize, budget: usize },
    #[error("enumeration supports at most 255 maps, got {0}")]
    TooManyMaps(usize),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// One element of `D_n`: its canonical key, exact mass and the lexicographically
/// smallest word (0-based letters) composing to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Class {
    pub key: Box<[u8]>,
    pub mass: Rational,
    pub witness: Box<[u8]>,
}

/// Words of one class that were produced as one-letter extensions of the previous
/// level's witnesses, smallest first. Only collected when requested.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collision {
    pub words: Vec<Box<[u8]>>,
}

#[derive(Clone, Debug)]
pub struct SemigroupLevel {
    pub n: usize,
    pub classes: Vec<Class>,
    pub collisions: Vec<Collision>,
}

impl SemigroupLevel {
    /// Level 0: the identity with mass 1.
    pub fn root(system: &IFSystem) -> Self {
        let id = AffineMap::identity(system.field(), system.dim());
        let mut key = Vec::new();
        id.encode(system.field(), &mut key);
        SemigroupLevel {
            n: 0,
            classes: vec![Class {
                key: key.into_boxed_slice(),
                mass: Rational::one(),
                witness: Box::new([]),
            }],
            collisions: Vec::new(),
        }
    }

    pub fn d(&self) -> usize {
        self.classes.len()
    }

    pub fn total_mass(&self) -> Rational {
        self.classes.iter().map(|c| &c.mass).sum()
    }

    pub fn class_map(&self, system: &IFSystem, idx: usize) -> Result<AffineMap, ExactError> {
        AffineMap::decode(system.field(), system.dim(), &self.classes[idx].key)
    }

    /// `H_n = -Σ q log q` with a rigorous bound on its floating-point error.
    pub fn entropy(&self) -> (f64, f64) {
        entropy_of_masses(self.classes.iter().map(|c| &c.mass))
    }
}

/// Neumaier-compensated `-Σ q log q` and an error bound.
///
/// Each term carries relative error a few ulps from the conversion and `ln`; the
/// compensated sum adds `O(eps)` of the total. The bound `16·eps·(H + 1)` covers
/// both with margin, and `1e-300` per class absorbs subnormal masses.
pub(crate) fn entropy_of_masses<'a>(masses: impl Iterator<Item = &'a Rational>) -> (f64, f64) {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut count = 0usize;
    for q in masses {
        count += 1;
        if q.is_one() {
            continue;
        }
        let x = q.to_f64();
        let term = if x > 0.0 { -x * x.ln() } else { 0.0 };
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    let h = sum + comp;
    let err = 16.0 * f64::EPSILON * (h.abs() + 1.0) + count as f64 * 1e-300;
    (h, err)
}

struct Candidate {
    key: Box<[u8]>,
    parent: u32,
    letter: u8,
}

/// Computes level `n+1` from level `n`.
///
/// With `track` set, every class reached by more than one extension records the
/// contributing words in `collisions`.
pub fn expand_level(
    level: &SemigroupLevel,
    system: &IFSystem,
    budget: usize,
    track: bool,
) -> Result<SemigroupLevel, ExpandError> {
    let m = system.m();
    if m > 255 {
        return Err(ExpandError::TooManyMaps(m));
    }
    let field = system.field();
    let maps = system.maps();
    let mut cands: Vec<Candidate> = (0..level.classes.len())
        .into_par_iter()
        .map(|pi| -> Result<Vec<Candidate>, ExactError> {
            let g = level.class_map(system, pi)?;
            let mut out = Vec::with_capacity(m);
            for (i, f) in maps.iter().enumerate() {
                let h = g.compose(f, field)?;
                let mut key = Vec::new();
                h.encode(field, &mut key);
                out.push(Candidate { key: key.into_boxed_slice(), parent: pi as u32, letter: i as u8 });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();

    let word_cmp = |a: &Candidate, b: &Candidate| {
        let wa = &level.classes[a.parent as usize].witness;
        let wb = &level.classes[b.parent as usize].witness;
        wa.cmp(wb).then(a.letter.cmp(&b.letter))
    };
    cands.par_sort_unstable_by(|a, b| a.key.cmp(&b.key).then_with(|| word_cmp(a, b)));

    let word_of = |c: &Candidate| -> Box<[u8]> {
        let w = &level.classes[c.parent as usize].witness;
        let mut v = Vec::with_capacity(w.len() + 1);
        v.extend_from_slice(w);
        v.push(c.letter);
        v.into_boxed_slice()
    };
    let probs = system.probabilities();
    let mut classes: Vec<Class> = Vec::new();
    let mut collisions = Vec::new();
    let mut start = 0;
    while start < cands.len() {
        let mut end = start + 1;
        while end < cands.len() && cands[end].key == cands[start].key {
            end += 1;
        }
        let mut mass = Rational::zero();
        for c in &cands[start..end] {
            mass += &(&level.classes[c.parent as usize].mass * &probs[c.letter as usize]);
        }
        if track && end - start > 1 {
            collisions.push(Collision { words: cands[start..end].iter().map(word_of).collect() });
        }
        classes.push(Class {
            key: std::mem::take(&mut cands[start].key),
            mass,
            witness: word_of(&cands[start]),
        });
        if classes.len() > budget {
            return Err(ExpandError::Budget { level: level.n + 1, classes: classes.len(), budget });
        }
        start = end;
    }
    Ok(SemigroupLevel { n: level.n + 1, classes, collisions })
}
