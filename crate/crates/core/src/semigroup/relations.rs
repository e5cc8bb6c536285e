use serde::{Deserialize, Serialize};

use super::{expand_level, ExpandError, SemigroupLevel};
use crate::exactalg::ExactError;
use crate::ifs::IFSystem;

/// Two distinct words of equal length composing to the same map. Letters are
/// 1-based; `left < right` lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub level: usize,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Relation {
    /// Re-checks the relation by composing both words from scratch.
    pub fn verify(&self, system: &IFSystem) -> Result<bool, ExactError> {
        let zero_based = |w: &[usize]| w.iter().map(|&x| x - 1).collect::<Vec<_>>();
        let a = system.compose_word(&zero_based(&self.left))?;
        let b = system.compose_word(&zero_based(&self.right))?;
        Ok(a == b && self.left != self.right)
    }
}

/// Words as comma-separated 1-based letters, e.g. `1,2,1,2,1`.
pub fn format_word(word: &[usize]) -> String {
    word.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn contains_factor(word: &[u8], factor: &[u8]) -> bool {
    factor.len() <= word.len() && word.windows(factor.len()).any(|w| w == factor)
}

/// Accumulates relations level by level with a syntactic independence filter:
/// a pair is kept only if neither word contains a side of a relation reported at
/// an earlier level. The smallest pair of every level is always kept.
#[derive(Clone, Debug)]
pub struct RelationFilter {
    max_per_level: usize,
    sides: Vec<Box<[u8]>>,
    relations: Vec<Relation>,
}

impl RelationFilter {
    pub fn new(max_per_level: usize) -> Self {
        RelationFilter { max_per_level, sides: Vec::new(), relations: Vec::new() }
    }

    pub fn absorb(&mut self, level: &SemigroupLevel) {
        let mut pairs: Vec<(&[u8], &[u8])> = level
            .collisions
            .iter()
            .flat_map(|c| c.words[1..].iter().map(move |w| (&*c.words[0], &**w)))
            .collect();
        pairs.sort();
        let mut kept = Vec::new();
        for (k, (a, b)) in pairs.into_iter().enumerate() {
            if kept.len() >= self.max_per_level {
                break;
            }
            let blocked = self.sides.iter().any(|s| contains_factor(a, s) || contains_factor(b, s));
            if k == 0 || !blocked {
                kept.push((a, b));
            }
        }
        for (a, b) in kept {
            let one_based = |w: &[u8]| w.iter().map(|&x| x as usize + 1).collect::<Vec<_>>();
            self.relations.push(Relation { level: level.n, left: one_based(a), right: one_based(b) });
            self.sides.push(a.into());
            self.sides.push(b.into());
        }
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn into_relations(self) -> Vec<Relation> {
        self.relations
    }
}

/// Relations among words of length at most `depth`.
pub fn find_relations(
    system: &IFSystem,
    depth: usize,
    max_report: usize,
    budget: usize,
) -> Result<(Vec<Relation>, Option<usize>), ExpandError> {
    let mut filter = RelationFilter::new(max_report);
    let mut level = SemigroupLevel::root(system);
    for _ in 0..depth {
        level = match expand_level(&level, system, budget, true) {
            Ok(l) => l,
            Err(ExpandError::Budget { level, .. }) => return Ok((filter.into_relations(), Some(level))),
            Err(e) => return Err(e),
        };
        filter.absorb(&level);
    }
    Ok((filter.into_relations(), None))
}
