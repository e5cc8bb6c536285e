use serde::{Deserialize, Serialize};

use super::relations::{RelationFilter, Relation};
use super::separation::{separation_stats, SeparationStat};
use super::{expand_level, ExpandError, SemigroupLevel};
use crate::exactalg::Interval;
use crate::ifs::IFSystem;

#[derive(Clone, Debug)]
pub struct GrowthOptions {
    pub depth: usize,
    pub budget: usize,
    /// Collect relations, reporting at most this many per level.
    pub relations: Option<usize>,
    /// Compute separation statistics at this precision (d = 1 only).
    pub separation_bits: Option<u32>,
    /// Lyapunov exponent used to scale separation gaps.
    pub chi: Option<f64>,
}

impl GrowthOptions {
    pub fn new(depth: usize) -> Self {
        GrowthOptions {
            depth,
            budget: super::DEFAULT_BUDGET,
            relations: None,
            separation_bits: None,
            chi: None,
        }
    }
}

/// `θ` bound derived from the shortest relation; heuristic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaRelation {
    pub relation_length: usize,
    pub value: f64,
    pub heuristic: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthReport {
    /// `d_1, …, d_N`.
    pub d: Vec<u64>,
    /// `H_1, …, H_N`.
    pub h: Vec<f64>,
    /// Absolute error bounds on `h`.
    pub h_err: Vec<f64>,
    pub theta_fekete: f64,
    pub theta_fekete_level: usize,
    pub theta_relation: Option<ThetaRelation>,
    pub hmu_logtheta_upper: f64,
    pub hmu_logtheta_level: usize,
    pub first_collision_level: Option<usize>,
    pub relations: Vec<Relation>,
    pub separation: Vec<SeparationStat>,
    /// Level at which the class budget was exceeded; all earlier levels are complete.
    pub truncated_at: Option<usize>,
}

impl GrowthReport {
    pub fn levels(&self) -> usize {
        self.d.len()
    }
}

/// Rigorous upper bound `min_n d_n^{1/n}` and the level attaining it.
pub fn theta_fekete(d: &[u64]) -> (f64, usize) {
    assert!(!d.is_empty(), "theta_fekete needs at least one level");
    d.iter()
        .enumerate()
        .map(|(k, &dn)| {
            let n = (k + 1) as f64;
            let v = if dn <= 1 {
                1.0
            } else {
                (Interval::point(dn as f64).ln() / Interval::point(n)).exp().hi
            };
            (v, k + 1)
        })
        .fold((f64::INFINITY, 0), |best, cur| if cur.0 < best.0 { cur } else { best })
}

/// Largest real root of `x^ℓ − m x^{ℓ−1} + 1`.
pub fn theta_from_relation(len: usize, m: usize) -> f64 {
    assert!(len >= 2 && m >= 2, "need ℓ ≥ 2 and m ≥ 2");
    let (l, mf) = (len as f64, m as f64);
    let g = |x: f64| x.powi(len as i32 - 1) * (x - mf) + 1.0;
    // g decreases then increases with its minimum at m(ℓ−1)/ℓ
    let mut lo = mf * (l - 1.0) / l;
    let mut hi = mf;
    if g(lo) > 0.0 {
        return hi;
    }
    if g(lo) == 0.0 {
        // double root at the minimum
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `(min_n (H_n + err_n)/n, argmin)`, rounded upward.
pub fn entropy_bounds(h: &[f64], err: &[f64]) -> (f64, usize) {
    h.iter()
        .zip(err)
        .enumerate()
        .map(|(k, (hn, e))| {
            let v = (Interval::around(hn + e, 1) / Interval::point((k + 1) as f64)).hi;
            (v.max(0.0), k + 1)
        })
        .fold((f64::INFINITY, 0), |best, cur| if cur.0 < best.0 { cur } else { best })
}

/// Enumerates levels `1..=depth`, stopping early if the budget is exceeded.
pub fn growth_series(system: &IFSystem, opts: &GrowthOptions) -> Result<GrowthReport, ExpandError> {
    let mut level = SemigroupLevel::root(system);
    let mut d = Vec::new();
    let mut h = Vec::new();
    let mut h_err = Vec::new();
    let mut first_collision = None;
    let mut filter = opts.relations.map(RelationFilter::new);
    let mut separation = Vec::new();
    let mut truncated_at = None;
    for n in 1..=opts.depth {
        let next = match expand_level(&level, system, opts.budget, filter.is_some()) {
            Ok(l) => l,
            Err(ExpandError::Budget { level, .. }) => {
                truncated_at = Some(level);
                break;
            }
            Err(e) => return Err(e),
        };
        level = next;
        debug_assert!(level.total_mass().is_one());
        if first_collision.is_none() && (level.d() as u64) < system.m() as u64 * d.last().copied().unwrap_or(1) {
            first_collision = Some(n);
        }
        d.push(level.d() as u64);
        let (hn, en) = level.entropy();
        h.push(hn);
        h_err.push(en);
        if let Some(f) = filter.as_mut() {
            f.absorb(&level);
        }
        if let (Some(bits), true) = (opts.separation_bits, system.dim() == 1) {
            separation.push(separation_stats(&level, system, bits, opts.chi)?);
        }
        level.collisions = Vec::new();
    }
    if d.is_empty() {
        d.push(system.m() as u64);
        h.push(f64::NAN);
        h_err.push(f64::NAN);
    }
    let (theta, theta_level) = theta_fekete(&d);
    let (hmu, hmu_level) = if h[0].is_nan() { (f64::INFINITY, 0) } else { entropy_bounds(&h, &h_err) };
    let relations = filter.map(RelationFilter::into_relations).unwrap_or_default();
    let theta_relation = match (first_collision, system.m()) {
        (Some(l), m) if m >= 2 => Some(ThetaRelation {
            relation_length: l,
            value: theta_from_relation(l, m),
            heuristic: true,
        }),
        _ => None,
    };
    Ok(GrowthReport {
        d,
        h,
        h_err,
        theta_fekete: theta,
        theta_fekete_level: theta_level,
        theta_relation,
        hmu_logtheta_upper: hmu,
        hmu_logtheta_level: hmu_level,
        first_collision_level: first_collision,
        relations,
        separation,
        truncated_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fekete_examples() {
        let d = [2, 4, 8, 16, 32, 64, 127];
        let (t, n) = theta_fekete(&d);
        assert_eq!(n, 7);
        assert!((t - 127f64.powf(1.0 / 7.0)).abs() < 1e-12);
        assert!(t >= 127f64.powf(1.0 / 7.0));
        assert_eq!(theta_fekete(&[1, 1, 1]).0, 1.0);
    }

    #[test]
    fn relation_roots() {
        let t5 = theta_from_relation(5, 2);
        assert!(t5 > 1.9275 && t5 < 1.9277, "{t5}");
        let t7 = theta_from_relation(7, 2);
        assert!(t7 > 1.9835 && t7 < 1.9836, "{t7}");
        assert!((theta_from_relation(2, 2) - 1.0).abs() < 1e-12);
        // oracle: the polynomial vanishes at the returned root
        for (l, m) in [(3, 2), (6, 3), (9, 2)] {
            let r = theta_from_relation(l, m);
            let g = r.powi(l as i32) - m as f64 * r.powi(l as i32 - 1) + 1.0;
            assert!(g.abs() < 1e-9, "{l} {m} {g}");
        }
    }

    #[test]
    fn free_entropy_ratio() {
        let ln2 = std::f64::consts::LN_2;
        let h: Vec<f64> = (1..=6).map(|n| n as f64 * ln2).collect();
        let e = vec![1e-15; 6];
        let (v, _) = entropy_bounds(&h, &e);
        assert!(v >= ln2 && v - ln2 < 1e-12);
    }
}
