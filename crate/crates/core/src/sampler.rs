//! Monte Carlo sampling of the stationary measure, local-dimension estimates and
//! support diagnostics.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ifs::{mat_mul, spectral_norm, stream_rng, IFSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("{capped} of {total} points hit the cap of {cap} letters (fraction {fraction:.4})")]
    CapExhausted { capped: usize, total: usize, cap: usize, fraction: f64 },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("{0}")]
    InvalidInput(String),
}

#[derive(Clone, Debug)]
pub struct SampleOptions {
    pub n: usize,
    pub tolerance: f64,
    pub cap: usize,
    pub seed: u64,
    /// Starting point; the origin when `None`.
    pub x0: Option<Vec<f64>>,
    /// Largest tolerated fraction of capped points.
    pub max_capped_fraction: f64,
}

impl SampleOptions {
    pub fn new(n: usize, seed: u64) -> Self {
        SampleOptions {
            n,
            tolerance: 1e-12,
            cap: 10_000,
            seed,
            x0: None,
            max_capped_fraction: 0.01,
        }
    }
}

/// Points in `ℝ^d`, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub dim: usize,
    pub points: Vec<f64>,
    pub seed: u64,
    pub tolerance: f64,
    /// Letters composed for each point.
    pub word_lengths: Vec<u32>,
    /// Lipschitz constant of the composed map when sampling stopped.
    pub residuals: Vec<f64>,
    pub capped: usize,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.word_lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_lengths.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Values of coordinate `k`.
    pub fn coordinate(&self, k: usize) -> Vec<f64> {
        self.points.iter().skip(k).step_by(self.dim).copied().collect()
    }

    /// First `n` points.
    pub fn prefix(&self, n: usize) -> SampleSet {
        let n = n.min(self.len());
        SampleSet {
            dim: self.dim,
            points: self.points[..n * self.dim].to_vec(),
            seed: self.seed,
            tolerance: self.tolerance,
            word_lengths: self.word_lengths[..n].to_vec(),
            residuals: self.residuals[..n].to_vec(),
            capped: self.residuals[..n].iter().filter(|&&r| r >= self.tolerance).count(),
        }
    }

    fn from_scalars(values: Vec<f64>, seed: u64, tolerance: f64, word_len: u32) -> SampleSet {
        let n = values.len();
        SampleSet {
            dim: 1,
            points: values,
            seed,
            tolerance,
            word_lengths: vec![word_len; n],
            residuals: vec![0.0; n],
            capped: 0,
        }
    }

    /// Builds a one-dimensional sample set from given values, e.g. for calibration.
    pub fn from_values(values: Vec<f64>) -> SampleSet {
        SampleSet::from_scalars(values, 0, 0.0, 0)
    }
}

/// Samples `μ` by backward composition `f_{ω_0} ∘ … ∘ f_{ω_k}(x_0)`.
///
/// Each point stops once the composed Lipschitz constant drops below the
/// tolerance, so it is within `tolerance · |x_0 - x_0'|` of the point obtained
/// from any other start. Point `i` uses random stream `i` of the seed.
pub fn sample_stationary(system: &IFSystem, opts: &SampleOptions) -> Result<SampleSet, SamplerError> {
    let d = system.dim();
    let x0 = opts.x0.clone().unwrap_or_else(|| vec![0.0; d]);
    if x0.len() != d {
        return Err(SamplerError::InvalidInput(format!("start point has {} coordinates, expected {d}", x0.len())));
    }
    let maps = system.numeric_maps();
    let sampler = system.letter_sampler();
    let results: Vec<(Vec<f64>, u32, f64)> = (0..opts.n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(opts.seed, i as u64);
            let mut a = vec![0.0; d * d];
            for k in 0..d {
                a[k * d + k] = 1.0;
            }
            let mut b = vec![0.0; d];
            let mut len = 0u32;
            let mut lip = 1.0;
            while (len as usize) < opts.cap {
                let f = &maps[sampler.draw(&mut rng)];
                // (A, b) ∘ (A_i, b_i) = (A A_i, A b_i + b)
                for r in 0..d {
                    b[r] += (0..d).map(|k| a[r * d + k] * f.translation[k]).sum::<f64>();
                }
                a = if d == 1 { vec![a[0] * f.linear[0]] } else { mat_mul(&a, &f.linear, d) };
                len += 1;
                lip = spectral_norm(&a, d);
                if lip < opts.tolerance {
                    break;
                }
            }
            let x: Vec<f64> = (0..d)
                .map(|r| b[r] + (0..d).map(|k| a[r * d + k] * x0[k]).sum::<f64>())
                .collect();
            (x, len, lip)
        })
        .collect();
    let mut set = SampleSet {
        dim: d,
        points: Vec::with_capacity(opts.n * d),
        seed: opts.seed,
        tolerance: opts.tolerance,
        word_lengths: Vec::with_capacity(opts.n),
        residuals: Vec::with_capacity(opts.n),
        capped: 0,
    };
    for (x, len, lip) in results {
        set.points.extend(x);
        set.word_lengths.push(len);
        set.residuals.push(lip);
        if lip >= opts.tolerance {
            set.capped += 1;
        }
    }
    let fraction = if opts.n == 0 { 0.0 } else { set.capped as f64 / opts.n as f64 };
    if fraction > opts.max_capped_fraction {
        return Err(SamplerError::CapExhausted { capped: set.capped, total: opts.n, cap: opts.cap, fraction });
    }
    Ok(set)
}

/// Samples `Σ_{k≥0} ε_k λ^{-k}` with i.i.d. digits `P(ε = j) = 2^{-j-1}`, the law of
/// the stationary measure of `{x/λ, x + 1}` with equal weights.
///
/// The sum is cut after `truncation` digits, or, when `None`, once the expected
/// tail `λ^{-K}/(λ-1)` is below `tolerance`.
pub fn sample_geometric_digits(
    lambda: f64,
    n: usize,
    truncation: Option<usize>,
    tolerance: f64,
    seed: u64,
) -> Result<SampleSet, SamplerError> {
    if !(lambda > 1.0) {
        return Err(SamplerError::InvalidInput(format!("λ must exceed 1, got {lambda}")));
    }
    let k = truncation.unwrap_or_else(|| {
        let need = -(tolerance * (lambda - 1.0)).ln() / lambda.ln();
        need.ceil().max(1.0) as usize
    });
    let inv = 1.0 / lambda;
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let mut scale = 1.0;
            let mut acc = 0.0;
            for _ in 0..k {
                let digit = rng.gen::<u64>().trailing_zeros() as f64;
                acc += digit * scale;
                scale *= inv;
            }
            acc
        })
        .collect();
    Ok(SampleSet::from_scalars(values, seed, tolerance, k as u32))
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

/// Sample mean and its standard error.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    Correlation,
    NearestNeighbor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub method: EstimateMethod,
    pub value: f64,
    /// Radii used by the fit, smallest first.
    pub radii: (f64, f64),
    /// RMS residual of the log–log fit (correlation method).
    pub slope_residual: f64,
    pub warning: Option<String>,
}

#[derive(Clone, Debug)]
pub struct LocalDimOptions {
    /// Number of reference points (the first ones of the sample).
    pub centers: usize,
    /// Explicit radii; by default dyadic radii with enough pair counts are chosen.
    pub radii: Option<Vec<f64>>,
    /// Smallest number of pairs a radius must capture to enter the fit.
    pub min_pairs: f64,
    /// Largest correlation sum allowed in the fit.
    pub max_fraction: f64,
}

impl Default for LocalDimOptions {
    fn default() -> Self {
        LocalDimOptions { centers: 2000, radii: None, min_pairs: 1000.0, max_fraction: 0.05 }
    }
}

/// Correlation-sum and Takens maximum-likelihood dimension estimates.
pub fn local_dimension(
    samples: &SampleSet,
    opts: &LocalDimOptions,
) -> Result<(DimensionEstimate, DimensionEstimate), SamplerError> {
    let n = samples.len();
    if n < 1000 {
        return Err(SamplerError::TooFewSamples { needed: 1000, got: n });
    }
    let d = samples.dim;
    let spread = (0..d)
        .map(|k| {
            let c = samples.coordinate(k);
            let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
        .fold(0.0, f64::max);
    if !(spread > 0.0) {
        let est = |method| DimensionEstimate {
            method,
            value: 0.0,
            radii: (0.0, 0.0),
            slope_residual: 0.0,
            warning: Some("all samples coincide; dimension reported as 0".into()),
        };
        return Ok((est(EstimateMethod::Correlation), est(EstimateMethod::NearestNeighbor)));
    }
    let radii: Vec<f64> = match &opts.radii {
        Some(r) => {
            let mut r = r.clone();
            r.sort_by(f64::total_cmp);
            r
        }
        None => {
            let top = 2f64.powi(spread.log2().ceil() as i32);
            (0..48).rev().map(|k| top * 2f64.powi(-k)).collect()
        }
    };
    let m = opts.centers.min(n);
    let pairs_total = m as f64 * (n - 1) as f64;
    let counts = pair_counts(samples, m, &radii);

    let window: Vec<(f64, f64)> = radii
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c >= opts.min_pairs && c / pairs_total <= opts.max_fraction)
        .map(|(&r, &c)| (r.ln(), (c / pairs_total).ln()))
        .collect();
    if window.len() < 3 {
        return Err(SamplerError::InvalidInput(
            "too few radii with usable pair counts for a dimension fit".into(),
        ));
    }
    let (slope, resid) = least_squares(&window);
    let r_lo = window.first().unwrap().0.exp();
    let r_hi = window.last().unwrap().0.exp();
    let corr = DimensionEstimate {
        method: EstimateMethod::Correlation,
        value: slope.max(0.0),
        radii: (r_lo, r_hi),
        slope_residual: resid,
        warning: None,
    };
    let (log_sum, count) = log_distance_sum(samples, m, r_hi);
    let takens = DimensionEstimate {
        method: EstimateMethod::NearestNeighbor,
        value: if log_sum < 0.0 { (-(count as f64) / log_sum).max(0.0) } else { 0.0 },
        radii: (0.0, r_hi),
        slope_residual: 0.0,
        warning: None,
    };
    Ok((corr, takens))
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    (slope, (rss / n).sqrt())
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Number of (center, point) pairs at distance `≤ r` for each radius, centers
/// excluded from their own counts.
fn pair_counts(samples: &SampleSet, centers: usize, radii: &[f64]) -> Vec<f64> {
    let n = samples.len();
    if samples.dim == 1 {
        let mut sorted = samples.points.clone();
        sorted.sort_by(f64::total_cmp);
        let per_center: Vec<Vec<f64>> = (0..centers)
            .into_par_iter()
            .map(|i| {
                let x = samples.points[i];
                radii
                    .iter()
                    .map(|&r| {
                        let lo = sorted.partition_point(|&v| v < x - r);
                        let hi = sorted.partition_point(|&v| v <= x + r);
                        (hi - lo - 1) as f64
                    })
                    .collect()
            })
            .collect();
        return sum_columns(&per_center, radii.len());
    }
    let per_center: Vec<Vec<f64>> = (0..centers)
        .into_par_iter()
        .map(|i| {
            let c = samples.point(i);
            let mut counts = vec![0.0; radii.len()];
            for j in (0..n).filter(|&j| j != i) {
                let dd = dist(c, samples.point(j));
                let first = radii.partition_point(|&r| r < dd);
                if first < radii.len() {
                    counts[first] += 1.0;
                }
            }
            let mut acc = 0.0;
            for v in counts.iter_mut() {
                acc += *v;
                *v = acc;
            }
            counts
        })
        .collect();
    sum_columns(&per_center, radii.len())
}

fn sum_columns(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    (0..k).map(|j| rows.iter().map(|r| r[j]).sum()).collect()
}

/// `Σ log(dist/r)` over pairs with `0 < dist < r`, and their number.
fn log_distance_sum(samples: &SampleSet, centers: usize, r: f64) -> (f64, usize) {
    let parts: Vec<(f64, usize)> = if samples.dim == 1 {
        let mut sorted = samples.points.clone();
        sorted.sort_by(f64::total_cmp);
        (0..centers)
            .into_par_iter()
            .map(|i| {
                let x = samples.points[i];
                let lo = sorted.partition_point(|&v| v <= x - r);
                let hi = sorted.partition_point(|&v| v < x + r);
                sorted[lo..hi]
                    .iter()
                    .map(|&v| (v - x).abs())
                    .filter(|&dd| dd > 0.0)
                    .fold((0.0, 0), |(s, c), dd| (s + (dd / r).ln(), c + 1))
            })
            .collect()
    } else {
        (0..centers)
            .into_par_iter()
            .map(|i| {
                let c = samples.point(i);
                (0..samples.len())
                    .map(|j| dist(c, samples.point(j)))
                    .filter(|&dd| dd > 0.0 && dd < r)
                    .fold((0.0, 0), |(s, k), dd| (s + (dd / r).ln(), k + 1))
            })
            .collect()
    };
    parts.into_iter().fold((0.0, 0), |(s, c), (a, b)| (s + a, c + b))
}

#[derive(Clone, Debug)]
pub struct GridSpec {
    /// Radius of the ball (interval for d = 1) examined.
    pub radius: f64,
    pub center: Vec<f64>,
    /// Cells per side of the bounding box of the ball.
    pub cells: usize,
    /// Nested prefix sizes at which coverage is reported.
    pub prefixes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// `(N, fraction of cells inside the ball hit by the first N samples)`;
    /// empty for d ≥ 3.
    pub coverage: Vec<(usize, f64)>,
    pub cells_in_ball: usize,
}

/// Coordinate ranges and ball coverage for nested prefixes of the sample.
pub fn support_stats(samples: &SampleSet, grid: &GridSpec) -> SupportStats {
    let d = samples.dim;
    let min: Vec<f64> = (0..d)
        .map(|k| samples.coordinate(k).into_iter().fold(f64::INFINITY, f64::min))
        .collect();
    let max: Vec<f64> = (0..d)
        .map(|k| samples.coordinate(k).into_iter().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    if d > 2 || grid.cells == 0 {
        return SupportStats { min, max, coverage: Vec::new(), cells_in_ball: 0 };
    }
    let k = grid.cells;
    let size = 2.0 * grid.radius / k as f64;
    let center = |i: usize| -grid.radius + (i as f64 + 0.5) * size;
    let cell_count = if d == 1 { k } else { k * k };
    let in_ball: Vec<bool> = (0..cell_count)
        .map(|c| {
            let r2 = if d == 1 {
                center(c).powi(2)
            } else {
                center(c % k).powi(2) + center(c / k).powi(2)
            };
            r2 <= grid.radius * grid.radius
        })
        .collect();
    let total = in_ball.iter().filter(|&&b| b).count();
    let mut hit = vec![false; cell_count];
    let mut hits = 0usize;
    let mut coverage = Vec::new();
    let mut prefixes = grid.prefixes.clone();
    prefixes.sort_unstable();
    let mut next = 0;
    for i in 0..samples.len() {
        while next < prefixes.len() && prefixes[next] == i {
            coverage.push((i, hits as f64 / total.max(1) as f64));
            next += 1;
        }
        let p = samples.point(i);
        let idx: Option<Vec<usize>> = (0..d)
            .map(|a| {
                let off = grid.center.get(a).copied().unwrap_or(0.0);
                let t = ((p[a] - off + grid.radius) / size).floor();
                (t >= 0.0 && t < k as f64).then_some(t as usize)
            })
            .collect();
        if let Some(idx) = idx {
            let c = if d == 1 { idx[0] } else { idx[0] + k * idx[1] };
            if in_ball[c] && !hit[c] {
                hit[c] = true;
                hits += 1;
            }
        }
    }
    while next < prefixes.len() {
        coverage.push((prefixes[next].min(samples.len()), hits as f64 / total.max(1) as f64));
        next += 1;
    }
    SupportStats { min, max, coverage, cells_in_ball: total }
}
