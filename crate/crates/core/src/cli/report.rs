use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use super::config::AnalysisConfig;
use crate::bounds::{DimensionVerdict, Provenance};
use crate::exactalg::{FieldMode, Interval, Irreducibility, PisotStatus};
use crate::fourier::FourierTrace;
use crate::ifs::{LyapunovEstimate, ValidationReport};
use crate::sampler::DimensionEstimate;
use crate::semigroup::GrowthReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct SystemSummary {
    pub field: String,
    pub mode: FieldMode,
    pub irreducibility: Irreducibility,
    pub pisot: Option<PisotStatus>,
    pub maps: usize,
    pub dimension: usize,
    pub uniform: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SamplerSummary {
    pub n: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub capped: usize,
    pub max_word_length: u32,
    pub local_dimension: Vec<DimensionEstimate>,
}

/// Wall-clock milliseconds per stage; kept apart so reports can be compared
/// with this block removed.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub validate_ms: f64,
    pub lyapunov_ms: f64,
    pub growth_ms: f64,
    pub sampler_ms: f64,
    pub fourier_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    /// Set when enumeration stopped at the class budget.
    pub partial: bool,
    pub config: AnalysisConfig,
    pub system: SystemSummary,
    pub validation: ValidationReport,
    /// `h = Σ p_i log p_i`.
    pub entropy: Interval,
    pub lyapunov: LyapunovEstimate,
    pub growth: Option<GrowthReport>,
    pub verdict: DimensionVerdict,
    pub sampler: Option<SamplerSummary>,
    pub fourier: Option<FourierTrace>,
    pub provenance: Vec<Provenance>,
    pub notes: Vec<String>,
    pub timings: Timings,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("report is not valid JSON: {0}")]
    Json(String),
    #[error("unsupported report schema version {found} (this build reads version {expected})")]
    Schema { found: String, expected: u32 },
    #[error("report field {0} is missing or malformed")]
    Missing(&'static str),
}

/// Upper bounds are shown rounded up so that the printed number is still a bound.
fn up4(x: f64) -> String {
    format!("{:.4}", (x * 1e4).ceil() / 1e4)
}

fn num(v: &Value) -> Option<f64> {
    v.as_f64()
}

fn legend(p: &str) -> &'static str {
    match p {
        "exact" => "exact: exact or outward-rounded arithmetic; certified",
        "monte-carlo" => "monte-carlo: random sampling; evidence only",
        "heuristic" => "heuristic: relation-derived growth rate; evidence only",
        "conditional-irreducibility" => "conditional-irreducibility: assumes the defining polynomial is irreducible",
        "formal-shadow" => "formal-shadow: numeric value of a formal λ; evidence only",
        _ => "unknown flag",
    }
}

pub fn render_str(text: &str) -> Result<String, RenderError> {
    let v: Value = serde_json::from_str(text).map_err(|e| RenderError::Json(e.to_string()))?;
    render(&v)
}

/// Human-readable summary of a report document.
pub fn render(r: &Value) -> Result<String, RenderError> {
    let version = r.get("schema_version").and_then(Value::as_u64);
    if version != Some(SCHEMA_VERSION as u64) {
        return Err(RenderError::Schema {
            found: version.map_or("(missing)".into(), |v| v.to_string()),
            expected: SCHEMA_VERSION,
        });
    }
    let sys = r.get("system").ok_or(RenderError::Missing("system"))?;
    let v = r.get("verdict").ok_or(RenderError::Missing("verdict"))?;
    let dim = v.get("dim").and_then(Value::as_u64).ok_or(RenderError::Missing("verdict.dim"))?;
    let mut out = String::new();
    let name = r.pointer("/config/name").and_then(Value::as_str).unwrap_or("unnamed system");
    writeln!(out, "# {name}").unwrap();
    if r.get("partial").and_then(Value::as_bool) == Some(true) {
        let k = r.pointer("/growth/truncated_at").and_then(Value::as_u64).unwrap_or(0);
        writeln!(out, "\n**TRUNCATED at level {k}**: class budget exceeded; bounds use complete levels only.").unwrap();
    }
    writeln!(
        out,
        "\n{} maps in dimension {} over {}",
        sys.get("maps").and_then(Value::as_u64).unwrap_or(0),
        dim,
        sys.get("field").and_then(Value::as_str).unwrap_or("?")
    )
    .unwrap();
    let iv = |p: &str| -> String {
        match (r.pointer(&format!("{p}/lo")).and_then(num), r.pointer(&format!("{p}/hi")).and_then(num)) {
            (Some(lo), Some(hi)) => format!("[{lo:.6}, {hi:.6}]"),
            _ => "n/a".into(),
        }
    };
    writeln!(out, "h ∈ {}", iv("/entropy")).unwrap();
    writeln!(
        out,
        "χ ∈ {} ({})",
        iv("/lyapunov/interval"),
        r.pointer("/lyapunov/label").and_then(Value::as_str).unwrap_or("?")
    )
    .unwrap();
    if let Some(t) = v.get("theta_upper").and_then(num) {
        writeln!(
            out,
            "θ ≤ {:.6} ({})",
            t,
            v.get("theta_source").and_then(Value::as_str).unwrap_or("")
        )
        .unwrap();
    }

    writeln!(out, "\n| bound | value | provenance |\n|---|---|---|").unwrap();
    for (key, label) in [
        ("bound_thm2", "entropy"),
        ("bound_cor_nonfree", "non-free"),
        ("bound_cor_nonfree_relation", "non-free (relation θ)"),
        ("bound_cor1", "basic"),
    ] {
        if let Some(b) = v.get(key).filter(|b| !b.is_null()) {
            let value = b.get("value").and_then(num).map_or("n/a".into(), up4);
            let prov: Vec<&str> = b
                .get("provenance")
                .and_then(Value::as_array)
                .map(|a| a.iter().filter_map(Value::as_str).collect())
                .unwrap_or_default();
            writeln!(out, "| {label} | {value} | {} |", prov.join(", ")).unwrap();
        }
    }
    let chain: Vec<f64> = ["bound_thm2", "bound_cor_nonfree", "bound_cor1"]
        .iter()
        .filter_map(|k| v.pointer(&format!("/{k}/value")).and_then(num))
        .collect();
    if chain.len() == 3 {
        let holds = chain[0] <= chain[1] * (1.0 + 1e-9) && chain[1] <= chain[2] * (1.0 + 1e-9);
        writeln!(out, "\nbound chain entropy ≤ non-free ≤ basic: {}", if holds { "holds" } else { "VIOLATED" }).unwrap();
    }

    writeln!(out).unwrap();
    let best = v.get("best_bound").and_then(num);
    let best_cert = v.get("best_certified_bound").and_then(num);
    if let Some(reason) = v.get("withheld").and_then(Value::as_str) {
        writeln!(out, "NO VERDICT: {reason}").unwrap();
    } else if v.get("singular_certified").and_then(Value::as_bool) == Some(true) {
        let b = best.unwrap_or(f64::NAN);
        writeln!(out, "SINGULAR (certified): dim_H(μ) ≤ {}", up4(b)).unwrap();
        if let Some(c) = best_cert.filter(|c| *c > b) {
            writeln!(out, "certified bound {}; the smaller value is evidence only", up4(c)).unwrap();
        }
    } else if v.get("singular_evidence").and_then(Value::as_bool) == Some(true) {
        writeln!(out, "SINGULAR (evidence only): dim_H(μ) ≤ {}", up4(best.unwrap_or(f64::NAN))).unwrap();
    } else {
        let b = best.map_or("n/a".into(), up4);
        writeln!(out, "UNDECIDED: best bound {b} does not fall below {dim}").unwrap();
    }
    if let Some(conds) = v.get("conditions").and_then(Value::as_array) {
        for c in conds.iter().filter_map(Value::as_str) {
            writeln!(out, "- {c}").unwrap();
        }
    }

    if let Some(s) = r.get("sampler").filter(|s| !s.is_null()) {
        let n = s.get("n").and_then(Value::as_u64).unwrap_or(0);
        let mean: Vec<String> = s
            .get("mean")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(num).map(|x| format!("{x:.6}")).collect())
            .unwrap_or_default();
        writeln!(out, "\nsampler: {n} points, mean ({})", mean.join(", ")).unwrap();
        if let Some(est) = s.get("local_dimension").and_then(Value::as_array) {
            for e in est {
                let method = e.get("method").and_then(Value::as_str).unwrap_or("?");
                let value = e.get("value").and_then(num).unwrap_or(f64::NAN);
                writeln!(out, "- local dimension ({method}): {value:.4}").unwrap();
            }
        }
    }
    if let Some(f) = r.get("fourier").filter(|f| !f.is_null()) {
        writeln!(
            out,
            "\nfourier: min |μ̂(2πλⁿ)| − error = {:.6e}, verdict {}",
            f.get("min_modulus").and_then(num).unwrap_or(f64::NAN),
            f.get("verdict").and_then(Value::as_str).unwrap_or("?")
        )
        .unwrap();
    }

    let flags: Vec<&str> = r
        .get("provenance")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    writeln!(out, "\nprovenance legend:").unwrap();
    for p in flags {
        writeln!(out, "- {}", legend(p)).unwrap();
    }
    Ok(out)
}
