//! JSON analysis configs.
//!
//! Exact numbers are strings (`"3/4"`, `"-0.25"`) or integers. An element of
//! `Q(λ)` may also be a coefficient list in powers of `λ`, constant first
//! (`[0, 1]` is `λ`), or `{"from": -1, "coeffs": [1]}` for `λ^{-1}`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::exactalg::{FieldElement, LaurentPoly, NumberField, Poly, Rational};
use crate::ifs::{AffineMap, IFSystem, IfsError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
}

fn field_err(path: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Field { path: path.into(), message: message.to_string() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Rational,
    Algebraic {
        /// Integer or rational coefficients, constant first.
        min_poly: Vec<Value>,
        /// Isolating interval `[lo, hi]` for the real root `λ`.
        interval: [Value; 2],
    },
    Formal {
        /// Numeric value used for evaluation only.
        shadow: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    /// An element (d = 1) or a row-major matrix of elements.
    pub linear: Value,
    /// An element (d = 1) or a vector of elements.
    pub translation: Value,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation_bits: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub local_dimension: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analyses {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fourier: Option<FourierConfig>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_dir: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub field: FieldSpec,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub dimension: usize,
    pub maps: Vec<MapSpec>,
    /// Uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub analyses: Analyses,
    /// Maximum number of classes per level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub outputs: Outputs,
}

fn one() -> usize {
    1
}

fn is_one(d: &usize) -> bool {
    *d == 1
}

fn is_default<T: Default + PartialEq>(x: &T) -> bool {
    *x == T::default()
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build_field(&self) -> Result<NumberField, ConfigError> {
        match &self.field {
            FieldSpec::Rational => Ok(NumberField::rational()),
            FieldSpec::Formal { shadow } => NumberField::formal(*shadow).map_err(|e| field_err("field.shadow", e)),
            FieldSpec::Algebraic { min_poly, interval } => {
                let coeffs = min_poly
                    .iter()
                    .enumerate()
                    .map(|(i, v)| rational(v, &format!("field.min_poly[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let lo = rational(&interval[0], "field.interval[0]")?;
                let hi = rational(&interval[1], "field.interval[1]")?;
                NumberField::algebraic(Poly::new(coeffs), lo, hi).map_err(|e| field_err("field", e))
            }
        }
    }

    /// Parses the maps and probabilities into a system.
    pub fn build_system(&self) -> Result<IFSystem, ConfigError> {
        let field = self.build_field()?;
        let d = self.dimension;
        if d == 0 {
            return Err(field_err("dimension", "must be at least 1"));
        }
        let mut maps = Vec::with_capacity(self.maps.len());
        for (i, m) in self.maps.iter().enumerate() {
            let path = format!("maps[{i}]");
            let (linear, translation) = if d == 1 {
                (
                    vec![vec![element(&field, &m.linear, &format!("{path}.linear"))?]],
                    vec![element(&field, &m.translation, &format!("{path}.translation"))?],
                )
            } else {
                let rows = m
                    .linear
                    .as_array()
                    .filter(|r| r.len() == d)
                    .ok_or_else(|| field_err(format!("{path}.linear"), format!("expected a {d}×{d} matrix")))?;
                let mut linear = Vec::with_capacity(d);
                for (r, row) in rows.iter().enumerate() {
                    let row = row
                        .as_array()
                        .filter(|x| x.len() == d)
                        .ok_or_else(|| field_err(format!("{path}.linear[{r}]"), format!("expected {d} entries")))?;
                    linear.push(
                        row.iter()
                            .enumerate()
                            .map(|(c, v)| element(&field, v, &format!("{path}.linear[{r}][{c}]")))
                            .collect::<Result<Vec<_>, _>>()?,
                    );
                }
                let t = m
                    .translation
                    .as_array()
                    .filter(|x| x.len() == d)
                    .ok_or_else(|| field_err(format!("{path}.translation"), format!("expected {d} entries")))?;
                let translation = t
                    .iter()
                    .enumerate()
                    .map(|(c, v)| element(&field, v, &format!("{path}.translation[{c}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                (linear, translation)
            };
            maps.push(AffineMap::new(linear, translation).map_err(|e| field_err(path, e))?);
        }
        let probs = match &self.probabilities {
            None => None,
            Some(ps) => Some(
                ps.iter()
                    .enumerate()
                    .map(|(i, v)| rational(v, &format!("probabilities[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        let result = match probs {
            None => IFSystem::uniform(field, maps),
            Some(p) => IFSystem::new(field, maps, p),
        };
        result.map_err(|e| {
            let path = match &e {
                IfsError::ProbabilitySum(_) | IfsError::CountMismatch { .. } => "probabilities".to_string(),
                IfsError::NonPositiveProbability { index, .. } => format!("probabilities[{}]", index - 1),
                IfsError::Empty => "maps".to_string(),
                IfsError::Shape { index, .. } => format!("maps[{index}]"),
                IfsError::ZeroLinear(i) => format!("maps[{i}].linear"),
                IfsError::Exact(_) => "maps".to_string(),
            };
            field_err(path, e)
        })
    }
}

fn rational(v: &Value, path: &str) -> Result<Rational, ConfigError> {
    match v {
        Value::String(s) => s.parse().map_err(|e| field_err(path, e)),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Rational::from_int(i)),
            None => Err(field_err(path, format!("{n} is not exact; write it as a string such as \"3/4\""))),
        },
        _ => Err(field_err(path, "expected a rational number as a string or integer")),
    }
}

fn element(field: &NumberField, v: &Value, path: &str) -> Result<FieldElement, ConfigError> {
    let raw = match v {
        Value::String(_) | Value::Number(_) => LaurentPoly { low: 0, coeffs: vec![rational(v, path)?] },
        Value::Array(cs) => LaurentPoly {
            low: 0,
            coeffs: cs
                .iter()
                .enumerate()
                .map(|(i, c)| rational(c, &format!("{path}[{i}]")))
                .collect::<Result<_, _>>()?,
        },
        Value::Object(o) => {
            if let Some(k) = o.keys().find(|k| *k != "from" && *k != "coeffs") {
                return Err(field_err(path, format!("unknown key {k:?}")));
            }
            let low = o
                .get("from")
                .and_then(Value::as_i64)
                .and_then(|x| i32::try_from(x).ok())
                .ok_or_else(|| field_err(format!("{path}.from"), "expected an integer exponent"))?;
            let cs = o
                .get("coeffs")
                .and_then(Value::as_array)
                .ok_or_else(|| field_err(format!("{path}.coeffs"), "expected a coefficient list"))?;
            LaurentPoly {
                low,
                coeffs: cs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| rational(c, &format!("{path}.coeffs[{i}]")))
                    .collect::<Result<_, _>>()?,
            }
        }
        _ => return Err(field_err(path, "expected a number, a coefficient list or {\"from\", \"coeffs\"}")),
    };
    field.reduce(&raw).map_err(|e| field_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAIR: &str = r#"{
  "field": {"mode": "rational"},
  "maps": [
    {"linear": "2", "translation": "1"},
    {"linear": "1/16", "translation": 1}
  ],
  "probabilities": ["1/2", "1/2"]
}"#;

    #[test]
    fn parses_rational_pair() {
        let c = AnalysisConfig::from_json(PAIR).unwrap();
        let s = c.build_system().unwrap();
        assert_eq!(s.m(), 2);
        assert_eq!(s.maps()[1].linear()[0], FieldElement::Rational(Rational::new(1, 16)));
        assert_eq!(AnalysisConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn laurent_elements() {
        let text = r#"{
  "field": {"mode": "algebraic", "min_poly": [-1, -1, 1], "interval": ["1", "2"]},
  "maps": [
    {"linear": {"from": -1, "coeffs": [1]}, "translation": 0},
    {"linear": {"from": -1, "coeffs": [1]}, "translation": {"from": -1, "coeffs": [-1, 1]}}
  ]
}"#;
        let s = AnalysisConfig::from_json(text).unwrap().build_system().unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((s.field().to_f64(&s.maps()[0].linear()[0]) - 1.0 / phi).abs() < 1e-14);
        assert!((s.field().to_f64(&s.maps()[1].translation()[0]) - (1.0 - 1.0 / phi)).abs() < 1e-14);
    }

    #[test]
    fn located_errors() {
        let bad = PAIR.replace("[\"1/2\", \"1/2\"]", "[\"1/2\", \"1/4\"]");
        let e = AnalysisConfig::from_json(&bad).unwrap().build_system().unwrap_err();
        assert!(matches!(&e, ConfigError::Field { path, .. } if path == "probabilities"), "{e}");
        let bad = PAIR.replace("\"1/16\"", "0.0625");
        let e = AnalysisConfig::from_json(&bad).unwrap().build_system().unwrap_err();
        assert!(e.to_string().starts_with("maps[1].linear"), "{e}");
        let e = AnalysisConfig::from_json("{\n  \"field\": {\"mode\": \"rational\"},\n  \"mapz\": []\n}").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 3, .. }), "{e}");
    }

    #[test]
    fn matrix_maps() {
        let text = r#"{
  "field": {"mode": "rational"},
  "dimension": 2,
  "maps": [
    {"linear": [["1/2", 0], [0, "1/2"]], "translation": [0, 0]},
    {"linear": [["1/2", 0], [0, "1/2"]], "translation": [1, "1/3"]}
  ]
}"#;
        let c = AnalysisConfig::from_json(text).unwrap();
        let s = c.build_system().unwrap();
        assert_eq!(s.dim(), 2);
        let bad = text.replace("[1, \"1/3\"]", "[1]");
        let e = AnalysisConfig::from_json(&bad).unwrap().build_system().unwrap_err();
        assert_eq!(e.to_string(), "maps[1].translation: expected 2 entries");
    }
}
