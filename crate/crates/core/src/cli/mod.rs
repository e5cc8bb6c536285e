//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid config or input,
//! 3 enumeration truncated at the class budget (output still written).

pub mod config;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::bounds::{assemble_verdict, Provenance, VerdictInputs};
use crate::exactalg::{FieldMode, LaurentPoly, NumberField, Poly, Rational};
use crate::fourier::{pisot_subsequence_test, FourierError, FourierTrace};
use crate::ifs::{entropy_h, lyapunov_exact, lyapunov_mc, validate, IFSystem, LyapunovKind};
use crate::sampler::{local_dimension, mean_and_stderr, sample_stationary, LocalDimOptions, SampleOptions, SampleSet};
use crate::semigroup::{find_relations, growth_series, format_word, ExpandError, GrowthOptions, DEFAULT_BUDGET};
use config::{AnalysisConfig, ConfigError};
use report::{AnalysisReport, SamplerSummary, SystemSummary, Timings, SCHEMA_VERSION};

#[derive(Parser, Debug)]
#[command(name = "ifsdim", version, about = "Dimension bounds and singularity tests for stationary measures of affine IFS")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate, estimate χ, enumerate the semigroup and assemble the dimension verdict.
    Analyze(Run),
    /// Class counts and entropies per level as CSV.
    Growth(Run),
    /// Relations between words found by exact enumeration, as CSV.
    Relations(Run),
    /// Samples from the stationary measure as CSV.
    Sample(Run),
    /// |μ̂(2πλⁿ)| trace for the pair {x/λ, x + 1} as CSV.
    Fourier(Run),
    /// Human-readable summary of a report written by `analyze`.
    Render {
        /// Report JSON file.
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct Run {
    /// Analysis config (JSON).
    pub config: PathBuf,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// Enumeration depth.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Maximum number of classes per level.
    #[arg(long)]
    pub budget: Option<usize>,
    /// RNG seed for Monte Carlo and sampling; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Working precision in bits for exact evaluation.
    #[arg(long)]
    pub precision: Option<u32>,
    /// Number of samples (sample command).
    #[arg(long)]
    pub n: Option<usize>,
    /// Output file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Invalid(_) => 2,
            CliError::Runtime(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<ExpandError> for CliError {
    fn from(e: ExpandError) -> Self {
        match e {
            ExpandError::TooManyMaps(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

pub const EXIT_TRUNCATED: i32 = 3;

/// Parses arguments and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<i32, CliError> {
    let workers = match &cli.command {
        Command::Render { .. } => None,
        Command::Analyze(r) | Command::Growth(r) | Command::Relations(r) | Command::Sample(r) | Command::Fourier(r) => {
            r.flags.workers
        }
    };
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Analyze(r) => cmd_analyze(&r),
        Command::Growth(r) => cmd_growth(&r),
        Command::Relations(r) => cmd_relations(&r),
        Command::Sample(r) => cmd_sample(&r),
        Command::Fourier(r) => cmd_fourier(&r),
        Command::Render { report, out } => {
            let text = std::fs::read_to_string(&report)?;
            let rendered = report::render_str(&text).map_err(|e| CliError::Invalid(e.to_string()))?;
            emit(out.as_deref(), rendered.as_bytes())?;
            Ok(0)
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn load(run: &Run) -> Result<(AnalysisConfig, IFSystem), CliError> {
    let cfg = AnalysisConfig::load(&run.config)?;
    let system = cfg.build_system()?;
    Ok((cfg, system))
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
}

fn growth_options(cfg: &AnalysisConfig, flags: &Flags, system: &IFSystem, chi: Option<f64>) -> Option<GrowthOptions> {
    let g = cfg.analyses.growth.as_ref();
    let depth = flags.depth.or(g.map(|g| g.depth))?;
    let mut opts = GrowthOptions::new(depth);
    opts.budget = flags.budget.or(cfg.budget).unwrap_or(DEFAULT_BUDGET);
    opts.relations = g.and_then(|g| g.relations);
    if system.dim() == 1 {
        opts.separation_bits = g.and_then(|g| g.separation_bits).map(|b| flags.precision.unwrap_or(b));
    }
    opts.chi = chi;
    Some(opts)
}

/// The field of `λ` when the system is `{x/λ, x + 1}` with equal weights.
pub fn digit_pair_field(system: &IFSystem) -> Option<NumberField> {
    if system.dim() != 1 || system.m() != 2 || !system.is_uniform() {
        return None;
    }
    let field = system.field();
    let one = field.one();
    let zero = field.zero();
    let maps = system.maps();
    let (contract, shift) = if maps[1].linear()[0] == one { (&maps[0], &maps[1]) } else { (&maps[1], &maps[0]) };
    if shift.linear()[0] != one || shift.translation()[0] != one || contract.translation()[0] != zero {
        return None;
    }
    let r = &contract.linear()[0];
    match field.mode() {
        FieldMode::RationalOnly => {
            let q = field.as_rational(r)?.recip().ok()?;
            if !q.is_integer() || q <= Rational::one() {
                return None;
            }
            let lam = q.floor();
            let poly = Poly::new(vec![Rational::from_bigint(-lam.clone()), Rational::one()]);
            let lo = Rational::from_bigint(lam.clone() - 1);
            let hi = Rational::from_bigint(lam + 1);
            NumberField::algebraic(poly, lo, hi).ok()
        }
        FieldMode::Algebraic => {
            let inv = field.reduce(&LaurentPoly::monomial(Rational::one(), -1)).ok()?;
            (r == &inv).then(|| field.clone())
        }
        FieldMode::Formal => None,
    }
}

fn fourier_trace(cfg: &AnalysisConfig, flags: &Flags, system: &IFSystem) -> Result<FourierTrace, CliError> {
    let f = cfg.analyses.fourier.clone().unwrap_or_default();
    let field = digit_pair_field(system).ok_or_else(|| {
        CliError::Invalid("the Fourier test needs the pair {x/λ, x + 1} with equal weights and algebraic λ".into())
    })?;
    let precision = flags.precision.or(f.precision).unwrap_or(256);
    pisot_subsequence_test(&field, f.n_max.unwrap_or(30), precision, f.threshold.unwrap_or(1e-3)).map_err(|e| match e {
        FourierError::NotPisot(_) => CliError::Invalid(e.to_string()),
        _ => CliError::Runtime(e.to_string()),
    })
}

fn sample(cfg: &AnalysisConfig, flags: &Flags, system: &IFSystem) -> Result<SampleSet, CliError> {
    let s = cfg.analyses.sampler.clone().unwrap_or_default();
    let n = flags.n.unwrap_or(if cfg.analyses.sampler.is_some() { s.n } else { 10_000 });
    let mut opts = SampleOptions::new(n, flags.seed.or(s.seed).unwrap_or(0));
    if let Some(t) = s.tolerance {
        opts.tolerance = t;
    }
    sample_stationary(system, &opts).map_err(|e| CliError::Runtime(e.to_string()))
}

/// Runs the full pipeline on a parsed config.
pub fn analyze(cfg: &AnalysisConfig, flags: &Flags) -> Result<AnalysisReport, CliError> {
    let mut timings = Timings::default();
    let mut notes = Vec::new();

    let t = Instant::now();
    let system = cfg.build_system()?;
    let validation = validate(&system).map_err(|e| CliError::Invalid(e.to_string()))?;
    let h = entropy_h(system.probabilities());
    timings.validate_ms = ms(t);

    let t = Instant::now();
    let chi = match lyapunov_exact(&system).map_err(|e| CliError::Runtime(e.to_string()))? {
        Some(c) => c,
        None => {
            let l = cfg.analyses.lyapunov.clone().unwrap_or_default();
            lyapunov_mc(
                &system,
                l.n.unwrap_or(256),
                l.trials.unwrap_or(1024),
                flags.seed.or(l.seed).unwrap_or(0),
            )
        }
    };
    timings.lyapunov_ms = ms(t);

    let t = Instant::now();
    let growth = match growth_options(cfg, flags, &system, Some(chi.value)) {
        Some(opts) => Some(growth_series(&system, &opts)?),
        None => None,
    };
    timings.growth_ms = ms(t);

    let field = system.field();
    let verdict = assemble_verdict(&VerdictInputs {
        dim: system.dim(),
        m: system.m(),
        h,
        chi: &chi,
        contraction: validation.contraction,
        growth: growth.as_ref(),
        field_mode: field.mode(),
        irreducibility: field.irreducibility(),
    });

    let t = Instant::now();
    let sampler = match &cfg.analyses.sampler {
        None => None,
        Some(sc) => {
            let set = sample(cfg, flags, &system)?;
            let d = set.dim;
            let mut mean = Vec::with_capacity(d);
            let mut stderr = Vec::with_capacity(d);
            let mut min = Vec::with_capacity(d);
            let mut max = Vec::with_capacity(d);
            for k in 0..d {
                let xs = set.coordinate(k);
                let (m, s) = mean_and_stderr(&xs);
                mean.push(m);
                stderr.push(s);
                min.push(xs.iter().cloned().fold(f64::INFINITY, f64::min));
                max.push(xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
            }
            let local = if sc.local_dimension {
                match local_dimension(&set, &LocalDimOptions::default()) {
                    Ok((a, b)) => vec![a, b],
                    Err(e) => {
                        notes.push(format!("local dimension skipped: {e}"));
                        Vec::new()
                    }
                }
            } else {
                Vec::new()
            };
            Some(SamplerSummary {
                n: set.len(),
                seed: set.seed,
                tolerance: set.tolerance,
                mean,
                stderr,
                min,
                max,
                capped: set.capped,
                max_word_length: set.word_lengths.iter().copied().max().unwrap_or(0),
                local_dimension: local,
            })
        }
    };
    timings.sampler_ms = ms(t);

    let t = Instant::now();
    let fourier = match &cfg.analyses.fourier {
        None => None,
        Some(_) => match fourier_trace(cfg, flags, &system) {
            Ok(tr) => Some(tr),
            Err(e) => {
                notes.push(format!("fourier test skipped: {e}"));
                None
            }
        },
    };
    timings.fourier_ms = ms(t);

    let mut provenance: Vec<Provenance> = [
        &verdict.bound_thm2,
        &verdict.bound_cor_nonfree,
        &verdict.bound_cor_nonfree_relation,
        &verdict.bound_cor1,
    ]
    .into_iter()
    .flatten()
    .flat_map(|b| b.provenance.iter().copied())
    .collect();
    if chi.kind == LyapunovKind::MonteCarlo || sampler.is_some() {
        provenance.push(Provenance::MonteCarlo);
    }
    if provenance.is_empty() {
        provenance.push(Provenance::Exact);
    }
    provenance.sort();
    provenance.dedup();

    let pisot = match field.mode() {
        FieldMode::Algebraic => Some(field.pisot_flag()),
        _ => None,
    };
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        partial: growth.as_ref().is_some_and(|g| g.truncated_at.is_some()),
        config: cfg.clone(),
        system: SystemSummary {
            field: field.describe(),
            mode: field.mode(),
            irreducibility: field.irreducibility(),
            pisot,
            maps: system.m(),
            dimension: system.dim(),
            uniform: system.is_uniform(),
        },
        validation,
        entropy: h,
        lyapunov: chi,
        growth,
        verdict,
        sampler,
        fourier,
        provenance,
        notes,
        timings,
    })
}

fn cmd_analyze(run: &Run) -> Result<i32, CliError> {
    let cfg = AnalysisConfig::load(&run.config)?;
    let rep = analyze(&cfg, &run.flags)?;
    let json = rep.to_json();
    let out = run.flags.out.clone().or_else(|| cfg.outputs.report.as_ref().map(PathBuf::from));
    match &out {
        Some(p) => {
            std::fs::write(p, json.as_bytes())?;
            let text = report::render_str(&json).map_err(|e| CliError::Runtime(e.to_string()))?;
            print!("{text}");
        }
        None => println!("{json}"),
    }
    Ok(if rep.partial { EXIT_TRUNCATED } else { 0 })
}

fn cmd_growth(run: &Run) -> Result<i32, CliError> {
    let (cfg, system) = load(run)?;
    let opts = growth_options(&cfg, &run.flags, &system, None).unwrap_or_else(|| {
        let mut o = GrowthOptions::new(12);
        o.budget = run.flags.budget.or(cfg.budget).unwrap_or(DEFAULT_BUDGET);
        o
    });
    let g = growth_series(&system, &opts)?;
    let mut w = csv_writer();
    w.write_record(["n", "d_n", "H_n", "H_n_error", "d_n_root"]).map_err(|e| CliError::Runtime(e.to_string()))?;
    if g.truncated_at.is_none() || g.truncated_at > Some(1) {
        for (k, (&d, (hn, e))) in g.d.iter().zip(g.h.iter().zip(&g.h_err)).enumerate() {
            let n = k + 1;
            w.write_record([
                n.to_string(),
                d.to_string(),
                format!("{hn:.17e}"),
                format!("{e:.3e}"),
                format!("{:.17e}", (d as f64).powf(1.0 / n as f64)),
            ])
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        }
    }
    emit(run.flags.out.as_deref(), &finish_csv(w)?)?;
    eprintln!(
        "θ ≤ {:.6} (level {}); H_μ log θ ≤ {:.6} (level {})",
        g.theta_fekete, g.theta_fekete_level, g.hmu_logtheta_upper, g.hmu_logtheta_level
    );
    Ok(match g.truncated_at {
        Some(k) => {
            eprintln!("TRUNCATED at level {k}");
            EXIT_TRUNCATED
        }
        None => 0,
    })
}

fn cmd_relations(run: &Run) -> Result<i32, CliError> {
    let (cfg, system) = load(run)?;
    let g = cfg.analyses.growth.as_ref();
    let depth = run.flags.depth.or(g.map(|g| g.depth)).unwrap_or(8);
    let per_level = g.and_then(|g| g.relations).unwrap_or(16);
    let budget = run.flags.budget.or(cfg.budget).unwrap_or(DEFAULT_BUDGET);
    let (rels, truncated) = find_relations(&system, depth, per_level, budget)?;
    let mut w = csv_writer();
    w.write_record(["level", "left", "right"]).map_err(|e| CliError::Runtime(e.to_string()))?;
    for r in &rels {
        w.write_record([r.level.to_string(), format_word(&r.left), format_word(&r.right)])
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    emit(run.flags.out.as_deref(), &finish_csv(w)?)?;
    eprintln!("{} relations up to level {depth}", rels.len());
    Ok(match truncated {
        Some(k) => {
            eprintln!("TRUNCATED at level {k}");
            EXIT_TRUNCATED
        }
        None => 0,
    })
}

fn cmd_sample(run: &Run) -> Result<i32, CliError> {
    let (cfg, system) = load(run)?;
    let set = sample(&cfg, &run.flags, &system)?;
    let mut w = csv_writer();
    let header: Vec<String> = match set.dim {
        1 => vec!["x".into()],
        2 => vec!["x".into(), "y".into()],
        d => (1..=d).map(|k| format!("x{k}")).collect(),
    };
    w.write_record(&header).map_err(|e| CliError::Runtime(e.to_string()))?;
    for i in 0..set.len() {
        w.write_record(set.point(i).iter().map(|x| format!("{x:.17e}")))
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    emit(run.flags.out.as_deref(), &finish_csv(w)?)?;
    eprintln!("{} points, seed {}, {} capped", set.len(), set.seed, set.capped);
    Ok(0)
}

fn cmd_fourier(run: &Run) -> Result<i32, CliError> {
    let (cfg, system) = load(run)?;
    let tr = fourier_trace(&cfg, &run.flags, &system)?;
    let mut w = csv_writer();
    w.write_record(["n", "modulus", "error", "terms"]).map_err(|e| CliError::Runtime(e.to_string()))?;
    for e in &tr.entries {
        w.write_record([e.n.to_string(), format!("{:.17e}", e.modulus), format!("{:.3e}", e.error), e.terms.to_string()])
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    emit(run.flags.out.as_deref(), &finish_csv(w)?)?;
    let verdict = serde_json::to_value(tr.verdict).expect("verdict serializes");
    eprintln!(
        "λ = {:.12}: min |μ̂(2πλⁿ)| − error = {:.6e} over n ≤ {}; verdict {} (evidence, not a certificate)",
        tr.lambda_value,
        tr.min_modulus,
        tr.entries.len() - 1,
        verdict.as_str().unwrap_or("?")
    );
    Ok(0)
}
