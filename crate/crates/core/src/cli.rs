//! Command-line front end: hole → pair → normalisation → automaton →
//! verdicts, with JSON, CSV or plain-text output.
//!
//! Search caps come from defaults, then an optional `key=value` config file
//! (`cap`, `kmax`, `nmax`, `window`, `tol`), then command-line flags.
//! Exit codes: 0 success, 2 domain rejection (invalid input, hole outside the
//! studied rectangle, pair that cannot be normalised), 3 inconclusive (a
//! search cap was reached), 1 internal error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::circle::{
    bad_periods, hole_report, hole_to_pair, parse_rational, s_membership, validate_hole,
    CircleError, HoleClass, SMembership,
};
use crate::lexworld::{classify, normalize, staircase_sample, LexError, LexPair, PairClass};
use crate::renorm::{
    default_cap, detect_renorm, sturmian_words, transitivity, RenormError, RenormVerdict,
    TransitivityOptions, TransitivityVerdict,
};
use crate::specprop::{
    family_reports, family_stages, find_prime_chain, spec_report, spec_verdict, BridgeMode,
    FamilyMode, SpecError, SpecOptions, SpecReport,
};
use crate::subshift::{entropy_with, forbidden_factors, is_sft, EntropyOptions, SubshiftError};
use crate::words::{Word, WordError};
use crate::{Entropy, Hole, Rational};

/// Errors of the command-line front end.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid input or a hole/pair outside the supported domain.
    #[error("{0}")]
    Domain(String),
    /// A search cap was reached without a verdict.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    /// Anything else (I/O, resource limits).
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// Process exit code for the error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 2,
            CliError::Inconclusive(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<CircleError> for CliError {
    fn from(e: CircleError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<WordError> for CliError {
    fn from(e: WordError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<LexError> for CliError {
    fn from(e: LexError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<SubshiftError> for CliError {
    fn from(e: SubshiftError) -> Self {
        match e {
            SubshiftError::TooManyStates { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<RenormError> for CliError {
    fn from(e: RenormError) -> Self {
        match e {
            RenormError::Subshift(inner) => inner.into(),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        match e {
            SpecError::NonStabilized { .. } => CliError::Inconclusive(e.to_string()),
            SpecError::Subshift(inner) => inner.into(),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

/// Exact symbolic dynamics of the doubling map with a hole.
#[derive(Debug, Parser)]
#[command(name = "lexshift", version, about)]
pub struct Cli {
    /// Options shared by all subcommands.
    #[command(flatten)]
    pub global: GlobalOpts,
    /// The subcommand.
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by all subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalOpts {
    /// Renormalisation search cap on ℓ(ω) + ℓ(ν).
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// Largest period for bad periods; largest word length for specification numbers.
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Largest bridge length of the empirical transitivity oracle.
    #[arg(long, global = true)]
    pub kmax: Option<usize>,
    /// Stabilisation window of the specification number.
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Relative tolerance of the spectral-radius iteration.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Use bridges of length at most k (instead of exactly k) for m_n.
    #[arg(long, global = true)]
    pub at_most: bool,
    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// Emit CSV.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Config file with `key=value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Family construction selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    /// Stable bridge words (specification).
    Spec,
    /// Growing bridge words (no specification).
    Nospec,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full analysis of a hole (a, b), or of a grid of holes.
    Analyze {
        /// Left endpoint `p/q`.
        a: Option<String>,
        /// Right endpoint `p/q`.
        b: Option<String>,
        /// Sweep a W×H grid of the rectangle 1/4 < a < 1/2 < b < 3/4.
        #[arg(long, value_name = "WxH", conflicts_with_all = ["a", "b"])]
        grid: Option<String>,
    },
    /// Sample x ↦ π(ς(π⁻¹(x))) on a uniform grid of [1/2, 1] as CSV.
    Staircase {
        /// Number of samples (at least 2).
        samples: usize,
        /// Output file (standard output if absent).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Landing indices and bad periods of a hole.
    Badperiods {
        /// Left endpoint `p/q`.
        a: String,
        /// Right endpoint `p/q`.
        b: String,
    },
    /// Topological entropy of a pair `PRE|PER PRE|PER`.
    Entropy {
        /// Upper sequence α.
        alpha: String,
        /// Lower sequence β.
        beta: String,
    },
    /// Transitivity verdict of a pair.
    Transitive {
        /// Upper sequence α.
        alpha: String,
        /// Lower sequence β.
        beta: String,
    },
    /// Renormalisation verdict of a pair.
    Renorm {
        /// Upper sequence α.
        alpha: String,
        /// Lower sequence β.
        beta: String,
    },
    /// Balanced words of a ratio `p/q`.
    Sturmian {
        /// Ratio in (0, 1).
        r: String,
    },
    /// Specification number of a periodic pair.
    Specnum {
        /// Upper sequence α.
        alpha: String,
        /// Lower sequence β.
        beta: String,
    },
    /// Specification reports along a family built from the golden pair.
    Specfamily {
        /// Which construction.
        #[arg(long, value_enum)]
        mode: FamilyArg,
        /// Number of stages after the seed.
        #[arg(long, default_value_t = 2)]
        stages: usize,
        /// Exponents `j,k` of the no-specification construction.
        #[arg(long, default_value = "2,2")]
        exponents: String,
    },
}

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// `path = value` lines.
    Text,
    /// One JSON document.
    Json,
    /// Comma-separated values.
    Csv,
}

/// Resolved settings: defaults, then config file, then flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Renormalisation cap (`None`: twice the orbit sizes).
    pub cap: Option<usize>,
    /// Empirical bridge bound.
    pub kmax: usize,
    /// Bad-period bound / specification word-length bound (`None`: per command).
    pub nmax: Option<usize>,
    /// Stabilisation window.
    pub window: usize,
    /// Power-iteration tolerance.
    pub tol: f64,
    /// Bridge semantics for m_n.
    pub mode: BridgeMode,
    /// Output format.
    pub format: Format,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            cap: None,
            kmax: 20,
            nmax: None,
            window: 5,
            tol: 1e-10,
            mode: BridgeMode::Exact,
            format: Format::Text,
        }
    }
}

/// Default bound for bad periods.
pub const DEFAULT_BAD_PERIOD_NMAX: usize = 10;

/// Default word-length bound for specification numbers.
pub const DEFAULT_SPEC_NMAX: usize = 200;

/// Applies `key=value` config lines (`#` starts a comment) to `settings`.
pub fn apply_config(settings: &mut Settings, text: &str) -> Result<(), CliError> {
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| CliError::Domain(format!("config line {}: {what}", lineno + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad("expected key=value"))?;
        let (key, value) = (key.trim(), value.trim());
        let int = || {
            value
                .parse::<usize>()
                .map_err(|_| bad("expected an integer"))
        };
        match key {
            "cap" => settings.cap = Some(int()?),
            "kmax" => settings.kmax = int()?,
            "nmax" => settings.nmax = Some(int()?),
            "window" => settings.window = int()?,
            "tol" => {
                settings.tol = value
                    .parse::<f64>()
                    .ok()
                    .filter(|t| *t > 0.0)
                    .ok_or_else(|| bad("expected a positive number"))?
            }
            other => return Err(bad(&format!("unknown key `{other}`"))),
        }
    }
    Ok(())
}

/// Resolves settings from the config file (if any) and flags.
pub fn resolve_settings(g: &GlobalOpts) -> Result<Settings, CliError> {
    let mut s = Settings::default();
    if let Some(path) = &g.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
        apply_config(&mut s, &text)?;
    }
    if let Some(c) = g.cap {
        s.cap = Some(c);
    }
    if let Some(k) = g.kmax {
        s.kmax = k;
    }
    if let Some(n) = g.nmax {
        s.nmax = Some(n);
    }
    if let Some(w) = g.window {
        s.window = w;
    }
    if let Some(t) = g.tol {
        s.tol = t;
    }
    if g.at_most {
        s.mode = BridgeMode::AtMost;
    }
    s.format = if g.json {
        Format::Json
    } else if g.csv {
        Format::Csv
    } else {
        Format::Text
    };
    Ok(s)
}

impl Settings {
    fn entropy_options(&self) -> EntropyOptions<f64> {
        EntropyOptions {
            tol: self.tol,
            ..EntropyOptions::default()
        }
    }

    fn transitivity_options(&self) -> TransitivityOptions {
        TransitivityOptions {
            cap: self.cap,
            kmax: self.kmax,
        }
    }

    fn spec_options(&self) -> SpecOptions {
        SpecOptions {
            window: self.window,
            nmax: self.nmax.unwrap_or(DEFAULT_SPEC_NMAX),
            mode: self.mode,
        }
    }

    fn bad_period_nmax(&self) -> usize {
        self.nmax.unwrap_or(DEFAULT_BAD_PERIOD_NMAX)
    }
}

/// A hole as exact `p/q` strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HoleRecord {
    /// Left endpoint.
    pub a: String,
    /// Right endpoint.
    pub b: String,
}

/// Result of the full pipeline on one hole.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    /// The hole.
    pub hole: Option<HoleRecord>,
    /// Kneading pair of the hole.
    pub raw_pair: LexPair,
    /// Class of the kneading pair.
    pub class: PairClass,
    /// Normalised pair.
    pub normalized_pair: LexPair,
    /// Whether the subshift is of finite type.
    pub sft: bool,
    /// Entropy record.
    pub entropy: Entropy,
    /// Renormalisation verdict.
    pub renorm: RenormVerdict,
    /// Transitivity verdict.
    pub transitivity: TransitivityVerdict,
    /// Specification report (transitive periodic pairs only).
    pub spec: Option<SpecReport>,
    /// Bad periods of the hole.
    pub bad_periods: Vec<usize>,
    /// Landing indices of the endpoints.
    pub s_membership: SMembership,
}

fn hole_from(a: &str, b: &str) -> Result<Hole, CliError> {
    Ok(Hole::new(parse_rational(a)?, parse_rational(b)?)?)
}

fn pair_from(alpha: &str, beta: &str) -> Result<LexPair, CliError> {
    Ok(LexPair::parse(alpha, beta)?)
}

/// Runs the full pipeline on one hole.
pub fn analyze(h: &Hole, settings: &Settings) -> Result<AnalysisReport, CliError> {
    match validate_hole(h) {
        HoleClass::CentredCandidate => {}
        class => {
            return Err(CliError::Domain(format!(
                "hole ({}, {}) rejected: {class:?}",
                h.a(),
                h.b()
            )))
        }
    }
    let raw_pair = hole_to_pair(h)?;
    let class = classify(&raw_pair);
    let normalized_pair = normalize(&raw_pair)?;
    let entropy = entropy_with(&normalized_pair, &settings.entropy_options())?;
    let renorm = detect_renorm(
        &normalized_pair,
        settings
            .cap
            .unwrap_or_else(|| default_cap(&normalized_pair)),
    );
    let transitivity = transitivity(&normalized_pair, &settings.transitivity_options());
    let spec = (normalized_pair.is_periodic() && transitivity.is_transitive() == Some(true))
        .then(|| spec_report(&normalized_pair, &settings.spec_options()).ok())
        .flatten();
    Ok(AnalysisReport {
        hole: Some(HoleRecord {
            a: h.a().to_string(),
            b: h.b().to_string(),
        }),
        sft: is_sft(&normalized_pair),
        raw_pair,
        class,
        normalized_pair,
        entropy,
        renorm,
        transitivity,
        spec,
        bad_periods: bad_periods(h, settings.bad_period_nmax()),
        s_membership: s_membership(h)?,
    })
}

/// Parses a grid size `WxH`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Domain(format!("grid `{s}` is not of the form WxH"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: usize = w.trim().parse().map_err(|_| bad())?;
    let h: usize = h.trim().parse().map_err(|_| bad())?;
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

/// Interior grid points `aᵢ = 1/4 + i/(4(W+1))`, `bⱼ = 1/2 + j/(4(H+1))`,
/// ordered by `(a, b)`.
pub fn grid_holes(w: usize, h: usize) -> Vec<Hole> {
    let q = |n: usize, d: usize| Rational::new(n.into(), d.into());
    let mut out = Vec::with_capacity(w * h);
    for i in 1..=w {
        for j in 1..=h {
            let a = q(1, 4) + q(i, 4 * (w + 1));
            let b = q(1, 2) + q(j, 4 * (h + 1));
            out.push(Hole::new(a, b).expect("interior grid points form holes"));
        }
    }
    out
}

/// Uniform samples `x_i = 1/2 + i/(2(samples − 1))` and their staircase values.
pub fn staircase(samples: usize) -> Result<Vec<(Rational, Rational)>, CliError> {
    if samples < 2 {
        return Err(CliError::Domain(
            "staircase needs at least 2 samples".into(),
        ));
    }
    let xs: Vec<Rational> = (0..samples)
        .map(|i| {
            Rational::new(1.into(), 2.into()) + Rational::new(i.into(), (2 * (samples - 1)).into())
        })
        .collect();
    Ok(staircase_sample(&xs)?)
}

/// Flattens a JSON value into `path = value` lines.
fn text_lines(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let p = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                text_lines(&p, x, out);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                text_lines(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => {
            let _ = writeln!(out, "{prefix} = {s}");
        }
        other => {
            let _ = writeln!(out, "{prefix} = {other}");
        }
    }
}

/// Writes CSV records with a header row.
fn csv_table<R, F>(header: &[&str], rows: R) -> String
where
    R: IntoIterator<Item = Vec<F>>,
    F: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 fields")
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Renders a value: JSON compactly, text as flattened lines, CSV as
/// `key,value` rows of the flattened value.
pub fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => format!("{v}\n"),
        Format::Text => {
            let mut s = String::new();
            text_lines("", v, &mut s);
            s
        }
        Format::Csv => {
            let mut lines = String::new();
            text_lines("", v, &mut lines);
            csv_table(
                &["key", "value"],
                lines.lines().map(|l| {
                    let (k, x) = l.split_once(" = ").unwrap_or((l, ""));
                    vec![k, x]
                }),
            )
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn grid_csv(rows: &[Value]) -> String {
    let cols = [
        "a",
        "b",
        "class",
        "alpha",
        "beta",
        "sft",
        "h",
        "renorm",
        "transitivity",
        "error",
    ];
    csv_table(
        &cols,
        rows.iter().map(|r| {
            let get = |path: &[&str]| {
                let mut cur = r;
                for k in path {
                    match cur.get(*k) {
                        Some(x) => cur = x,
                        None => return String::new(),
                    }
                }
                scalar(cur)
            };
            vec![
                get(&["hole", "a"]),
                get(&["hole", "b"]),
                get(&["class", "class"]),
                get(&["normalized_pair", "alpha"]),
                get(&["normalized_pair", "beta"]),
                get(&["sft"]),
                get(&["entropy", "h"]),
                get(&["renorm", "verdict"]),
                get(&["transitivity", "verdict"]),
                get(&["error"]),
            ]
        }),
    )
}

fn parse_exponents(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Domain(format!("exponents `{s}` are not of the form j,k"));
    let (j, k) = s.split_once(',').ok_or_else(bad)?;
    Ok((
        j.trim().parse().map_err(|_| bad())?,
        k.trim().parse().map_err(|_| bad())?,
    ))
}

/// Largest period of essential pairs searched for family primes.
pub const FAMILY_PRIME_QMAX: usize = 7;

/// Executes a parsed command line, writing the output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let settings = resolve_settings(&cli.global)?;
    let fmt = settings.format;
    let emit = |out: &mut dyn Write, v: &Value| -> Result<(), CliError> {
        out.write_all(render(v, fmt).as_bytes())?;
        Ok(())
    };
    match &cli.command {
        Command::Analyze { a, b, grid } => match (a, b, grid) {
            (_, _, Some(g)) => {
                let (w, h) = parse_grid(g)?;
                let rows: Vec<Value> = grid_holes(w, h)
                    .par_iter()
                    .map(|hole| match analyze(hole, &settings) {
                        Ok(r) => to_value(&r),
                        Err(e) => json!({
                            "hole": {"a": hole.a().to_string(), "b": hole.b().to_string()},
                            "error": e.to_string(),
                        }),
                    })
                    .collect();
                if fmt == Format::Csv {
                    out.write_all(grid_csv(&rows).as_bytes())?;
                    Ok(())
                } else {
                    emit(out, &Value::Array(rows))
                }
            }
            (Some(a), Some(b), None) => {
                let report = analyze(&hole_from(a, b)?, &settings)?;
                emit(out, &to_value(&report))
            }
            _ => Err(CliError::Domain(
                "analyze needs `a b` or `--grid WxH`".into(),
            )),
        },
        Command::Staircase { samples, out: path } => {
            let s = csv_table(
                &["x", "y"],
                staircase(*samples)?
                    .iter()
                    .map(|(x, y)| vec![x.to_string(), y.to_string()]),
            );
            match path {
                Some(p) => fs::write(p, s)?,
                None => out.write_all(s.as_bytes())?,
            }
            Ok(())
        }
        Command::Badperiods { a, b } => {
            let h = hole_from(a, b)?;
            emit(out, &to_value(&hole_report(&h, settings.bad_period_nmax())))
        }
        Command::Entropy { alpha, beta } => {
            let p = pair_from(alpha, beta)?;
            let report = entropy_with(&p, &settings.entropy_options())?;
            let sft = is_sft(&p);
            let forbidden = if sft {
                Some(forbidden_factors(&p)?)
            } else {
                None
            };
            emit(
                out,
                &json!({
                    "pair": p,
                    "h": report.h,
                    "lower": report.lower,
                    "upper": report.upper,
                    "dim_H": report.dim_h,
                    "sft": sft,
                    "states": report.states,
                    "forbidden_factors": forbidden,
                }),
            )
        }
        Command::Transitive { alpha, beta } => {
            let p = pair_from(alpha, beta)?;
            let verdict = transitivity(&p, &settings.transitivity_options());
            emit(out, &json!({"pair": p, "transitivity": verdict}))?;
            match verdict {
                TransitivityVerdict::Unknown { cap } => Err(CliError::Inconclusive(format!(
                    "transitivity undecided (cap {cap})"
                ))),
                _ => Ok(()),
            }
        }
        Command::Renorm { alpha, beta } => {
            let p = pair_from(alpha, beta)?;
            let verdict = detect_renorm(&p, settings.cap.unwrap_or_else(|| default_cap(&p)));
            emit(out, &json!({"pair": p, "renorm": verdict}))?;
            match verdict {
                RenormVerdict::Inconclusive { cap } => Err(CliError::Inconclusive(format!(
                    "no renormalisation up to cap {cap}"
                ))),
                _ => Ok(()),
            }
        }
        Command::Sturmian { r } => {
            let (omega, nu) = sturmian_words(&parse_rational(r)?)?;
            emit(out, &json!({"omega": omega, "nu": nu}))
        }
        Command::Specnum { alpha, beta } => {
            let p = pair_from(alpha, beta)?;
            let report = spec_report(&p, &settings.spec_options())?;
            emit(out, &json!({"pair": p, "spec": report}))
        }
        Command::Specfamily {
            mode,
            stages,
            exponents,
        } => {
            let mode = match mode {
                FamilyArg::Spec => FamilyMode::Spec,
                FamilyArg::Nospec => {
                    let (j, k) = parse_exponents(exponents)?;
                    if j < 2 || k < 2 {
                        return Err(CliError::Domain("exponents must be at least 2".into()));
                    }
                    FamilyMode::NoSpec { exponents: (j, k) }
                }
            };
            let seed: (Word, Word) = ("011".parse()?, "100".parse()?);
            let primes = find_prime_chain(&seed, mode, *stages, FAMILY_PRIME_QMAX).ok_or_else(|| {
                CliError::Inconclusive(format!(
                    "no chain of {stages} primes among essential pairs with periods <= {FAMILY_PRIME_QMAX}"
                ))
            })?;
            let built = family_stages(&seed, &primes, mode, *stages)?;
            let mut family = vec![LexPair::parse("|110", "|001")?];
            family.extend(built.iter().map(|s| s.pair.clone()));
            let results = family_reports(&family, &settings.spec_options());
            let mut reports = Vec::new();
            let mut rows = Vec::new();
            for (i, (p, r)) in family.iter().zip(results).enumerate() {
                let (prime, bridge) = match i {
                    0 => (Value::Null, Value::Null),
                    _ => (to_value(&primes[i - 1]), to_value(&built[i - 1].bridge)),
                };
                let report = match r {
                    Ok(r) => {
                        reports.push(r.clone());
                        to_value(&r)
                    }
                    Err(e) => json!({"error": e.to_string()}),
                };
                rows.push(json!({"stage": i + 1, "pair": p, "prime": prime, "bridge": bridge, "report": report}));
            }
            let verdict = spec_verdict(&family, &reports);
            emit(
                out,
                &json!({"stages": rows, "verdict": verdict, "stage_count": family.len()}),
            )
        }
    }
}

/// Parses the process arguments, runs the command and returns the exit code.
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
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lexshift: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (Result<(), CliError>, String) {
        let cli = Cli::try_parse_from(std::iter::once("lexshift").chain(args.iter().copied()))
            .expect("valid command line");
        let mut buf = Vec::new();
        let r = execute(&cli, &mut buf);
        (r, String::from_utf8(buf).unwrap())
    }

    fn json_of(args: &[&str]) -> Value {
        let mut all = vec!["--json"];
        all.extend_from_slice(args);
        let (r, out) = run(&all);
        r.unwrap();
        serde_json::from_str(&out).unwrap()
    }

    #[test]
    fn sturmian_json() {
        let (r, out) = run(&["--json", "sturmian", "2/5"]);
        r.unwrap();
        assert_eq!(out, "{\"omega\":\"01010\",\"nu\":\"10010\"}\n");
    }

    #[test]
    fn entropy_json() {
        let v = json_of(&["entropy", "|110", "|001"]);
        let h = v["h"].as_f64().unwrap();
        assert!((h - 0.694_241_913_6).abs() < 1e-9);
        assert_eq!(v["sft"], true);
        assert_eq!(v["forbidden_factors"], json!(["000", "111"]));
    }

    #[test]
    fn transitive_json() {
        let v = json_of(&["transitive", "|1101000", "|0001101"]);
        assert_eq!(v["transitivity"]["verdict"], "NotTransitive");
    }

    #[test]
    fn analyze_examples() {
        let v = json_of(&["analyze", "2/5", "3/5"]);
        assert_eq!(v["sft"], true);
        assert_eq!(v["entropy"]["h"].as_f64().unwrap(), 0.0);
        assert_eq!(v["normalized_pair"]["alpha"], "|1100");

        let (r, _) = run(&["analyze", "1/5", "3/5"]);
        let e = r.unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("TrivialExceptional"));

        let v = json_of(&["analyze", "13/30", "17/30"]);
        assert_eq!(v["s_membership"]["n"], 3);
        assert_eq!(v["s_membership"]["m"], 3);
    }

    #[test]
    fn analyze_grid_is_ordered_and_deterministic() {
        let a = run(&["--json", "analyze", "--grid", "3x2"]).1;
        let b = run(&["--json", "analyze", "--grid", "3x2"]).1;
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        let holes: Vec<(Rational, Rational)> = v
            .as_array()
            .unwrap()
            .iter()
            .map(|r| {
                (
                    parse_rational(r["hole"]["a"].as_str().unwrap()).unwrap(),
                    parse_rational(r["hole"]["b"].as_str().unwrap()).unwrap(),
                )
            })
            .collect();
        assert_eq!(holes.len(), 6);
        assert!(holes.windows(2).all(|w| w[0] < w[1]));
        let csv = run(&["--csv", "analyze", "--grid", "3x2"]).1;
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn staircase_rows() {
        let (r, out) = run(&["staircase", "3"]);
        r.unwrap();
        let xs: Vec<&str> = out
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap())
            .collect();
        assert_eq!(xs, vec!["1/2", "3/4", "1"]);

        let (r, out) = run(&["staircase", "16"]);
        r.unwrap();
        assert!(out.lines().any(|l| l == "13/15,6/7"), "{out}");
        let ys: Vec<Rational> = out
            .lines()
            .skip(1)
            .map(|l| parse_rational(l.split(',').nth(1).unwrap()).unwrap())
            .collect();
        assert!(ys.windows(2).all(|w| w[0] <= w[1]));

        let (r, _) = run(&["staircase", "1"]);
        assert_eq!(r.unwrap_err().exit_code(), 2);
    }

    #[test]
    fn inconclusive_exit_code() {
        let (r, out) = run(&["--json", "renorm", "|1", "|0"]);
        assert_eq!(r.unwrap_err().exit_code(), 3);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["renorm"]["verdict"], "Inconclusive");
    }

    #[test]
    fn config_then_flags() {
        let mut s = Settings::default();
        apply_config(
            &mut s,
            "# caps\ncap = 7\nkmax=9\nnmax=4\nwindow=3\ntol=1e-8\n",
        )
        .unwrap();
        assert_eq!(
            (s.cap, s.kmax, s.nmax, s.window, s.tol),
            (Some(7), 9, Some(4), 3, 1e-8)
        );
        assert!(apply_config(&mut s, "bogus=1").is_err());
        assert!(apply_config(&mut s, "cap").is_err());

        let dir = std::env::temp_dir().join(format!("lexshift-cli-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("caps.conf");
        fs::write(&path, "kmax=9\ncap=7\n").unwrap();
        let g = GlobalOpts {
            config: Some(path),
            cap: Some(11),
            ..GlobalOpts::default()
        };
        let s = resolve_settings(&g).unwrap();
        assert_eq!((s.cap, s.kmax), (Some(11), 9));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn pair_literals_round_trip() {
        let v = json_of(&["renorm", "|110", "|001"]);
        let p = LexPair::parse(
            v["pair"]["alpha"].as_str().unwrap(),
            v["pair"]["beta"].as_str().unwrap(),
        )
        .unwrap();
        assert_eq!(p, LexPair::parse("|110", "|001").unwrap());
        // Non-canonical input prints canonically.
        let v = json_of(&["renorm", "1|101", "|001"]);
        assert_eq!(v["pair"]["alpha"], "|110");
    }

    #[test]
    fn text_output_is_flat() {
        let (r, out) = run(&["sturmian", "1/3"]);
        r.unwrap();
        assert_eq!(out, "omega = 010\nnu = 100\n");
    }
}
