//! Command-line front end.
//!
//! Every subcommand writes one output file (or stdout) atomically. Exit
//! codes: 0 success, 2 validation failure, 3 verification failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::certificate::{
    build_certificate, check_identities, esl_matrices, verify_identity, verify_structure, CertIndex,
    IdentityReport, IdentityStats, Multipliers, StructureReport,
};
use crate::dynamics::{cobweb_trace, phase_transition, rate_envelope, Regime};
use crate::gd::{
    adversarial_probe, curvature_switch_oracle, hard_instances, quadratic_oracle, run_gd, contraction,
    trajectory_csv, FunctionOracle, RunReport,
};
use crate::schedule::{
    build_schedule, infinite_prefix, ln_rate_sequence, log2_exact, occupation_measure, silver_rate,
    step_symbols,
};
use crate::twostep::{
    argmin_floor, chebyshev_pair, contour_grid, optimal_pair, quadratic_two_step_rate, rate_floor,
    rate_floor_terms, TwoStepSolution,
};
use crate::{fmt_g17, Error, Mp, Real};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

/// Precision used when none is requested and the gap 1 − z_n drops below
/// [`ESCALATION_GAP`].
pub const ESCALATION_BITS: usize = 128;
pub const ESCALATION_GAP: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "silver", version, about = "Silver stepsize schedules, rates and certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output path; stdout when omitted.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Output format (defaults per subcommand).
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Stepsizes for a power-of-two horizon or a prefix of the infinite schedule.
    Schedule(ScheduleArgs),
    /// Rates and their envelope for n = 1, 2, 4, …, 2^max_level.
    Rate(RateArgs),
    /// Builds and verifies a rate certificate.
    Certify(CertifyArgs),
    /// Runs gradient descent on test oracles.
    Simulate(SimulateArgs),
    /// Two-step optimum, rate floor and contour data.
    Twostep(TwostepArgs),
    /// Iterates of the one-dimensional rate map.
    Cobweb(CobwebArgs),
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, required_unless_present = "infinite")]
    pub n: Option<usize>,
    /// Also emit ψ-preimages, normalized pairs and the step pattern.
    #[arg(long)]
    pub normalized: bool,
    /// Emit a prefix of the infinite schedule instead.
    #[arg(long, requires = "count")]
    pub infinite: bool,
    #[arg(long)]
    pub count: Option<usize>,
    /// Mantissa bits; 53 or less selects f64.
    #[arg(long, env = "SILVER_PRECISION")]
    pub precision: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct RateArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, default_value_t = 14)]
    pub max_level: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, env = "SILVER_PRECISION")]
    pub precision: Option<usize>,
    /// Random trials per dimension in the identity check.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Comma-separated dimensions for the identity check.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 3])]
    pub dims: Vec<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, required_unless_present = "schedule_file")]
    pub kappa: Option<f64>,
    #[arg(long, required_unless_present = "schedule_file")]
    pub n: Option<usize>,
    /// Oracle spec, repeatable: quad:lambda=L, quad:spectrum=a,b,…,
    /// quad:d=D, switch:first|second|third|fourth, switch:breaks=-inf:M;t:m;…
    #[arg(long)]
    pub oracle: Vec<String>,
    /// Schedule JSON to run instead of the silver schedule.
    #[arg(long)]
    pub schedule_file: Option<PathBuf>,
    /// Also run the adversarial probe.
    #[arg(long)]
    pub adversarial: bool,
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    /// Starting point for 1-D oracles.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub x0: f64,
    /// CSV trajectory dump for the first 1-D oracle.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct TwostepArgs {
    #[arg(long)]
    pub m: f64,
    #[arg(long = "M")]
    pub big_m: f64,
    /// Contour grid resolution.
    #[arg(long)]
    pub contour: Option<usize>,
    #[arg(long, default_value = "contour.csv")]
    pub contour_file: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct CobwebArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, default_value_t = 12)]
    pub iters: usize,
    #[command(flatten)]
    pub common: Common,
}

/// Library error that maps to an exit code.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ValidationError(pub String);

/// Runs a parsed command and returns its exit code. Validation failures
/// come back as `Err` wrapping [`ValidationError`] or [`Error`].
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Schedule(a) => cmd_schedule(&a),
        Command::Rate(a) => cmd_rate(&a),
        Command::Certify(a) => cmd_certify(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Twostep(a) => cmd_twostep(&a),
        Command::Cobweb(a) => cmd_cobweb(&a),
    }
}

/// Exit code for an error returned by [`run`].
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<Error>().is_some() || err.downcast_ref::<ValidationError>().is_some() {
        EXIT_VALIDATION
    } else {
        1
    }
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    ValidationError(msg.into()).into()
}

// ---------------------------------------------------------------- output

/// Renders a serializable value as pretty JSON with every float printed
/// to 17 significant digits.
pub fn to_json_g17<S: Serialize>(value: &S) -> anyhow::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_json(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

/// Single-line variant of [`to_json_g17`], for JSON lines.
pub fn to_json_line<S: Serialize>(value: &S) -> anyhow::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_compact(&mut out, &v);
    out.push('\n');
    Ok(out)
}

fn write_number(out: &mut String, n: &serde_json::Number) {
    match (n.as_i64(), n.as_u64(), n.as_f64()) {
        (Some(i), _, _) if !n.is_f64() => out.push_str(&i.to_string()),
        (_, Some(u), _) if !n.is_f64() => out.push_str(&u.to_string()),
        (_, _, Some(f)) => out.push_str(&fmt_g17(f)),
        _ => out.push_str(&n.to_string()),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_compact(out: &mut String, v: &Value) {
    match v {
        Value::Number(n) => write_number(out, n),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_compact(out, x);
            }
            out.push(']');
        }
        Value::Object(o) => {
            out.push('{');
            for (i, (k, x)) in o.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_compact(out, x);
            }
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

fn write_json(out: &mut String, v: &Value, depth: usize) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Array(a) if a.iter().all(is_scalar) => write_compact(out, v),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_json(out, x, depth + 1);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(o) if o.is_empty() => out.push_str("{}"),
        Value::Object(o) => {
            out.push_str("{\n");
            for (i, (k, x)) in o.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_json(out, x, depth + 1);
                out.push_str(if i + 1 < o.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        other => write_compact(out, other),
    }
}

/// Writes `contents` to `path` via a temporary file in the same directory
/// and a rename, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()?;
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)
                .with_context(|| format!("creating temporary file in {}", dir.display()))?;
            tmp.write_all(contents.as_bytes())?;
            tmp.flush()?;
            tmp.persist(p)
                .with_context(|| format!("writing {}", p.display()))?;
        }
    }
    Ok(())
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

// ---------------------------------------------------------------- precision

/// Resolves the working precision: an explicit request wins; otherwise f64
/// unless the gap at horizon n falls below [`ESCALATION_GAP`].
fn resolve_bits(requested: Option<usize>, kappa: f64, n: usize) -> anyhow::Result<usize> {
    if let Some(b) = requested {
        if b == 0 {
            bail!(invalid("precision must be positive"));
        }
        return Ok(b);
    }
    let levels = n.max(1).trailing_zeros();
    let ln_u = crate::schedule::ln_gap_sequence(kappa, levels)?;
    let gap = ln_u.last().expect("nonempty").exp();
    Ok(if gap < ESCALATION_GAP { ESCALATION_BITS } else { 53 })
}

fn uses_f64(bits: usize) -> bool {
    bits <= 53
}

// ---------------------------------------------------------------- schedule

/// Normalized pair for one level, as written by `schedule --normalized`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub level: u32,
    pub y: f64,
    pub z: f64,
    pub u: f64,
}

/// Schedule file: `{"kappa", "n", "steps", "normalized", "tau"}` plus
/// optional extras.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub kappa: f64,
    pub n: usize,
    pub steps: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ln_tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infinite: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<PairRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupation: Option<Vec<(String, f64)>>,
}

pub fn read_schedule_file(path: &Path) -> anyhow::Result<ScheduleFile> {
    let f: ScheduleFile = serde_json::from_str(&read_text(path)?)
        .with_context(|| format!("parsing schedule file {}", path.display()))?;
    if f.steps.is_empty() || f.steps.len() != f.n {
        bail!(invalid(format!(
            "schedule file {}: n = {} but {} steps",
            path.display(),
            f.n,
            f.steps.len()
        )));
    }
    Ok(f)
}

fn schedule_file<T: Real>(kappa: &T, n: usize, normalized: bool) -> crate::Result<ScheduleFile> {
    let s = build_schedule(kappa, n)?;
    let mut f = ScheduleFile {
        kappa: kappa.to_f64(),
        n,
        steps: s.steps_f64(),
        normalized: None,
        tau: Some(s.tau.to_f64()),
        ln_tau: Some(s.tau.ln_abs()),
        precision_bits: Some(kappa.precision_bits()),
        infinite: None,
        pairs: None,
        symbols: None,
        occupation: None,
    };
    if normalized {
        f.normalized = Some(s.normalized.iter().map(Real::to_f64).collect());
        f.pairs = Some(
            s.pairs
                .iter()
                .map(|p| PairRow {
                    level: p.level,
                    y: p.y.to_f64(),
                    z: p.z.to_f64(),
                    u: p.u.to_f64(),
                })
                .collect(),
        );
        f.symbols = Some(step_symbols(n)?.iter().map(|s| s.to_string()).collect());
        f.occupation = Some(
            occupation_measure(n)?
                .into_iter()
                .map(|(s, w)| (s.to_string(), w))
                .collect(),
        );
    }
    Ok(f)
}

fn infinite_file<T: Real>(kappa: &T, count: usize) -> crate::Result<ScheduleFile> {
    let steps: Vec<f64> = infinite_prefix(kappa, count)?.iter().map(Real::to_f64).collect();
    Ok(ScheduleFile {
        kappa: kappa.to_f64(),
        n: count,
        steps,
        normalized: None,
        tau: None,
        ln_tau: None,
        precision_bits: Some(kappa.precision_bits()),
        infinite: Some(true),
        pairs: None,
        symbols: None,
        occupation: None,
    })
}

pub fn cmd_schedule(a: &ScheduleArgs) -> anyhow::Result<i32> {
    crate::schedule::check_kappa(&a.kappa)?;
    let file = if a.infinite {
        let count = a.count.ok_or_else(|| invalid("--infinite requires --count"))?;
        let bits = a.precision.unwrap_or(53);
        if uses_f64(bits) {
            infinite_file(&a.kappa, count)?
        } else {
            infinite_file(&Mp::new(a.kappa, bits), count)?
        }
    } else {
        let n = a.n.ok_or_else(|| invalid("--n is required"))?;
        log2_exact(n)?;
        let bits = resolve_bits(a.precision, a.kappa, n)?;
        if uses_f64(bits) {
            schedule_file(&a.kappa, n, a.normalized)?
        } else {
            schedule_file(&Mp::new(a.kappa, bits), n, a.normalized)?
        }
    };
    if a.common.format == Some(Format::Csv) {
        let mut out = String::from("t,step\n");
        for (t, s) in file.steps.iter().enumerate() {
            out.push_str(&format!("{t},{}\n", fmt_g17(*s)));
        }
        write_output(a.common.output.as_deref(), &out)?;
    } else {
        write_output(a.common.output.as_deref(), &to_json_g17(&file)?)?;
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- rate

/// One row of `rate` output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub tau: f64,
    /// (1/n) ln τ_n.
    pub avg_log_rate: f64,
    pub lower: f64,
    pub upper: f64,
    pub regime: Regime,
}

pub const RATE_CSV_HEADER: &str = "n,tau,avg_log_rate,lower,upper,regime";

pub fn rate_rows(kappa: f64, max_level: u32) -> crate::Result<Vec<RateRow>> {
    let ln_tau = ln_rate_sequence(kappa, max_level)?;
    phase_transition(kappa)?;
    (0..=max_level)
        .map(|l| {
            let n = 1usize << l;
            let env = rate_envelope(kappa, n)?;
            Ok(RateRow {
                n,
                tau: ln_tau[l as usize].exp(),
                avg_log_rate: ln_tau[l as usize] / n as f64,
                lower: env.lower(),
                upper: env.upper(),
                regime: env.regime,
            })
        })
        .collect()
}

pub fn rate_csv(rows: &[RateRow]) -> String {
    let mut out = format!("{RATE_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            fmt_g17(r.tau),
            fmt_g17(r.avg_log_rate),
            fmt_g17(r.lower),
            fmt_g17(r.upper),
            r.regime
        ));
    }
    out
}

pub fn read_rate_csv(text: &str) -> anyhow::Result<Vec<RateRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(RATE_CSV_HEADER) {
        bail!(invalid("rate CSV header mismatch"));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 6 {
                bail!(invalid(format!("bad rate row {l:?}")));
            }
            let regime = match f[5] {
                "acceleration" => Regime::Acceleration,
                "saturation" => Regime::Saturation,
                other => bail!(invalid(format!("bad regime {other:?}"))),
            };
            Ok(RateRow {
                n: f[0].parse()?,
                tau: f[1].parse()?,
                avg_log_rate: f[2].parse()?,
                lower: f[3].parse()?,
                upper: f[4].parse()?,
                regime,
            })
        })
        .collect()
}

pub fn cmd_rate(a: &RateArgs) -> anyhow::Result<i32> {
    if a.max_level > 60 {
        bail!(invalid("max-level must be at most 60"));
    }
    let rows = rate_rows(a.kappa, a.max_level)?;
    let text = match a.common.format {
        Some(Format::Json) => to_json_g17(&rows)?,
        _ => rate_csv(&rows),
    };
    write_output(a.common.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- certify

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryRow {
    pub i: String,
    pub j: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub n: usize,
    pub scale_convention: String,
    pub entries: Vec<EntryRow>,
}

impl CertificateJson {
    pub fn from_multipliers<T: Real>(m: &Multipliers<T>) -> Self {
        CertificateJson {
            n: m.n,
            scale_convention: m.scale_convention.clone(),
            entries: m
                .entries
                .iter()
                .map(|(&(i, j), v)| EntryRow {
                    i: i.to_string(),
                    j: j.to_string(),
                    value: v.to_f64(),
                })
                .collect(),
        }
    }

    pub fn to_multipliers(&self) -> crate::Result<Multipliers<f64>> {
        let mut entries = crate::certificate::Entries::new();
        for e in &self.entries {
            entries.insert((CertIndex::parse(&e.i)?, CertIndex::parse(&e.j)?), e.value);
        }
        let mut m = Multipliers::new(self.n, entries);
        m.scale_convention = self.scale_convention.clone();
        Ok(m)
    }
}

/// E − S − L check for one gluing step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EslRow {
    /// Input size; the step builds the certificate for 2n.
    pub n: usize,
    pub residual: f64,
    pub scale: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub identity: f64,
    pub structure: f64,
    pub esl_relative: f64,
    pub identities: f64,
    /// Precision of the E − S − L and product-identity checks.
    pub algebra_bits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub structure: StructureReport,
    pub identity: Vec<IdentityStats>,
    pub esl: Vec<EslRow>,
    #[serde(default)]
    pub identities: Option<IdentityReport>,
    pub tolerances: Tolerances,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyFile {
    pub kappa: f64,
    pub n: usize,
    pub precision_bits: usize,
    pub tau: f64,
    pub ln_tau: f64,
    pub certificate: CertificateJson,
    pub report: CertifyReport,
}

pub fn read_certify_file(path: &Path) -> anyhow::Result<CertifyFile> {
    serde_json::from_str(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// Precision for the E − S − L and product identities. The optimum-row
/// entries are of order τ_n, so the working precision must resolve τ_n
/// with a margin.
pub fn algebra_bits(bits: usize, ln_tau: f64) -> usize {
    let resolve = (-ln_tau / std::f64::consts::LN_2).ceil().max(0.0) as usize + 128;
    bits.max(192).max(resolve)
}

/// Builds, verifies and reports a certificate at the precision of `kappa`.
pub fn certify<T: Real>(kappa: &T, n: usize, trials: usize, dims: &[usize], seed: u64) -> crate::Result<CertifyFile> {
    let bits = kappa.precision_bits();
    let f64_path = bits <= 53;
    let tol_identity = if f64_path { 1e-8 } else { 1e-20 };
    let tol_structure = if f64_path { 1e-10 } else { 1e-20 };
    let schedule = build_schedule(kappa, n)?;
    let algebra_bits = algebra_bits(bits, schedule.tau.ln_abs());
    let tolerances = Tolerances {
        identity: tol_identity,
        structure: tol_structure,
        esl_relative: 1e-10,
        identities: 1e-10,
        algebra_bits,
    };
    let cert = build_certificate(kappa, n)?;
    let structure = verify_structure(&cert, tol_structure);
    let mut identity = Vec::new();
    for (k, &d) in dims.iter().enumerate() {
        identity.push(verify_identity(
            &schedule,
            &cert,
            &schedule.tau,
            trials,
            d,
            seed.wrapping_add(k as u64),
        )?);
    }
    let hp = Mp::new(kappa.to_f64(), algebra_bits);
    let mut esl = Vec::new();
    let mut m = 1;
    while m < n {
        let e = esl_matrices(&hp, m)?;
        esl.push(EslRow {
            n: m,
            residual: e.residual,
            scale: e.scale,
            passed: e.residual <= tolerances.esl_relative * e.scale.max(f64::MIN_POSITIVE),
        });
        m *= 2;
    }
    let identities = if n >= 4 {
        Some(check_identities(&hp, n)?)
    } else {
        None
    };
    let passed = structure.passed
        && identity.iter().all(|s| s.passes(tol_identity))
        && esl.iter().all(|e| e.passed)
        && identities
            .as_ref()
            .is_none_or(|r| r.max_rel_error() <= tolerances.identities);
    Ok(CertifyFile {
        kappa: kappa.to_f64(),
        n,
        precision_bits: bits,
        tau: schedule.tau.to_f64(),
        ln_tau: schedule.tau.ln_abs(),
        certificate: CertificateJson::from_multipliers(&cert),
        report: CertifyReport {
            structure,
            identity,
            esl,
            identities,
            tolerances,
            passed,
        },
    })
}

pub fn cmd_certify(a: &CertifyArgs) -> anyhow::Result<i32> {
    crate::schedule::check_kappa(&a.kappa)?;
    if a.kappa == 2.0 {
        bail!(Error::KappaTwo);
    }
    log2_exact(a.n)?;
    if a.trials == 0 || a.dims.is_empty() || a.dims.contains(&0) {
        bail!(invalid("trials and dims must be positive"));
    }
    let bits = resolve_bits(a.precision, a.kappa, a.n)?;
    let file = if uses_f64(bits) {
        certify(&a.kappa, a.n, a.trials, &a.dims, a.common.seed)?
    } else {
        certify(&Mp::new(a.kappa, bits), a.n, a.trials, &a.dims, a.common.seed)?
    };
    write_output(a.common.output.as_deref(), &to_json_g17(&file)?)?;
    Ok(if file.report.passed {
        EXIT_OK
    } else {
        eprintln!("certificate verification failed; report written");
        EXIT_VERIFICATION
    })
}

// ---------------------------------------------------------------- simulate

/// A parsed `--oracle` value, built against m = 1/κ, M = 1.
pub fn parse_oracle(spec: &str, kappa: f64, first_step: f64, seed: u64) -> anyhow::Result<Box<dyn FunctionOracle>> {
    let (m, big_m) = (1.0 / kappa, 1.0);
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| invalid(format!("oracle spec {spec:?} must look like kind:params")))?;
    let bad = || invalid(format!("unrecognized oracle spec {spec:?}"));
    match kind {
        "quad" => {
            let (key, val) = rest.split_once('=').ok_or_else(bad)?;
            let spectrum: Vec<f64> = match key {
                "lambda" => vec![val.parse().map_err(|_| bad())?],
                "spectrum" => val
                    .split(',')
                    .map(|s| s.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad())?,
                "d" => {
                    let d: usize = val.parse().map_err(|_| bad())?;
                    if d == 0 {
                        return Err(bad());
                    }
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                    (0..d)
                        .map(|i| match (i, d) {
                            (0, _) => m,
                            (1, _) => big_m,
                            _ => {
                                let t: f64 = rand::Rng::gen(&mut rng);
                                (m.ln() + t * (big_m / m).ln()).exp()
                            }
                        })
                        .collect()
                }
                _ => return Err(bad()),
            };
            Ok(Box::new(quadratic_oracle(&spectrum, m, big_m, seed)?))
        }
        "switch" => {
            let hard = hard_instances(m, big_m, first_step)?;
            let pick = |i: usize| -> Box<dyn FunctionOracle> { Box::new(hard[i].clone()) };
            match rest {
                "first" => Ok(pick(0)),
                "second" => Ok(pick(1)),
                "third" => Ok(pick(2)),
                "fourth" => Ok(pick(3)),
                _ => {
                    let list = rest.strip_prefix("breaks=").ok_or_else(bad)?;
                    let mut breaks = Vec::new();
                    for part in list.split(';') {
                        let (t, c) = part.split_once(':').ok_or_else(bad)?;
                        let t: f64 = if t == "-inf" { f64::NEG_INFINITY } else { t.parse().map_err(|_| bad())? };
                        let c = match c {
                            "m" => m,
                            "M" => big_m,
                            _ => return Err(bad()),
                        };
                        breaks.push((t, c));
                    }
                    Ok(Box::new(curvature_switch_oracle(&breaks, m, big_m)?))
                }
            }
        }
        _ => Err(bad()),
    }
}

pub fn read_run_reports(text: &str) -> anyhow::Result<Vec<RunReport>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Into::into))
        .collect()
}

pub fn cmd_simulate(a: &SimulateArgs) -> anyhow::Result<i32> {
    let (kappa, steps, id, tau) = match &a.schedule_file {
        Some(p) => {
            let f = read_schedule_file(p)?;
            let kappa = a.kappa.unwrap_or(f.kappa);
            let tau = match f.tau {
                Some(t) => t,
                None => silver_rate(&kappa, f.n.next_power_of_two())?.tau,
            };
            (kappa, f.steps, format!("file:{}", p.display()), tau)
        }
        None => {
            let kappa = a.kappa.ok_or_else(|| invalid("--kappa is required"))?;
            let n = a.n.ok_or_else(|| invalid("--n is required"))?;
            let s = build_schedule(&kappa, n)?;
            (kappa, s.steps, format!("silver(kappa={},n={n})", fmt_g17(kappa)), s.tau)
        }
    };
    crate::schedule::check_kappa(&kappa)?;
    if a.oracle.is_empty() && !a.adversarial {
        bail!(invalid("give at least one --oracle or --adversarial"));
    }
    let mut out = String::new();
    let mut dumped = false;
    for (k, spec) in a.oracle.iter().enumerate() {
        let o = parse_oracle(spec, kappa, steps[0], a.common.seed.wrapping_add(k as u64))?;
        let x0: Vec<f64> = if o.dim() == 1 {
            vec![a.x0]
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.common.seed);
            (0..o.dim()).map(|_| StandardNormal.sample(&mut rng)).collect()
        };
        let traj = run_gd(o.as_ref(), &x0, &steps)?;
        let c = contraction(&traj, &o.minimizer())?;
        let report = RunReport::new(&id, &o.description(), steps.len(), c, tau);
        out.push_str(&to_json_line(&report)?);
        if let (Some(p), 1, false) = (&a.trajectory, o.dim(), dumped) {
            write_output(Some(p), &trajectory_csv(&traj))?;
            dumped = true;
        }
    }
    if a.adversarial {
        let probe = adversarial_probe(kappa, steps.len(), &steps, a.budget, a.common.seed)?;
        let mut r = probe.worst;
        r.schedule_id = id.clone();
        r.oracle = format!("probe[{} evals]: {}", probe.evaluations, r.oracle);
        r.tau_n = tau;
        r.slack = tau - r.contraction;
        out.push_str(&to_json_line(&r)?);
    }
    write_output(a.common.output.as_deref(), &out)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- twostep

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwostepFile {
    pub solution: TwoStepSolution,
    /// Rate floor terms at (α*, β*).
    pub floor_terms: [f64; 4],
    pub floor: f64,
    /// Rate floor with the order reversed, (β*, α*).
    pub floor_reversed: f64,
    /// Brute-force minimizer (α, β, value) of the rate floor.
    pub argmin: (f64, f64, f64),
    pub chebyshev: (f64, f64),
    pub chebyshev_floor: f64,
    pub chebyshev_quadratic_rate: f64,
}

pub fn read_twostep_file(path: &Path) -> anyhow::Result<TwostepFile> {
    serde_json::from_str(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

pub fn twostep_file(m: f64, big_m: f64) -> crate::Result<TwostepFile> {
    let s = optimal_pair(m, big_m)?;
    let cheb = chebyshev_pair(m, big_m)?;
    Ok(TwostepFile {
        floor_terms: rate_floor_terms(s.alpha_star, s.beta_star, m, big_m),
        floor: rate_floor(s.alpha_star, s.beta_star, m, big_m)?,
        floor_reversed: rate_floor(s.beta_star, s.alpha_star, m, big_m)?,
        argmin: argmin_floor(m, big_m, 64, 12)?,
        chebyshev: cheb,
        chebyshev_floor: rate_floor(cheb.0, cheb.1, m, big_m)?,
        chebyshev_quadratic_rate: quadratic_two_step_rate(cheb.0, cheb.1, m, big_m),
        solution: s,
    })
}

pub fn cmd_twostep(a: &TwostepArgs) -> anyhow::Result<i32> {
    let file = twostep_file(a.m, a.big_m)?;
    write_output(a.common.output.as_deref(), &to_json_g17(&file)?)?;
    if let Some(res) = a.contour {
        let grid = contour_grid(a.m, a.big_m, res)?;
        let mut csv = String::from("alpha,beta,rate\n");
        for c in grid {
            csv.push_str(&format!("{},{},{}\n", fmt_g17(c.alpha), fmt_g17(c.beta), fmt_g17(c.rate)));
        }
        write_output(Some(&a.contour_file), &csv)?;
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- cobweb

pub fn cmd_cobweb(a: &CobwebArgs) -> anyhow::Result<i32> {
    let trace = cobweb_trace(a.kappa, a.iters)?;
    let text = match a.common.format {
        Some(Format::Json) => to_json_g17(&trace)?,
        _ => {
            let mut s = String::from("i,h,h_next,gap\n");
            for (i, (h, next)) in trace.pairs().into_iter().enumerate() {
                s.push_str(&format!("{i},{},{},{}\n", fmt_g17(h), fmt_g17(next), fmt_g17(trace.gap[i])));
            }
            s
        }
    };
    write_output(a.common.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}
