//! Command-line experiment runner.
//!
//! Every subcommand writes JSON or CSV to `--out` (or stdout). Exit status is
//! 0 on success, 1 for bad input and 2 for I/O failures.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::diophantine::{badly_approx_classify, AlphaRep};
use crate::dynsys::{DynSystem, TorusPoint};
use crate::error::{Error, Result};
use crate::output::{json_err, to_json};
use crate::potential::{
    flatten_along_tube, gordon_certify, gordon_gap_verify, gordon_gap_verify_base, omega_f_tube_sample,
    periodic_approximant, sample_potential, PotentialWindow, SampleFn, DEFAULT_C,
};
use crate::repetition::{prp_probe, qk_divergence_check, rp_search, theorem4_probe};
use crate::spectrum::{build_truncation, covariance_check, spectrum_report};
use crate::transfer::{aux1_suite, aux2_suite, gordon_lower_bound_probe, propagate, ProbeReport, StateVec};

/// Environment variable for the worker pool size when `--threads` is absent.
pub const THREADS_ENV: &str = "GORDONLAB_THREADS";

const EXAMPLES: &str = "\
Examples:
  gordonlab orbit --system skew --alpha rational:1/4 --omega 0.1,0.2 --from 0 --to 2
  gordonlab rp-search --system rotation --alpha golden --omega 0 --epsilon 0.01 --r 2 --qmax 100
  gordonlab rp-search --system skew --alpha golden --omega 0,0 --epsilon 0.05 --r 1 --qmax 2000
  gordonlab prp-probe --system rotation --alpha golden --omega 0 --kmax 5 --qmax 10000
  gordonlab prp-probe --system skew --alpha golden --omega 0,0 --kmax 3 --qmax 2000
  gordonlab theorem4 --alpha liouville:4 --omega 0.1,0.2 --kmax 3 --qmax 2000
  gordonlab classify-alpha --alpha liouville:4 --horizon 100000
  gordonlab classify-alpha --alpha golden --horizon 100000
  gordonlab sample-potential --system rotation --alpha rational:1/2 --f cos:0 --lo 0 --hi 4
  gordonlab gordon-certify --system none --periodic 1,-1 --q 2,4,6 --C 1
  gordonlab gordon-certify --system rotation --alpha liouville:3 --f cos:0 --q 10 --C 2
  gordonlab approximant --system rotation --alpha liouville:3 --q 10 --m 1
  gordonlab flatten --alpha golden --k 3 --f cos:0
  gordonlab gordon-gap --alpha golden --k 3 --j 1
  gordonlab propagate --system none --constant 0 --energy 0 --psi0 1,0 --n 1
  gordonlab gordon-probe --system none --periodic 0,1 --e-min -3 --e-max 3 --e-count 16 --T 2,4,6,8
  gordonlab aux1-suite --cases 1000 --max-len 20 --seed 1
  gordonlab aux2-suite --cases 10000 --seed 1
  gordonlab spectrum --system none --constant 0 --N 3
  gordonlab covariance --system skew --alpha golden --omega 0.3,0.6 --f cos:1 --t -3 --N 32

Any flag may also come from --config FILE.json, an object whose keys are flag
names (plus an optional \"subcommand\"); flags given on the command line win.
The worker pool size is --threads, else $GORDONLAB_THREADS, else all cores.";

#[derive(Parser, Debug)]
#[command(name = "gordonlab", version, about = "Experiments with Schrödinger operators over torus dynamics", after_help = EXAMPLES)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SystemKind {
    Rotation,
    Skew,
    None,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// rotation, skew or none
    #[arg(long, value_enum, default_value = "rotation")]
    system: SystemKind,
    /// Rotation number (golden, rational:p/q, liouville:J, float:x, cf:a0;a1,a2); repeat for 𝕋^d
    #[arg(long)]
    alpha: Vec<String>,
    /// Base point, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    omega: Vec<f64>,
    /// Output file (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct PotentialArgs {
    /// Sampling function: cos:i, sinsum or const:c
    #[arg(long = "f", default_value = "cos:0")]
    f: String,
    /// Constant potential (no system needed)
    #[arg(long, allow_negative_numbers = true)]
    constant: Option<f64>,
    /// Periodic potential V(n) = values[n mod p]
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    periodic: Vec<f64>,
    /// CSV file with columns n, V
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Orbit points T^n ω
    Orbit {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        from: i64,
        #[arg(long, default_value_t = 10, allow_negative_numbers = true)]
        to: i64,
    },
    /// Smallest q with a repetition certificate at (epsilon, r)
    RpSearch {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        r: u64,
        #[arg(long, default_value_t = 10_000)]
        qmax: u64,
    },
    /// Certificates at levels eps = 1/k, r = k
    PrpProbe {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        kmax: u64,
        #[arg(long, default_value_t = 10_000)]
        qmax: u64,
    },
    /// Diophantine classification next to a skew-shift probe
    Theorem4 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        kmax: u64,
        #[arg(long, default_value_t = 2000)]
        qmax: u64,
        #[arg(long, default_value_t = 100_000)]
        horizon: u64,
    },
    /// Evidence for or against alpha being badly approximable
    ClassifyAlpha {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        horizon: u64,
    },
    /// V(n) = f(T^n ω) as CSV
    SamplePotential {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, default_value_t = -10, allow_negative_numbers = true)]
        lo: i64,
        #[arg(long, default_value_t = 10)]
        hi: i64,
    },
    /// Gordon deviations against C m^{-q_m}
    GordonCertify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<u64>,
        #[arg(long = "C", default_value_t = DEFAULT_C)]
        c: f64,
    },
    /// Periodic approximant V_m and its residuals
    Approximant {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        m: u64,
    },
    /// Lock f on the tube around the orbit of alpha
    Flatten {
        #[command(flatten)]
        common: Common,
        #[arg(long = "f", default_value = "cos:0")]
        f: String,
        #[arg(long)]
        k: u64,
        /// Defaults to the certificate found at level k
        #[arg(long)]
        qk: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        qmax: u64,
    },
    /// Gap check at a tube sample point
    GordonGap {
        #[command(flatten)]
        common: Common,
        #[arg(long = "f", default_value = "cos:0")]
        f: String,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        qk: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        qmax: u64,
        #[arg(long, default_value_t = 1)]
        j: u64,
        /// Offset from the tube center, in units of the tube radius
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        offset: f64,
        /// Evaluate the original f instead of the flattened one
        #[arg(long)]
        unflattened: bool,
    },
    /// Ψ(n) from Ψ(0) by transfer matrices
    Propagate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, allow_negative_numbers = true)]
        energy: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        energy_im: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.0], allow_negative_numbers = true)]
        psi0: Vec<f64>,
        #[arg(long, allow_negative_numbers = true)]
        n: i64,
    },
    /// Growth ratios max_a ||Ψ(aT)|| / ||Ψ(0)|| over an energy grid
    GordonProbe {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        energies: Vec<f64>,
        #[arg(long, allow_negative_numbers = true)]
        e_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        e_max: Option<f64>,
        #[arg(long)]
        e_count: Option<usize>,
        #[arg(long = "T", value_delimiter = ',', required = true)]
        t: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.0], allow_negative_numbers = true)]
        psi0: Vec<f64>,
    },
    /// Randomized telescoping-bound suite
    Aux1Suite {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        cases: u64,
        #[arg(long, default_value_t = 20)]
        max_len: usize,
    },
    /// Randomized four-power bound suite
    Aux2Suite {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        cases: u64,
    },
    /// Eigenvalues, residuals and IPR of a finite section
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long = "N", default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        center: i64,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
    },
    /// Covariance of the operator family under the shift
    Covariance {
        #[command(flatten)]
        common: Common,
        #[arg(long = "f", default_value = "cos:0")]
        f: String,
        #[arg(long, allow_negative_numbers = true)]
        t: i64,
        #[arg(long = "N", default_value_t = 64)]
        n: usize,
    },
}

impl Cmd {
    fn common(&self) -> &Common {
        match self {
            Cmd::Orbit { common, .. }
            | Cmd::RpSearch { common, .. }
            | Cmd::PrpProbe { common, .. }
            | Cmd::Theorem4 { common, .. }
            | Cmd::ClassifyAlpha { common, .. }
            | Cmd::SamplePotential { common, .. }
            | Cmd::GordonCertify { common, .. }
            | Cmd::Approximant { common, .. }
            | Cmd::Flatten { common, .. }
            | Cmd::GordonGap { common, .. }
            | Cmd::Propagate { common, .. }
            | Cmd::GordonProbe { common, .. }
            | Cmd::Aux1Suite { common, .. }
            | Cmd::Aux2Suite { common, .. }
            | Cmd::Spectrum { common, .. }
            | Cmd::Covariance { common, .. } => common,
        }
    }
}

/// Subcommand name plus flag values, as stored in a `--config` file.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub subcommand: Option<String>,
    pub entries: BTreeMap<String, Value>,
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(json_err)?;
        let Value::Object(map) = v else {
            return Err(Error::InvalidArgument("config must be a JSON object".into()));
        };
        let mut entries: BTreeMap<String, Value> = map.into_iter().collect();
        let subcommand = match entries.remove("subcommand") {
            Some(Value::String(s)) => Some(s),
            None => None,
            Some(_) => return Err(Error::InvalidArgument("subcommand must be a string".into())),
        };
        Ok(ExperimentConfig { subcommand, entries })
    }

    pub fn to_text(&self) -> String {
        let mut map = serde_json::Map::new();
        for (k, v) in &self.entries {
            map.insert(k.clone(), v.clone());
        }
        if let Some(s) = &self.subcommand {
            map.insert("subcommand".into(), Value::String(s.clone()));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("map serializes");
        s.push('\n');
        s
    }

    /// Flags for every entry not already named in `explicit`.
    fn to_args(&self, explicit: &[String]) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for (k, v) in &self.entries {
            if explicit.iter().any(|e| e == k) {
                continue;
            }
            let flag = format!("--{k}");
            match v {
                Value::Bool(true) => out.push(flag),
                Value::Bool(false) | Value::Null => {}
                Value::Array(items) => {
                    let parts: Vec<String> = items.iter().map(scalar_text).collect::<Result<_>>()?;
                    out.push(format!("{flag}={}", parts.join(",")));
                }
                other => out.push(format!("{flag}={}", scalar_text(other)?)),
            }
        }
        Ok(out)
    }
}

fn scalar_text(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(Error::InvalidArgument(format!("unsupported config value {v}"))),
    }
}

fn flag_name(arg: &str) -> Option<String> {
    let body = arg.strip_prefix("--")?;
    Some(body.split('=').next().unwrap_or(body).to_string())
}

/// Splices `--config FILE` into plain flags.
fn expand_config(argv: &[String]) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config_path = None;
    let mut i = 0;
    while i < argv.len() {
        let a = &argv[i];
        if a == "--config" {
            let p = argv
                .get(i + 1)
                .ok_or_else(|| Error::InvalidArgument("--config needs a path".into()))?;
            config_path = Some(PathBuf::from(p));
            i += 2;
            continue;
        }
        if let Some(p) = a.strip_prefix("--config=") {
            config_path = Some(PathBuf::from(p));
        } else {
            rest.push(a.clone());
        }
        i += 1;
    }
    let Some(path) = config_path else {
        return Ok(rest);
    };
    let cfg = ExperimentConfig::from_text(&fs::read_to_string(&path)?)?;
    let explicit: Vec<String> = rest.iter().filter_map(|a| flag_name(a)).collect();
    let mut out = Vec::with_capacity(rest.len() + cfg.entries.len() + 1);
    let mut it = rest.into_iter();
    if let Some(bin) = it.next() {
        out.push(bin);
    }
    let rest: Vec<String> = it.collect();
    match rest.first() {
        Some(first) if !first.starts_with('-') => {
            out.push(first.clone());
            out.extend(cfg.to_args(&explicit)?);
            out.extend(rest.into_iter().skip(1));
        }
        _ => {
            let sub = cfg
                .subcommand
                .clone()
                .ok_or_else(|| Error::InvalidArgument("no subcommand given".into()))?;
            out.push(sub);
            out.extend(cfg.to_args(&explicit)?);
            out.extend(rest);
        }
    }
    Ok(out)
}

/// Parses `argv` (including the program name), runs, returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let expanded = match expand_config(&argv) {
        Ok(a) => a,
        Err(e) => return report(e),
    };
    let cli = match Cli::try_parse_from(&expanded) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let _ = e.print();
            return 1;
        }
    };
    match execute(cli.cmd) {
        Ok(()) => 0,
        Err(e) => report(e),
    }
}

fn report(e: Error) -> i32 {
    eprintln!("error: {e}");
    match e {
        Error::Io(_) => 2,
        _ => 1,
    }
}

fn pool_size(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV} must be a non-negative integer"))),
        _ => Ok(None),
    }
}

fn execute(cmd: Cmd) -> Result<()> {
    let common = cmd.common().clone();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = pool_size(common.threads)? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    let text = pool.install(|| dispatch(cmd))?;
    write_out(common.out.as_deref(), &text)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn alphas(common: &Common) -> Result<Vec<AlphaRep>> {
    if common.alpha.is_empty() {
        return Ok(vec![AlphaRep::golden()]);
    }
    common.alpha.iter().map(|s| s.parse()).collect()
}

fn first_alpha(common: &Common) -> Result<AlphaRep> {
    Ok(alphas(common)?.remove(0))
}

fn system(common: &Common) -> Result<Option<DynSystem>> {
    match common.system {
        SystemKind::None => Ok(None),
        SystemKind::Rotation => Ok(Some(DynSystem::rotation(alphas(common)?)?)),
        SystemKind::Skew => {
            let mut a = alphas(common)?;
            if a.len() != 1 {
                return Err(Error::InvalidArgument("skew-shift takes exactly one --alpha".into()));
            }
            Ok(Some(DynSystem::skew_shift(a.remove(0))))
        }
    }
}

fn require_system(common: &Common) -> Result<DynSystem> {
    system(common)?.ok_or_else(|| Error::InvalidArgument("this subcommand needs --system rotation or skew".into()))
}

fn omega(common: &Common, sys: &DynSystem) -> Result<TorusPoint> {
    let w = if common.omega.is_empty() {
        TorusPoint::origin(sys.dim())
    } else {
        TorusPoint::new(common.omega.clone())?
    };
    sys.check_point(&w)?;
    Ok(w)
}

fn parse_f(text: &str) -> Result<SampleFn> {
    let bad = || Error::InvalidArgument(format!("unknown sampling function `{text}` (cos:i, sinsum, const:c)"));
    if text == "sinsum" {
        return Ok(SampleFn::sin_sum());
    }
    match text.split_once(':') {
        Some(("cos", i)) => Ok(SampleFn::cos_coord(i.parse().map_err(|_| bad())?)),
        Some(("const", c)) => Ok(SampleFn::constant(c.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn check_f_dim(f: &SampleFn, sys: &DynSystem) -> Result<()> {
    let needed = match f.label().split_once(':') {
        Some(("cos", i)) => i.parse::<usize>().unwrap_or(0) + 1,
        _ if f.label() == "sinsum" => 2,
        _ => 1,
    };
    if needed > sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: needed,
            got: sys.dim(),
        });
    }
    Ok(())
}

fn read_window(path: &Path) -> Result<PotentialWindow> {
    let mut r = csv::Reader::from_path(path).map_err(crate::potential::csv_err)?;
    let mut rows: Vec<(i64, f64)> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(crate::potential::csv_err)?;
        let parse = |i: usize| rec.get(i).map(str::trim).unwrap_or("");
        let n: i64 = parse(0)
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad n in {}", path.display())))?;
        let v: f64 = parse(1)
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad V in {}", path.display())))?;
        rows.push((n, v));
    }
    rows.sort_by_key(|r| r.0);
    if rows.windows(2).any(|w| w[1].0 != w[0].0 + 1) || rows.is_empty() {
        return Err(Error::InvalidArgument("input window must list consecutive n".into()));
    }
    let sup = rows.iter().fold(0.0f64, |a, r| a.max(r.1.abs()));
    PotentialWindow::new(rows[0].0, rows.into_iter().map(|r| r.1).collect(), sup)
}

/// The potential on at least `[lo, hi]` (which must contain 0).
fn potential(common: &Common, pot: &PotentialArgs, lo: i64, hi: i64) -> Result<PotentialWindow> {
    let (lo, hi) = (lo.min(0), hi.max(0));
    if let Some(path) = &pot.input {
        return read_window(path);
    }
    if let Some(c) = pot.constant {
        return PotentialWindow::new(lo, vec![c; (hi - lo + 1) as usize], c.abs());
    }
    if !pot.periodic.is_empty() {
        let p = pot.periodic.len() as i64;
        return PotentialWindow::from_fn(lo, hi, |n| pot.periodic[n.rem_euclid(p) as usize]);
    }
    let sys = require_system(common)?;
    let f = parse_f(&pot.f)?;
    check_f_dim(&f, &sys)?;
    sample_potential(&f, &sys, &omega(common, &sys)?, lo, hi)
}

fn window_csv(v: &PotentialWindow) -> Result<String> {
    let mut buf = Vec::new();
    v.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

fn rotation_qk(alpha: &AlphaRep, k: u64, qk: Option<u64>, qmax: u64) -> Result<u64> {
    if let Some(q) = qk {
        return Ok(q);
    }
    let sys = DynSystem::circle_rotation(alpha.clone());
    let report = prp_probe(&sys, &TorusPoint::origin(1), k, qmax)?;
    report
        .q_at(k)
        .ok_or_else(|| Error::InvalidArgument(format!("no certificate at level {k} with q <= {qmax}")))
}

#[derive(Serialize)]
struct OrbitRow {
    n: i64,
    point: TorusPoint,
}

#[derive(Serialize)]
struct OrbitReport {
    system: DynSystem,
    omega: TorusPoint,
    orbit: Vec<OrbitRow>,
}

#[derive(Serialize)]
struct ApproximantRow {
    n: i64,
    #[serde(rename = "V")]
    v: f64,
    #[serde(rename = "V_m")]
    v_m: f64,
}

#[derive(Serialize)]
struct ApproximantReport {
    q: u64,
    m: u64,
    r1: f64,
    r2: f64,
    max_residual: f64,
    window: Vec<ApproximantRow>,
}

#[derive(Serialize)]
struct GapOutput {
    alpha: AlphaRep,
    k: u64,
    q_k: u64,
    j: u64,
    r_k: f64,
    omega: TorusPoint,
    evaluated: &'static str,
    #[serde(flatten)]
    report: crate::potential::GapReport,
}

#[derive(Serialize)]
struct PropagateOutput {
    energy: [f64; 2],
    n: i64,
    psi0: [f64; 2],
    /// `[re, im]` pairs.
    psi_n: [f64; 2],
    psi_n1: [f64; 2],
    norm: f64,
}

fn dispatch(cmd: Cmd) -> Result<String> {
    match cmd {
        Cmd::Orbit { common, from, to } => {
            let sys = require_system(&common)?;
            let w = omega(&common, &sys)?;
            let orbit = (from.min(to)..=to.max(from))
                .map(|n| Ok(OrbitRow { n, point: sys.iterate(&w, n)? }))
                .collect::<Result<Vec<_>>>()?;
            to_json(&OrbitReport {
                system: sys,
                omega: w,
                orbit,
            })
        }
        Cmd::RpSearch { common, epsilon, r, qmax } => {
            let sys = require_system(&common)?;
            let w = omega(&common, &sys)?;
            to_json(&rp_search(&sys, &w, epsilon, r, qmax)?)
        }
        Cmd::PrpProbe { common, kmax, qmax } => {
            let sys = require_system(&common)?;
            let w = omega(&common, &sys)?;
            let report = prp_probe(&sys, &w, kmax, qmax)?;
            let divergence = qk_divergence_check(&report).ok();
            to_json(&serde_json::json!({ "report": report, "divergence": divergence }))
        }
        Cmd::Theorem4 {
            common,
            kmax,
            qmax,
            horizon,
        } => {
            let alpha = first_alpha(&common)?;
            let w = if common.omega.is_empty() {
                TorusPoint::origin(2)
            } else {
                TorusPoint::new(common.omega.clone())?
            };
            to_json(&theorem4_probe(&alpha, &w, kmax, qmax, horizon)?)
        }
        Cmd::ClassifyAlpha { common, horizon } => to_json(&badly_approx_classify(&first_alpha(&common)?, horizon)?),
        Cmd::SamplePotential { common, pot, lo, hi } => {
            if lo > 0 || hi < 0 {
                return Err(Error::InvalidArgument("need lo <= 0 <= hi".into()));
            }
            window_csv(&potential(&common, &pot, lo, hi)?)
        }
        Cmd::GordonCertify { common, pot, q, c } => {
            let qm = *q.iter().max().unwrap_or(&1) as i64;
            let v = potential(&common, &pot, 1 - qm, 2 * qm)?;
            to_json(&gordon_certify(&v, &q, c)?)
        }
        Cmd::Approximant { common, pot, q, m } => {
            let qi = q as i64;
            let v = potential(&common, &pot, 1 - qi, 2 * qi)?;
            let a = periodic_approximant(&v, q, m)?;
            let window = (1 - qi..=2 * qi)
                .map(|n| ApproximantRow {
                    n,
                    v: v.get(n).unwrap_or(f64::NAN),
                    v_m: a.eval(n),
                })
                .collect();
            to_json(&ApproximantReport {
                q,
                m,
                r1: a.r1,
                r2: a.r2,
                max_residual: a.max_residual(),
                window,
            })
        }
        Cmd::Flatten { common, f, k, qk, qmax } => {
            let alpha = first_alpha(&common)?;
            let q = rotation_qk(&alpha, k, qk, qmax)?;
            to_json(&flatten_along_tube(&parse_f(&f)?, &alpha, k, q)?)
        }
        Cmd::GordonGap {
            common,
            f,
            k,
            qk,
            qmax,
            j,
            offset,
            unflattened,
        } => {
            let alpha = first_alpha(&common)?;
            let q = rotation_qk(&alpha, k, qk, qmax)?;
            let g = flatten_along_tube(&parse_f(&f)?, &alpha, k, q)?;
            let w = omega_f_tube_sample(&alpha, k, q, j, g.radius(), offset * g.radius())?;
            let report = if unflattened {
                gordon_gap_verify_base(&g, &w, k, q)?
            } else {
                gordon_gap_verify(&g, &w, k, q)?
            };
            to_json(&GapOutput {
                alpha,
                k,
                q_k: q,
                j,
                r_k: g.radius(),
                omega: w,
                evaluated: if unflattened { "f" } else { "g" },
                report,
            })
        }
        Cmd::Propagate {
            common,
            pot,
            energy,
            energy_im,
            psi0,
            n,
        } => {
            let [a, b] = two(&psi0, "psi0")?;
            let v = potential(&common, &pot, n.min(0), n.max(0))?;
            let e = Complex64::new(energy, energy_im);
            let psi = propagate(&v, e, StateVec::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0)), n)?;
            to_json(&PropagateOutput {
                energy: [energy, energy_im],
                n,
                psi0: [a, b],
                psi_n: [psi.psi_n.re, psi.psi_n.im],
                psi_n1: [psi.psi_n1.re, psi.psi_n1.im],
                norm: psi.norm(),
            })
        }
        Cmd::GordonProbe {
            common,
            pot,
            energies,
            e_min,
            e_max,
            e_count,
            t,
            psi0,
        } => {
            let [a, b] = two(&psi0, "psi0")?;
            let grid = energy_grid(energies, e_min, e_max, e_count)?;
            let tm = *t.iter().max().unwrap_or(&1) as i64;
            let v = potential(&common, &pot, -2 * tm, 2 * tm + 1)?;
            let reports = grid
                .par_iter()
                .map(|&e| gordon_lower_bound_probe(&v, e, StateVec::new(a, b), &t))
                .collect::<Result<Vec<_>>>()?;
            let merged = ProbeReport {
                rows: reports.into_iter().flat_map(|r| r.rows).collect(),
            };
            let mut buf = Vec::new();
            merged.write_csv(&mut buf)?;
            Ok(String::from_utf8(buf).expect("csv is utf-8"))
        }
        Cmd::Aux1Suite { common, cases, max_len } => to_json(&aux1_suite(cases, max_len, common.seed)?),
        Cmd::Aux2Suite { common, cases } => to_json(&aux2_suite(cases, common.seed)?),
        Cmd::Spectrum {
            common,
            pot,
            n,
            center,
            tol,
        } => {
            let start = center - (n / 2) as i64;
            let v = potential(&common, &pot, start, start + n as i64 - 1)?;
            let report = spectrum_report(&build_truncation(&v, n, center)?, tol)?;
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            Ok(String::from_utf8(buf).expect("csv is utf-8"))
        }
        Cmd::Covariance { common, f, t, n } => {
            let sys = require_system(&common)?;
            let f = parse_f(&f)?;
            check_f_dim(&f, &sys)?;
            to_json(&covariance_check(&f, &sys, &omega(&common, &sys)?, t, n)?)
        }
    }
}

fn two(v: &[f64], name: &str) -> Result<[f64; 2]> {
    match v {
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::InvalidArgument(format!("--{name} takes two comma-separated values"))),
    }
}

fn energy_grid(explicit: Vec<f64>, lo: Option<f64>, hi: Option<f64>, count: Option<usize>) -> Result<Vec<f64>> {
    if !explicit.is_empty() {
        return Ok(explicit);
    }
    match (lo, hi, count) {
        (Some(a), Some(b), Some(1)) if a == b => Ok(vec![a]),
        (Some(a), Some(b), Some(c)) if c >= 2 => Ok((0..c).map(|i| a + (b - a) * i as f64 / (c - 1) as f64).collect()),
        _ => Err(Error::InvalidArgument(
            "give --energies or --e-min, --e-max and --e-count >= 2".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_round_trips() {
        let text = r#"{"alpha":["golden","rational:1/3"],"epsilon":0.01,"qmax":100,"subcommand":"rp-search"}"#;
        let c = ExperimentConfig::from_text(text).unwrap();
        let once = c.to_text();
        let twice = ExperimentConfig::from_text(&once).unwrap().to_text();
        assert_eq!(once, twice);
        assert_eq!(ExperimentConfig::from_text(&once).unwrap(), c);
    }

    #[test]
    fn config_expansion_respects_explicit_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"subcommand":"rp-search","epsilon":0.5,"r":2,"omega":[0.1,0.2]}"#).unwrap();
        let argv: Vec<String> = ["gordonlab", "--config", p.to_str().unwrap(), "--epsilon", "0.01"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let out = expand_config(&argv).unwrap();
        assert_eq!(out[1], "rp-search");
        assert!(out.contains(&"--omega=0.1,0.2".to_string()));
        assert!(out.contains(&"--r=2".to_string()));
        assert!(!out.iter().any(|a| a.starts_with("--epsilon=")));
        assert!(out.contains(&"0.01".to_string()));
    }

    #[test]
    fn sampling_function_specs() {
        assert_eq!(parse_f("cos:1").unwrap().eval(&[0.3, 0.0]), 1.0);
        assert_eq!(parse_f("const:-2.5").unwrap().eval(&[0.1]), -2.5);
        assert!(parse_f("tan:0").is_err());
    }

    #[test]
    fn grid_is_inclusive() {
        let g = energy_grid(vec![], Some(-3.0), Some(3.0), Some(16)).unwrap();
        assert_eq!((g.len(), g[0], g[15]), (16, -3.0, 3.0));
    }
}
