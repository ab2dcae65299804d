//! Command-line front end: OP and SER curves against transmit power, design
//! inversion, and Monte-Carlo validation runs.
//!
//! Exit statuses: 0 success, 1 validation run below its pass threshold,
//! 2 usage or configuration error, 3 numerical failure.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::analytic::{
    invert_impairment_for_op, invert_impairment_for_ser, outage_asymptotic, outage_probability, ser, ser_asymptotic,
    ser_asymptotic_quadrature, Modulation, OutageQuery, QuadratureSpec,
};
use crate::model::{equal_split_for_c, Direction, ImpairmentPair, SystemConfig};
use crate::montecarlo::{
    mc_outage, mc_ser_expectation, mc_ser_signal_level, McConfig, McEstimate, DEFAULT_SAMPLES,
};
use crate::specfun::gaussian_q;
use crate::Error;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "TWOWAY_IMPAIR_THREADS";

/// First line of every CSV file.
pub const CSV_VERSION_LINE: &str = "# twoway-impair v1";

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_VALIDATION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const DEFAULT_POINTS: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Quadrature { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

// ---------------------------------------------------------------------------
// configuration file

/// Contents of a `key = value` configuration file. Powers are optional because
/// they may come from `--p1-dbw` instead.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub p3: Option<f64>,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub kappa3t: f64,
    pub kappa3r: f64,
    pub kappa3r_assumed: Option<f64>,
}

impl ConfigFile {
    fn has_powers(&self) -> bool {
        self.p1.is_some() || self.p2.is_some() || self.p3.is_some()
    }

    fn c(&self) -> f64 {
        ImpairmentPair {
            kappa_t: self.kappa3t,
            kappa_r: self.kappa3r,
        }
        .c()
    }

    fn system(&self, p1: f64, p2: f64, p3: f64) -> SystemConfig {
        SystemConfig {
            p1,
            p2,
            p3,
            n1: self.n1,
            n2: self.n2,
            n3: self.n3,
            omega1: self.omega1,
            omega2: self.omega2,
            relay: ImpairmentPair {
                kappa_t: self.kappa3t,
                kappa_r: self.kappa3r,
            },
            assumed_kappa_r: self.kappa3r_assumed,
        }
    }
}

/// Parses configuration text. `origin` names the source in diagnostics, which
/// read `origin:line: message`.
///
/// Noise variances default to 1 and EVM levels to 0; `omega1` and `omega2` are
/// required.
pub fn parse_config(text: &str, origin: &str) -> CliResult<ConfigFile> {
    const KEYS: [&str; 11] = [
        "p1",
        "p2",
        "p3",
        "n1",
        "n2",
        "n3",
        "omega1",
        "omega2",
        "kappa3t",
        "kappa3r",
        "kappa3r_assumed",
    ];
    let mut values: [Option<f64>; 11] = [None; 11];
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |msg: String| CliError::Usage(format!("{origin}:{line_no}: {msg}"));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| fail(format!("expected `key = value`, found `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| fail(format!("unknown key `{key}` (expected one of {})", KEYS.join(", "))))?;
        if values[slot].is_some() {
            return Err(fail(format!("duplicate key `{key}`")));
        }
        let v: f64 = value
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| fail(format!("`{key}` needs a finite number, found `{value}`")))?;
        let ok = if key.starts_with("kappa") { v >= 0.0 } else { v > 0.0 };
        if !ok {
            let bound = if key.starts_with("kappa") { ">= 0" } else { "> 0" };
            return Err(fail(format!("`{key}` must be {bound}, found {v}")));
        }
        values[slot] = Some(v);
    }
    let required = |slot: usize| {
        values[slot].ok_or_else(|| CliError::Usage(format!("{origin}: missing required key `{}`", KEYS[slot])))
    };
    Ok(ConfigFile {
        p1: values[0],
        p2: values[1],
        p3: values[2],
        n1: values[3].unwrap_or(1.0),
        n2: values[4].unwrap_or(1.0),
        n3: values[5].unwrap_or(1.0),
        omega1: required(6)?,
        omega2: required(7)?,
        kappa3t: values[8].unwrap_or(0.0),
        kappa3r: values[9].unwrap_or(0.0),
        kappa3r_assumed: values[10],
    })
}

fn read_config(path: &Path) -> CliResult<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string())
}

// ---------------------------------------------------------------------------
// power sweep

/// `P2` and `P3` as multiples of `P1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCoupling {
    pub p2: f64,
    pub p3: f64,
}

impl Default for PowerCoupling {
    fn default() -> Self {
        PowerCoupling { p2: 1.0, p3: 0.5 }
    }
}

impl FromStr for PowerCoupling {
    type Err = CliError;

    /// Accepts comma-separated rules such as `p2=p1, p3=p1/2` or `p3=0.25*p1`.
    /// Unmentioned powers keep the default coupling.
    fn from_str(s: &str) -> CliResult<Self> {
        let mut coupling = PowerCoupling::default();
        let mut seen = [false; 2];
        for rule in s.split(',') {
            let rule = rule.trim();
            let bad = || CliError::Usage(format!("cannot parse coupling rule `{rule}` (expected e.g. `p3=p1/2`)"));
            let (lhs, rhs) = rule.split_once('=').ok_or_else(bad)?;
            let slot = match lhs.trim() {
                "p2" => 0,
                "p3" => 1,
                _ => return Err(bad()),
            };
            if seen[slot] {
                return usage(format!("coupling sets {} twice", lhs.trim()));
            }
            seen[slot] = true;
            let multiplier = parse_multiple_of_p1(rhs.trim()).ok_or_else(bad)?;
            if !(multiplier > 0.0 && multiplier.is_finite()) {
                return usage(format!("coupling multiplier in `{rule}` must be positive"));
            }
            if slot == 0 {
                coupling.p2 = multiplier;
            } else {
                coupling.p3 = multiplier;
            }
        }
        Ok(coupling)
    }
}

// `[k*]p1[/d]`
fn parse_multiple_of_p1(expr: &str) -> Option<f64> {
    let (scale, rest) = match expr.split_once('*') {
        Some((k, rest)) => (k.trim().parse::<f64>().ok()?, rest.trim()),
        None => (1.0, expr),
    };
    let (base, divisor) = match rest.split_once('/') {
        Some((base, d)) => (base.trim(), d.trim().parse::<f64>().ok()?),
        None => (rest, 1.0),
    };
    (base == "p1").then(|| scale / divisor)
}

/// Transmit power sweep in dB relative to 1 W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub p1_dbw_start: f64,
    pub p1_dbw_stop: f64,
    pub n_points: usize,
    pub power_coupling: PowerCoupling,
}

impl SweepSpec {
    pub fn validate(&self) -> CliResult<()> {
        if !(self.p1_dbw_start.is_finite() && self.p1_dbw_stop.is_finite()) {
            return usage("sweep bounds must be finite");
        }
        if !(self.p1_dbw_start < self.p1_dbw_stop) {
            return usage(format!(
                "sweep start {} must be below stop {}",
                self.p1_dbw_start, self.p1_dbw_stop
            ));
        }
        if self.n_points < 2 {
            return usage("a sweep needs --points >= 2");
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let last = self.n_points - 1;
        (0..self.n_points)
            .map(|k| {
                if k == last {
                    self.p1_dbw_stop
                } else {
                    self.p1_dbw_start + (self.p1_dbw_stop - self.p1_dbw_start) * k as f64 / last as f64
                }
            })
            .collect()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PowerPoint {
    p1_dbw: f64,
    p1: f64,
    p2: f64,
    p3: f64,
}

fn power_points(file: &ConfigFile, sweep: &SweepArgs) -> CliResult<Vec<PowerPoint>> {
    let coupling = match &sweep.coupling {
        Some(rule) => rule.parse()?,
        None => PowerCoupling::default(),
    };
    let coupled = |p1_dbw: f64, p1: f64| PowerPoint {
        p1_dbw,
        p1,
        p2: coupling.p2 * p1,
        p3: coupling.p3 * p1,
    };
    let Some(range) = &sweep.p1_dbw else {
        let Some(p1) = file.p1 else {
            return usage("no transmit power: set p1 in the config file or pass --p1-dbw");
        };
        if sweep.points.is_some_and(|n| n != 1) {
            return usage("--points needs a --p1-dbw START:STOP range");
        }
        let mut point = coupled(linear_to_db(p1), p1);
        point.p2 = file.p2.unwrap_or(point.p2);
        point.p3 = file.p3.unwrap_or(point.p3);
        return Ok(vec![point]);
    };
    if file.has_powers() {
        return usage("transmit powers are given both in the config file and by --p1-dbw; use one");
    }
    let parse_db = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Usage(format!("cannot parse --p1-dbw value `{s}`")))
    };
    match range.split_once(':') {
        None => {
            if sweep.points.is_some_and(|n| n != 1) {
                return usage("--points needs a --p1-dbw START:STOP range");
            }
            let db = parse_db(range)?;
            Ok(vec![coupled(db, db_to_linear(db))])
        }
        Some((start, stop)) => {
            let spec = SweepSpec {
                p1_dbw_start: parse_db(start)?,
                p1_dbw_stop: parse_db(stop)?,
                n_points: sweep.points.unwrap_or(DEFAULT_POINTS),
                power_coupling: coupling,
            };
            spec.validate()?;
            Ok(spec.grid().into_iter().map(|db| coupled(db, db_to_linear(db))).collect())
        }
    }
}

// ---------------------------------------------------------------------------
// argument definitions

#[derive(Debug, Parser)]
#[command(
    name = "twoway-impair",
    version,
    about = "Outage and symbol error rate of two-way AF relaying with relay hardware impairments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Outage probability against transmit power, written as CSV.
    OpCurve(OpCurveArgs),
    /// Symbol error rate against transmit power, written as CSV.
    SerCurve(SerCurveArgs),
    /// Largest tolerable impairment level for an OP or SER floor target.
    Invert(InvertArgs),
    /// Compare the exact OP with Monte-Carlo estimates on a power grid.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Configuration file with `key = value` lines.
    #[arg(long)]
    config: PathBuf,
    /// Transmit power of T1 in dBW: `START:STOP` or a single value.
    #[arg(long = "p1-dbw", allow_hyphen_values = true)]
    p1_dbw: Option<String>,
    /// Number of sweep points (default 9).
    #[arg(long)]
    points: Option<usize>,
    /// Rule fixing P2 and P3 from P1 [default: "p2=p1, p3=p1/2"].
    #[arg(long)]
    coupling: Option<String>,
    /// Receiving terminal (1 or 2).
    #[arg(long, default_value_t = 1)]
    direction: u8,
}

#[derive(Debug, Args)]
struct McArgs {
    /// Add Monte-Carlo columns.
    #[arg(long)]
    mc: bool,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    /// Base seed; point k uses seed + k.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ModulationArgs {
    /// Preset name (only `bpsk`).
    #[arg(long)]
    modulation: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
}

impl ModulationArgs {
    fn resolve(&self) -> CliResult<Modulation> {
        match (self.alpha, self.beta) {
            (None, None) => {
                let name = self.modulation.as_deref().unwrap_or("bpsk");
                Modulation::preset(name).ok_or_else(|| {
                    CliError::Usage(format!("unknown modulation `{name}` (known: bpsk; or give --alpha and --beta)"))
                })
            }
            (Some(alpha), Some(beta)) => {
                if self.modulation.is_some() {
                    return usage("give either --modulation or --alpha/--beta, not both");
                }
                Ok(Modulation::new("custom", alpha, beta)?)
            }
            _ => usage("--alpha and --beta must be given together"),
        }
    }
}

#[derive(Debug, Args)]
struct OpCurveArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// SNDR threshold (linear).
    #[arg(long)]
    x: f64,
    #[command(flatten)]
    mc: McArgs,
    /// Output CSV path (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum McRoute {
    /// Average of alpha Q(sqrt(2 beta SNDR)) over channel draws.
    Expectation,
    /// Full BPSK signal chain with detection.
    Signal,
}

#[derive(Debug, Args)]
struct SerCurveArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    #[command(flatten)]
    modulation: ModulationArgs,
    #[command(flatten)]
    mc: McArgs,
    #[arg(long = "mc-route", value_enum, default_value_t = McRoute::Expectation)]
    mc_route: McRoute,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InvertMode {
    Op,
    Ser,
}

#[derive(Debug, Args)]
struct InvertArgs {
    #[arg(long, value_enum)]
    mode: InvertMode,
    #[arg(long)]
    target: f64,
    /// SNDR threshold (op mode).
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    omega1: Option<f64>,
    #[arg(long)]
    omega2: Option<f64>,
    #[arg(long, default_value_t = 1)]
    direction: u8,
    #[command(flatten)]
    modulation: ModulationArgs,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long)]
    x: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

// ---------------------------------------------------------------------------
// entry point

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status. `threads` is the value of [`THREADS_ENV`], if set.
pub fn run<I, T>(args: I, threads: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{e}");
                EXIT_SUCCESS
            };
            return code;
        }
    };
    let outcome = thread_pool(threads)
        .and_then(|pool| pool.install(|| dispatch(cli.command)))
        .and_then(|out| {
            emit(&out.text, out.path.as_deref(), stdout)?;
            Ok(out.code)
        });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

fn thread_pool(threads: Option<&str>) -> CliResult<rayon::ThreadPool> {
    let n = match threads {
        None => 0,
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => n,
            _ => return usage(format!("{THREADS_ENV} must be a positive integer, found `{s}`")),
        },
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))
}

struct Output {
    text: String,
    /// Destination file; standard output when `None`.
    path: Option<PathBuf>,
    code: i32,
}

fn dispatch(command: Command) -> CliResult<Output> {
    let (text, path, code) = match command {
        Command::OpCurve(args) => (op_curve(&args)?, args.out, EXIT_SUCCESS),
        Command::SerCurve(args) => (ser_curve(&args)?, args.out, EXIT_SUCCESS),
        Command::Invert(args) => (invert(&args)?, None, EXIT_SUCCESS),
        Command::Validate(args) => {
            let (table, passed) = validate(&args)?;
            (table, None, if passed { EXIT_SUCCESS } else { EXIT_VALIDATION_FAILED })
        }
    };
    Ok(Output { text, path, code })
}

fn emit(text: &str, path: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write output: {e}"))),
    }
}

// ---------------------------------------------------------------------------
// curves

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn direction(index: u8) -> CliResult<Direction> {
    Direction::from_index(index).map_err(|_| CliError::Usage(format!("--direction must be 1 or 2, found {index}")))
}

fn mc_config(args: &McArgs, point: usize) -> CliResult<McConfig> {
    let mc = McConfig::new(args.samples, args.seed.wrapping_add(point as u64));
    mc.validate()?;
    Ok(mc)
}

struct Row {
    p1_dbw: f64,
    analytic: Option<f64>,
    mc: Option<McEstimate>,
}

struct Curve {
    rows: Vec<Row>,
    asymptote: Option<f64>,
    extension: bool,
}

impl Curve {
    fn to_csv(&self) -> String {
        let mut out = String::from(CSV_VERSION_LINE);
        if self.extension {
            out.push_str("; asymptote=extension");
        }
        out.push('\n');
        let mut header = vec!["p1_dbw"];
        let has_analytic = self.rows.first().is_some_and(|r| r.analytic.is_some());
        let has_mc = self.rows.first().is_some_and(|r| r.mc.is_some());
        if has_analytic {
            header.push("analytic");
        }
        if self.asymptote.is_some() {
            header.push("asymptote");
        }
        if has_mc {
            header.extend(["mc_mean", "mc_ci_low", "mc_ci_high"]);
        }
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut fields = vec![num(row.p1_dbw)];
            fields.extend(row.analytic.map(num));
            fields.extend(self.asymptote.map(num));
            if let Some(est) = row.mc {
                fields.extend([num(est.mean), num(est.ci_low), num(est.ci_high)]);
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

fn finite(v: f64, what: &str, p1_dbw: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Numerical(format!("{what} is {v} at p1_dbw = {p1_dbw}")))
    }
}

/// Prepared inputs shared by the curve commands.
struct Setup {
    file: ConfigFile,
    points: Vec<PowerPoint>,
    dir: Direction,
    matched: bool,
    /// `P_i / P_ri`, constant along the sweep.
    power_ratio: f64,
}

fn setup(sweep: &SweepArgs) -> CliResult<Setup> {
    let dir = direction(sweep.direction)?;
    let file = read_config(&sweep.config)?;
    let points = power_points(&file, sweep)?;
    let first = points[0];
    let cfg = file.system(first.p1, first.p2, first.p3);
    cfg.validate()?;
    let power_ratio = cfg.power(dir.receiver()) / cfg.power(dir.partner());
    Ok(Setup {
        matched: cfg.is_matched(),
        file,
        points,
        dir,
        power_ratio,
    })
}

impl Setup {
    fn system(&self, point: &PowerPoint) -> SystemConfig {
        self.file.system(point.p1, point.p2, point.p3)
    }

    /// High-power floor channel gains. With `P_i = m P_ri` the receiving
    /// terminal's gain enters the limit scaled by `m`.
    fn floor_gains(&self) -> (f64, f64) {
        let (omega_i, omega_ri) = self.dir.select(self.file.omega1, self.file.omega2);
        (self.power_ratio * omega_i, omega_ri)
    }
}

fn op_curve(args: &OpCurveArgs) -> CliResult<String> {
    let s = setup(&args.sweep)?;
    if !(args.x >= 0.0 && args.x.is_finite()) {
        return usage(format!("--x must be a finite number >= 0, found {}", args.x));
    }
    if !s.matched && !args.mc.mc {
        return usage("kappa3r_assumed differs from kappa3r: no closed form exists, rerun with --mc");
    }
    let query = OutageQuery { x: args.x, dir: s.dir };
    let rows = s
        .points
        .par_iter()
        .enumerate()
        .map(|(k, point)| {
            let cfg = s.system(point);
            let analytic = if s.matched {
                Some(finite(outage_probability(&cfg, query)?, "outage probability", point.p1_dbw)?)
            } else {
                None
            };
            let mc = if args.mc.mc {
                Some(mc_outage(&cfg, query, &mc_config(&args.mc, k)?)?)
            } else {
                None
            };
            Ok(Row {
                p1_dbw: point.p1_dbw,
                analytic,
                mc,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let (asymptote, extension) = if s.matched {
        let (omega_i, omega_ri) = s.floor_gains();
        (
            Some(outage_asymptotic(omega_i, omega_ri, s.file.c(), args.x)),
            s.power_ratio != 1.0,
        )
    } else {
        (None, false)
    };
    Ok(Curve {
        rows,
        asymptote,
        extension,
    }
    .to_csv())
}

fn ser_curve(args: &SerCurveArgs) -> CliResult<String> {
    let s = setup(&args.sweep)?;
    let modulation = args.modulation.resolve()?;
    if args.mc.mc && args.mc_route == McRoute::Signal && !(modulation.alpha == 1.0 && modulation.beta == 1.0) {
        return usage("--mc-route signal simulates BPSK only (alpha = beta = 1)");
    }
    if !s.matched && !args.mc.mc {
        return usage("kappa3r_assumed differs from kappa3r: no closed form exists, rerun with --mc");
    }
    let quad = QuadratureSpec::default();
    let rows = s
        .points
        .par_iter()
        .enumerate()
        .map(|(k, point)| {
            let cfg = s.system(point);
            let analytic = if s.matched {
                Some(finite(ser(&cfg, s.dir, &modulation, &quad)?, "symbol error rate", point.p1_dbw)?)
            } else {
                None
            };
            let mc = if args.mc.mc {
                let mc = mc_config(&args.mc, k)?;
                Some(match args.mc_route {
                    McRoute::Expectation => mc_ser_expectation(&cfg, s.dir, &modulation, &mc)?,
                    McRoute::Signal => mc_ser_signal_level(&cfg, s.dir, &mc)?,
                })
            } else {
                None
            };
            Ok(Row {
                p1_dbw: point.p1_dbw,
                analytic,
                mc,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let c = s.file.c();
    let (asymptote, extension) = if s.matched && c > 0.0 {
        let (omega_i, omega_ri) = s.floor_gains();
        if omega_i == omega_ri {
            (Some(ser_asymptotic(&modulation, c)?), false)
        } else {
            (
                Some(ser_asymptotic_quadrature(omega_i, omega_ri, &modulation, c, &quad)?),
                true,
            )
        }
    } else {
        (None, false)
    };
    Ok(Curve {
        rows,
        asymptote,
        extension,
    }
    .to_csv())
}

// ---------------------------------------------------------------------------
// inversion

fn invert(args: &InvertArgs) -> CliResult<String> {
    let (c_max, forward, what) = match args.mode {
        InvertMode::Op => {
            let (Some(x), Some(omega1), Some(omega2)) = (args.x, args.omega1, args.omega2) else {
                return usage("--mode op needs --x, --omega1 and --omega2");
            };
            let dir = direction(args.direction)?;
            let (omega_i, omega_ri) = dir.select(omega1, omega2);
            let c = invert_impairment_for_op(args.target, x, omega_i, omega_ri)?;
            (c, outage_asymptotic(omega_i, omega_ri, c, x), "op_floor")
        }
        InvertMode::Ser => {
            if args.x.is_some() || args.omega1.is_some() || args.omega2.is_some() {
                return usage("--x, --omega1 and --omega2 apply to --mode op only");
            }
            let modulation = args.modulation.resolve()?;
            let c = invert_impairment_for_ser(args.target, &modulation)?;
            (c, ser_asymptotic(&modulation, c)?, "ser_floor")
        }
    };
    let kappa = equal_split_for_c(c_max)?;
    Ok(format!(
        "c_max={c_max} kappa3t={kappa} kappa3r={kappa} {what}_at_c_max={forward} target={}\n",
        args.target
    ))
}

// ---------------------------------------------------------------------------
// validation

fn validate(args: &ValidateArgs) -> CliResult<(String, bool)> {
    let s = setup(&args.sweep)?;
    if !s.matched {
        return usage("validate compares against the closed form, which needs kappa3r_assumed = kappa3r");
    }
    if !(args.x >= 0.0 && args.x.is_finite()) {
        return usage(format!("--x must be a finite number >= 0, found {}", args.x));
    }
    let query = OutageQuery { x: args.x, dir: s.dir };
    // interval at three standard deviations
    let confidence = 1.0 - 2.0 * gaussian_q(3.0);
    let rows = s
        .points
        .par_iter()
        .enumerate()
        .map(|(k, point)| {
            let cfg = s.system(point);
            let exact = finite(outage_probability(&cfg, query)?, "outage probability", point.p1_dbw)?;
            let mc = McConfig {
                confidence,
                ..McConfig::new(args.samples, args.seed.wrapping_add(k as u64))
            };
            let est = mc_outage(&cfg, query, &mc)?;
            let pass = est.ci_low <= exact && exact <= est.ci_high;
            Ok((point.p1_dbw, exact, est, pass))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = String::from("p1_dbw analytic mc_mean mc_ci_low mc_ci_high verdict\n");
    for (p1_dbw, exact, est, pass) in &rows {
        table.push_str(&format!(
            "{} {} {} {} {} {}\n",
            num(*p1_dbw),
            num(*exact),
            num(est.mean),
            num(est.ci_low),
            num(est.ci_high),
            if *pass { "PASS" } else { "FAIL" }
        ));
    }
    let passed = rows.iter().filter(|r| r.3).count();
    let ok = passed * 100 >= rows.len() * 95;
    table.push_str(&format!("passed {passed}/{} points\n", rows.len()));
    Ok((table, ok))
}
