//! The `w2clt` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 input or parse error, 3 domain
//! precondition violated, 4 resource cap exceeded.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::distribution::{DiscreteDist, PRNG_NAME};
use crate::error::{Error, ErrorKind, Result};
use crate::lindeberg::{default_epsilon_grid, sweep, Family, SweepResult};
use crate::plot::LinePlot;
use crate::renormalization::{rg_trace, RgTrace, DEFAULT_MAX_SUPPORT};
use crate::transport::{self, Method, W2Report};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "w2clt",
    version,
    about = "Exact 2-Wasserstein distances and CLT experiments"
)]
pub struct Cli {
    /// Seed for every random choice (Monte Carlo, sampling, random rows).
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here (atomically) instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// W2 distance between two laws, or between a law and N(0, 1).
    W2(W2Args),
    /// Dyadic renormalization trace `law(X) -> law((X + X') / sqrt 2)`.
    Rg(RgArgs),
    /// Triangular-array sweep over a grid of bounds.
    Lindeberg(LindebergArgs),
    /// Equal-mass quantization to `m` atoms.
    Quantize(QuantizeArgs),
    /// Seeded inverse-transform samples.
    Sample(SampleArgs),
}

/// Distributions are given as a builtin name (`rademacher`, `uniform-K`,
/// `binomial-K`, `point-mass`), inline JSON `{"atoms": [[x, w], ...]}`, or a
/// path to a file holding that JSON.
#[derive(Debug, Args)]
pub struct W2Args {
    #[arg(long)]
    pub a: String,
    #[arg(long, conflicts_with = "gaussian", required_unless_present = "gaussian")]
    pub b: Option<String>,
    /// Compare against the standard normal instead of `--b`.
    #[arg(long)]
    pub gaussian: bool,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: MethodArg,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    /// Include the quantile segments in JSON output.
    #[arg(long)]
    pub segments: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    BruteForce,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct RgArgs {
    #[arg(long, default_value = "rademacher")]
    pub a: String,
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_SUPPORT)]
    pub max_support: usize,
    /// Also write an SVG plot of w2 against k.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LindebergArgs {
    /// Comma-separated family names; defaults to the whole catalog.
    #[arg(long, value_delimiter = ',')]
    pub families: Vec<String>,
    /// Comma-separated bounds; defaults to 2^(-j/2) for j = 1..10.
    #[arg(long, value_delimiter = ',')]
    pub eps_grid: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_SUPPORT)]
    pub max_support: usize,
    /// Also write an SVG plot of the per-epsilon maximum.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QuantizeArgs {
    #[arg(long)]
    pub a: String,
    /// Number of equal-mass bins.
    #[arg(long)]
    pub m: usize,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub a: String,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
}

pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Io => 1,
        ErrorKind::Input => 2,
        ErrorKind::Domain => 3,
        ErrorKind::Capacity => 4,
    }
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let bytes = execute(cli)?;
    match &cli.out {
        Some(path) => write_atomic(path, &bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Runs the command and returns what would be written to the output.
/// Side outputs (`--plot`) are written directly.
pub fn execute(cli: &Cli) -> Result<Vec<u8>> {
    match &cli.command {
        Command::W2(args) => cmd_w2(args, cli),
        Command::Rg(args) => cmd_rg(args, cli),
        Command::Lindeberg(args) => cmd_lindeberg(args, cli),
        Command::Quantize(args) => cmd_quantize(args, cli),
        Command::Sample(args) => cmd_sample(args, cli),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Resolves a builtin name, inline JSON, or a JSON file path.
pub fn parse_source(src: &str) -> Result<DiscreteDist> {
    let s = src.trim();
    if s.starts_with('{') {
        return DiscreteDist::from_json(s);
    }
    if let Some(d) = builtin(s)? {
        return Ok(d);
    }
    let text = fs::read_to_string(s).map_err(|e| {
        Error::Parse(format!(
            "`{s}` is not a builtin and cannot be read as a file: {e}"
        ))
    })?;
    DiscreteDist::from_json(&text)
}

fn builtin(name: &str) -> Result<Option<DiscreteDist>> {
    let count = |rest: &str| {
        rest.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad size in builtin `{name}`")))
    };
    Ok(Some(match name {
        "rademacher" => DiscreteDist::rademacher(),
        "point-mass" => DiscreteDist::point_mass(0.0),
        _ => {
            if let Some(rest) = name.strip_prefix("uniform-") {
                uniform_standardized(count(rest)?)?
            } else if let Some(rest) = name.strip_prefix("binomial-") {
                binomial_standardized(count(rest)?)?
            } else {
                return Ok(None);
            }
        }
    }))
}

/// Uniform law on `k` equally spaced points, standardized.
fn uniform_standardized(k: usize) -> Result<DiscreteDist> {
    if k < 2 {
        return Err(Error::Parse("uniform-K needs K >= 2".into()));
    }
    let xs: Vec<f64> = (0..k).map(|i| i as f64).collect();
    DiscreteDist::uniform(&xs)?.standardize()
}

/// `(B - k/2) / (sqrt(k) / 2)` for `B ~ Binomial(k, 1/2)`.
fn binomial_standardized(k: usize) -> Result<DiscreteDist> {
    if k == 0 {
        return Err(Error::Parse("binomial-K needs K >= 1".into()));
    }
    let kf = k as f64;
    let log_norm = libm::lgamma(kf + 1.0) - kf * std::f64::consts::LN_2;
    let atoms = (0..=k)
        .map(|i| {
            let i_f = i as f64;
            let w = (log_norm - libm::lgamma(i_f + 1.0) - libm::lgamma(kf - i_f + 1.0)).exp();
            ((2.0 * i_f - kf) / kf.sqrt(), w)
        })
        .collect();
    Ok(DiscreteDist::from_sorted(atoms))
}

fn format_or(cli: &Cli, default: Format, allowed: &[Format], command: &str) -> Result<Format> {
    let f = cli.format.unwrap_or(default);
    if !allowed.contains(&f) {
        return Err(Error::Parse(
            format!("format {f:?} is not available for `{command}`").to_lowercase(),
        ));
    }
    Ok(f)
}

fn json_bytes(v: &Value) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn csv_bytes<T: serde::Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn cmd_w2(args: &W2Args, cli: &Cli) -> Result<Vec<u8>> {
    let format = format_or(cli, Format::Json, &[Format::Json, Format::Csv], "w2")?;
    let a = parse_source(&args.a)?;
    let b = args.b.as_deref().map(parse_source).transpose()?;
    let report = match (args.method, &b) {
        (MethodArg::Exact, Some(b)) => transport::w2_discrete(&a, b),
        (MethodArg::Exact, None) => transport::w2_to_gaussian(&a),
        (MethodArg::BruteForce, Some(b)) => transport::w2_bruteforce(&a, b)?,
        (MethodArg::BruteForce, None) => {
            return Err(Error::Parse(
                "brute-force needs two discrete laws, not --gaussian".into(),
            ))
        }
        (MethodArg::MonteCarlo, Some(b)) => transport::mc_w2_estimate(&a, b, args.n, cli.seed)?,
        (MethodArg::MonteCarlo, None) => transport::mc_w2_to_gaussian(&a, args.n, cli.seed)?,
    };
    let report = if args.segments { report } else { report.summary() };
    match format {
        Format::Csv => csv_bytes(&[W2Row::from(&report)]),
        _ => {
            let mut v = serde_json::to_value(&report)?;
            if report.method == Method::MonteCarlo {
                v["prng"] = json!(PRNG_NAME);
                v["seed"] = json!(cli.seed);
            }
            json_bytes(&v)
        }
    }
}

#[derive(serde::Serialize)]
struct W2Row {
    distance: f64,
    squared_distance: f64,
    method: &'static str,
    error_bound: f64,
}

impl From<&W2Report> for W2Row {
    fn from(r: &W2Report) -> Self {
        Self {
            distance: r.distance,
            squared_distance: r.squared_distance,
            method: r.method.as_str(),
            error_bound: r.error_bound,
        }
    }
}

fn rg_plot(trace: &RgTrace) -> String {
    let pts: Vec<(f64, f64)> = trace
        .records
        .iter()
        .map(|r| (r.k as f64, r.w2_to_gaussian))
        .collect();
    LinePlot {
        title: "W2 to N(0,1) along the dyadic iteration",
        x_label: "k",
        y_label: "w2",
        points: &pts,
    }
    .to_svg()
}

fn cmd_rg(args: &RgArgs, cli: &Cli) -> Result<Vec<u8>> {
    let format = format_or(cli, Format::Csv, &[Format::Csv, Format::Json, Format::Svg], "rg")?;
    let d = parse_source(&args.a)?;
    let trace = rg_trace(&d, args.iters, args.max_support)?;
    if let Some(p) = &args.plot {
        write_atomic(p, rg_plot(&trace).as_bytes())?;
    }
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            trace.write_csv(&mut buf)?;
            Ok(buf)
        }
        Format::Json => json_bytes(&json!({ "records": trace.records })),
        Format::Svg => Ok(rg_plot(&trace).into_bytes()),
    }
}

fn sweep_plot(result: &SweepResult) -> String {
    let pts: Vec<(f64, f64)> = result.proxy().iter().map(|p| (p.epsilon, p.w2)).collect();
    LinePlot {
        title: "Largest W2 to N(0,1) over the row catalog",
        x_label: "epsilon",
        y_label: "max w2",
        points: &pts,
    }
    .to_svg()
}

fn cmd_lindeberg(args: &LindebergArgs, cli: &Cli) -> Result<Vec<u8>> {
    let format = format_or(
        cli,
        Format::Csv,
        &[Format::Csv, Format::Json, Format::Svg],
        "lindeberg",
    )?;
    let families = if args.families.is_empty() {
        Family::ALL.to_vec()
    } else {
        args.families
            .iter()
            .map(|s| s.trim().parse())
            .collect::<Result<Vec<Family>>>()?
    };
    let eps = if args.eps_grid.is_empty() {
        default_epsilon_grid()
    } else {
        args.eps_grid.clone()
    };
    let result = sweep(&families, &eps, args.max_support, cli.seed)?;
    if let Some(p) = &args.plot {
        write_atomic(p, sweep_plot(&result).as_bytes())?;
    }
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            result.write_csv(&mut buf)?;
            Ok(buf)
        }
        Format::Json => json_bytes(&json!({
            "prng": PRNG_NAME,
            "seed": cli.seed,
            "entries": result.entries,
            "proxy": result.proxy(),
        })),
        Format::Svg => Ok(sweep_plot(&result).into_bytes()),
    }
}

fn cmd_quantize(args: &QuantizeArgs, cli: &Cli) -> Result<Vec<u8>> {
    let format = format_or(cli, Format::Json, &[Format::Json, Format::Csv], "quantize")?;
    let q = parse_source(&args.a)?.quantize(args.m)?;
    match format {
        Format::Csv => {
            let rows: Vec<(f64, f64)> = q.positions().zip(q.weights()).collect();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["position", "weight"])?;
            for r in rows {
                w.serialize(r)?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
        _ => {
            let mut s = q.to_json();
            s.push('\n');
            Ok(s.into_bytes())
        }
    }
}

fn cmd_sample(args: &SampleArgs, cli: &Cli) -> Result<Vec<u8>> {
    let format = format_or(cli, Format::Csv, &[Format::Csv, Format::Json], "sample")?;
    let d = parse_source(&args.a)?;
    let xs = d.sample(args.n, cli.seed);
    match format {
        Format::Json => json_bytes(&json!({ "prng": PRNG_NAME, "seed": cli.seed, "samples": xs })),
        _ => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["value"])?;
            for x in xs {
                w.serialize([x])?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
    }
}
