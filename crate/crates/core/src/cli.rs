//! Command-line front end and the seeded benchmark harness.
//!
//! Exit codes: 0 on success, 2 when a verification fails, 1 on usage or
//! input errors. Structured output is JSON with every float written to 17
//! significant digits; the benchmark table is CSV.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Value};

use crate::covering::{axis_cover_spec, verify_covering_tol, DEFAULT_SAMPLES, DEFAULT_TOL};
use crate::error::Error;
use crate::exact::exact_certificate;
use crate::hadamard::{build_g, build_g_4kj, fixed_h4, hadamard_of_order, Block, LinearMap};
use crate::lpcore::{sample_ball, PNorm, PointCloud};
use crate::partition::{partition, verify_partition};
use crate::sandwich::{bm_lower_bound, bm_upper_certificate, check_sandwich_tol, FEASIBILITY_TOL};

/// Default sample count for the sampled left-inclusion check of `sandwich`.
pub const DEFAULT_SANDWICH_SAMPLES: usize = 100_000;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "BORSUK_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "borsuk",
    version,
    about = "Certificates for l_p ball geometry: Hadamard sandwiches, coverings and Borsuk partitions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for every pseudo-random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of random samples (command-specific default).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Slack on verification predicates.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tolerance: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a Hadamard matrix of the given order.
    Hadamard {
        #[arg(long)]
        order: usize,
    },
    /// Sandwich certificate of a Hadamard construction.
    Bm {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_p)]
        p: PNorm,
        #[arg(long, value_enum, default_value_t = Construction::Blocks)]
        construction: Construction,
    },
    /// Both inclusion margins of a construction, cross-checked by sampling.
    Sandwich {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_p)]
        p: PNorm,
        #[arg(long, value_enum, default_value_t = Construction::Blocks)]
        construction: Construction,
        /// Multiply the constructed map by this factor.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Verify the covering of C_(n,p) by 2n translates.
    Cover {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_p)]
        p: PNorm,
        /// Use this shrink factor instead of ((n-1)/n)^(1/p).
        #[arg(long)]
        shrink: Option<f64>,
    },
    /// Partition a 4-dimensional point cloud into parts of smaller diameter.
    Partition {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_p)]
        p: PNorm,
        /// Recompute every part diameter and fail with exit 2 unless all shrink.
        #[arg(long)]
        verify: bool,
    },
    /// Seeded partition benchmark over a grid of exponents and cloud sizes.
    Bench {
        /// Comma-separated exponents.
        #[arg(long, default_value = "1,1.5,2,3")]
        p_grid: String,
        /// Comma-separated cloud sizes.
        #[arg(long, default_value = "50,500")]
        sizes: String,
        /// Record wall-clock times (otherwise 0, keeping the table reproducible).
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// `n^(-1/p) H_n`; `n` must be a power of two.
    Sylvester,
    /// Power-of-two blocks on the diagonal.
    Blocks,
    /// `diag(I_j, (4k)^(-1/p) H_4k)` with `n = 4k + j`.
    #[value(name = "4kj")]
    #[serde(rename = "4kj")]
    FourKJ,
    /// The fixed 4x4 matrix with rows (1,-1,1,1), (1,1,-1,1), (1,1,1,-1), (-1,1,1,1).
    #[value(name = "fixed-h4")]
    FixedH4,
}

fn parse_p(s: &str) -> Result<PNorm, String> {
    s.parse::<PNorm>().map_err(|e| e.to_string())
}

/// Settings shared by every subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: Option<usize>,
    pub tolerance: f64,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: None,
            tolerance: DEFAULT_TOL,
            output: None,
        }
    }
}

impl From<&GlobalArgs> for RunConfig {
    fn from(g: &GlobalArgs) -> Self {
        Self {
            seed: g.seed,
            samples: g.samples,
            tolerance: g.tolerance,
            output: g.output.clone(),
        }
    }
}

/// Writes floats as `{:.16e}`: 17 significant digits, enough to round-trip.
#[derive(Clone, Copy, Debug, Default)]
pub struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes with [`FixedDigits`]; non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// A float in the same 17-digit form used for JSON.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct Outcome {
    body: String,
    verified: bool,
}

impl Outcome {
    fn json(value: &Value, verified: bool) -> Self {
        Self {
            body: to_json(value) + "\n",
            verified,
        }
    }
}

#[derive(Debug)]
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    if let Err(Failure(msg)) = configure_threads() {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_USAGE;
    }
    let config = RunConfig::from(&cli.global);
    let outcome = match dispatch(&cli.command, &config) {
        Ok(o) => o,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let written = match &config.output {
        Some(path) => fs::write(path, &outcome.body).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => out.write_all(outcome.body.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_USAGE;
    }
    if outcome.verified {
        EXIT_OK
    } else {
        let _ = writeln!(err, "verification failed");
        EXIT_VERIFICATION
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a pool built earlier in the same process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn dispatch(command: &Command, config: &RunConfig) -> Result<Outcome, Failure> {
    match command {
        Command::Hadamard { order } => cmd_hadamard(*order),
        Command::Bm { n, p, construction } => cmd_bm(*n, p, *construction),
        Command::Sandwich {
            n,
            p,
            construction,
            scale,
        } => cmd_sandwich(*n, p, *construction, *scale, config),
        Command::Cover { n, p, shrink } => cmd_cover(*n, p, *shrink, config),
        Command::Partition { input, p, verify } => cmd_partition(input, p, *verify),
        Command::Bench { p_grid, sizes, timing } => {
            let bench_config = BenchConfig {
                seed: config.seed,
                p_grid: parse_list(p_grid, "p-grid", parse_p)?,
                sizes: parse_list(sizes, "sizes", |s| s.parse::<usize>().map_err(|e| e.to_string()))?,
                timing: *timing,
            };
            let table = bench(&bench_config)?;
            Ok(Outcome {
                body: table.to_csv(),
                verified: table.rows.iter().all(|r| r.valid),
            })
        }
    }
}

fn parse_list<T>(raw: &str, flag: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, Failure> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(s).map_err(|e| Failure(format!("--{flag}: {e}"))))
        .collect()
}

fn cmd_hadamard(order: usize) -> Result<Outcome, Failure> {
    let h = hadamard_of_order(order).ok_or_else(|| {
        Failure(format!(
            "no Hadamard matrix of order {order} is available: supported orders are powers of two up to 8192 and 12"
        ))
    })?;
    let verified = h.is_hadamard();
    Ok(Outcome::json(
        &json!({ "order": order, "is_hadamard": verified, "rows": h }),
        verified,
    ))
}

/// The map for `construction` in dimension `n`.
pub fn construct(n: usize, nm: &PNorm, construction: Construction) -> crate::Result<LinearMap> {
    match construction {
        Construction::Blocks => build_g(n, nm),
        Construction::Sylvester => {
            if !n.is_power_of_two() {
                return Err(Error::Regime(format!(
                    "the Sylvester construction needs a power of two, got n = {n}"
                )));
            }
            build_g(n, nm)
        }
        Construction::FourKJ => {
            let (k, j) = (n / 4, n % 4);
            let h = hadamard_of_order(4 * k)
                .ok_or_else(|| Error::Regime(format!("no Hadamard matrix of order {} is available", 4 * k)))?;
            build_g_4kj(k, j, nm, &h)
        }
        Construction::FixedH4 => {
            if n != 4 {
                return Err(Error::DimensionMismatch { expected: 4, found: n });
            }
            Ok(LinearMap::from_blocks(vec![Block::ScaledSign {
                signs: fixed_h4(),
                root: nm.exponent(),
            }]))
        }
    }
}

fn exact_json(g: &LinearMap, nm: &PNorm) -> Value {
    match exact_certificate(g, nm) {
        Some(c) => json!({
            "r_power": c.r_power.to_string(),
            "r_exponent": c.r_exponent,
            "dual_power": c.dual_power.to_string(),
            "dual_exponent": c.dual_exponent,
        }),
        None => Value::Null,
    }
}

fn cmd_bm(n: usize, nm: &PNorm, construction: Construction) -> Result<Outcome, Failure> {
    let g = construct(n, nm, construction)?;
    let cert = bm_upper_certificate(&g, nm)?;
    let lower = bm_lower_bound(n, nm).ok();
    let feasible = cert.is_valid();
    let consistent = lower.is_none_or(|lb| !feasible || cert.r >= lb - FEASIBILITY_TOL);
    let sqrt_n = (n as f64).sqrt();
    let value = json!({
        "n": n,
        "p": nm,
        "construction": construction,
        "r": cert.r,
        "argmax_vertex": cert.argmax_vertex,
        "dual_margin": cert.dual_margin,
        "feasible": feasible,
        "lower_bound": lower,
        "sqrt_n": sqrt_n,
        "induction_bound": (2f64.sqrt() + 1.0) * sqrt_n,
        "exact": exact_json(&g, nm),
        "g": g.rows(),
    });
    Ok(Outcome::json(&value, feasible && consistent))
}

fn cmd_sandwich(
    n: usize,
    nm: &PNorm,
    construction: Construction,
    scale: f64,
    config: &RunConfig,
) -> Result<Outcome, Failure> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Failure(format!("--scale must be a positive number, got {scale}")));
    }
    let base = construct(n, nm, construction)?;
    let g = if scale == 1.0 { base } else { base.scaled(scale)? };
    let samples = config.samples.unwrap_or(DEFAULT_SANDWICH_SAMPLES);
    let report = check_sandwich_tol(&g, nm, samples, config.seed, config.tolerance)?;
    let verified = report.sampling_agrees;
    let mut value = serde_json::to_value(&report).expect("reports serialize");
    let extra = json!({
        "n": n,
        "p": nm,
        "construction": construction,
        "scale": scale,
        "seed": config.seed,
    });
    if let (Value::Object(map), Value::Object(more)) = (&mut value, extra) {
        map.extend(more);
    }
    Ok(Outcome::json(&value, verified))
}

fn cmd_cover(n: usize, nm: &PNorm, shrink: Option<f64>, config: &RunConfig) -> Result<Outcome, Failure> {
    let mut spec = axis_cover_spec(n, nm)?;
    if let Some(lambda) = shrink {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Failure(format!("--shrink must be a positive number, got {lambda}")));
        }
        spec = spec.with_lambda(lambda);
    }
    let samples = config.samples.unwrap_or(DEFAULT_SAMPLES);
    let report = verify_covering_tol(&spec, samples, config.seed, config.tolerance);
    let value = json!({
        "n": n,
        "p": nm,
        "lambda": spec.lambda,
        "seed": config.seed,
        "covered": report.covered,
        "worst_margin": report.worst_margin,
        "witness": report.witness,
        "samples_used": report.samples_used,
    });
    Ok(Outcome::json(&value, report.covered))
}

fn cmd_partition(input: &PathBuf, nm: &PNorm, verify: bool) -> Result<Outcome, Failure> {
    let text = fs::read_to_string(input).map_err(|e| Failure(format!("cannot read {}: {e}", input.display())))?;
    let cloud = PointCloud::from_json(&text).map_err(|e| Failure(format!("{}: {e}", input.display())))?;
    let result = partition(&cloud, nm)?;
    let mut value = serde_json::to_value(&result).expect("results serialize");
    let mut verified = true;
    if verify {
        let report = verify_partition(&cloud, nm, &result)?;
        verified = report.valid && report.matches_reported;
        if let Value::Object(map) = &mut value {
            map.insert(
                "verification".into(),
                serde_json::to_value(&report).expect("reports serialize"),
            );
        }
    }
    Ok(Outcome::json(&value, verified))
}

/// Parameters of the partition benchmark.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub seed: u64,
    pub p_grid: Vec<PNorm>,
    pub sizes: Vec<usize>,
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub p: PNorm,
    pub n_points: usize,
    pub method: &'static str,
    pub nonempty_parts: usize,
    pub ratio: f64,
    pub wall_time_ms: f64,
    /// The independent verifier accepted the partition.
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

pub const BENCH_HEADER: &str = "p,n_points,method,nonempty_parts,ratio,wall_time_ms";

impl BenchTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(BENCH_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{:.3}\n",
                r.p,
                r.n_points,
                r.method,
                r.nonempty_parts,
                fmt_f64(r.ratio),
                r.wall_time_ms
            ));
        }
        s
    }
}

/// The cloud of `size` uniform points of `C_(4,p)` used for grid cell
/// `(p_index, size_index)`.
pub fn bench_cloud(seed: u64, p_index: usize, size_index: usize, size: usize, nm: &PNorm) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((p_index as u64) << 32) | size_index as u64);
    let mut cloud = PointCloud::new(4).expect("dimension 4 is positive");
    for _ in 0..size {
        cloud.push(&sample_ball(&mut rng, 4, nm)).expect("samples are finite");
    }
    cloud
}

/// One partition per `(p, size)` grid cell, in grid order.
pub fn bench(config: &BenchConfig) -> crate::Result<BenchTable> {
    let mut rows = Vec::new();
    for (pi, nm) in config.p_grid.iter().enumerate() {
        for (si, &size) in config.sizes.iter().enumerate() {
            let cloud = bench_cloud(config.seed, pi, si, size, nm);
            let start = Instant::now();
            let result = partition(&cloud, nm)?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let report = verify_partition(&cloud, nm, &result)?;
            rows.push(BenchRow {
                p: *nm,
                n_points: size,
                method: result.method.as_str(),
                nonempty_parts: result.nonempty_parts,
                ratio: result.ratio,
                wall_time_ms: if config.timing { elapsed } else { 0.0 },
                valid: report.valid && result.nonempty_parts <= result.method.part_limit(),
            });
        }
    }
    Ok(BenchTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["borsuk"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn floats_use_seventeen_digits() {
        assert_eq!(to_json(&json!({ "x": 2.0 })), r#"{"x":2.0000000000000000e0}"#);
        assert_eq!(to_json(&json!([0.1])), "[1.0000000000000001e-1]");
        let v: f64 = serde_json::from_str::<Vec<f64>>(&to_json(&[std::f64::consts::PI])).unwrap()[0];
        assert_eq!(v, std::f64::consts::PI);
        assert_eq!(to_json(&[f64::NAN]), "[null]");
    }

    #[test]
    fn bm_example() {
        let (code, out, _) = run_args(&["bm", "--n", "4", "--p", "1"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_close!(v["r"].as_f64().unwrap(), 2.0, 1e-12);
        assert_close!(v["lower_bound"].as_f64().unwrap(), 2f64.sqrt(), 1e-12);
        assert_eq!(v["feasible"], true);
        assert_eq!(v["exact"]["r_power"], "2");
    }

    #[test]
    fn constructions() {
        let nm = PNorm::new(1.5).unwrap();
        assert!(construct(6, &nm, Construction::Sylvester).is_err());
        assert_eq!(construct(7, &nm, Construction::FourKJ).unwrap().dim(), 7);
        assert_eq!(construct(13, &nm, Construction::FourKJ).unwrap().dim(), 13);
        assert!(construct(21, &nm, Construction::FourKJ).is_err());
        assert!(construct(3, &nm, Construction::FixedH4).is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_args(&[]).0, 1);
        assert_eq!(run_args(&["frobnicate"]).0, 1);
        assert_eq!(run_args(&["bm", "--n", "4", "--p", "Infinity"]).0, 1);
        assert_eq!(run_args(&["bm", "--n", "4", "--p", "0.5"]).0, 1);
        assert_eq!(run_args(&["bm", "--n", "4", "--p", "3"]).0, 1);
        assert_eq!(run_args(&["hadamard", "--order", "6"]).0, 1);
        assert_eq!(run_args(&["--help"]).0, 0);
    }

    #[test]
    fn cover_failure_exits_two() {
        let (code, out, _) = run_args(&["cover", "--n", "2", "--p", "2", "--samples", "1000", "--shrink", "0.6"]);
        assert_eq!(code, 2);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["covered"], false);
    }

    #[test]
    fn empty_grid_is_header_only() {
        let (code, out, _) = run_args(&["bench", "--p-grid", "", "--sizes", "50"]);
        assert_eq!(code, 0);
        assert_eq!(out, format!("{BENCH_HEADER}\n"));
    }

    #[test]
    fn bench_is_deterministic() {
        let config = BenchConfig {
            seed: 3,
            p_grid: vec![PNorm::new(1.0).unwrap(), PNorm::infinity()],
            sizes: vec![60],
            timing: false,
        };
        let a = bench(&config).unwrap().to_csv();
        assert_eq!(a, bench(&config).unwrap().to_csv());
        assert!(a.lines().nth(2).unwrap().starts_with("inf,60,cube,"));
    }
}
