use std::fmt::Write as _;
use std::time::Instant;

use quasizero::bounds::{estimate_c_delta, probe_eq4_printed, quadrangle, verify_eq3, verify_eq4};
use quasizero::oracle::{count_zeros_disk, count_zeros_rect, Rect};
use quasizero::regions::{gamma_polyline, min_h_t1, min_h_t2, HalfPlane};
use quasizero::zeros::{enumerate_zeros, small_zeros, spacing_report, SpacingReport, ZeroRecord};
use quasizero::{Complex64, Error, Family, Quasipolynomial};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{BoundsArgs, Common, CountArgs, Format, GeometryArgs, HSpec, Ineq, ZerosArgs};

pub const SCHEMA: u32 = 1;
pub const SEED_ENV: &str = "QUASIZERO_SEED";

/// Failure of a subcommand, already mapped to its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidQuasipolynomial(_) | Error::InvalidQuery(_) | Error::InvalidIndex { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

/// Rendered output plus the exit code it should end with.
pub struct Outcome {
    pub body: String,
    pub code: u8,
}

type Run = Result<Outcome, Failure>;

fn quasi(common: &Common) -> Result<Quasipolynomial, Failure> {
    Ok(Quasipolynomial::new(common.k, common.a)?)
}

fn envelope(command: &str, config: &impl Serialize, results: Value, elapsed: Option<f64>) -> String {
    let timings = elapsed.map_or(Value::Null, |s| json!({ "total_seconds": s }));
    let doc = json!({
        "schema": SCHEMA,
        "command": command,
        "config": config,
        "results": results,
        "timings": timings,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json values always serialize");
    s.push('\n');
    s
}

fn elapsed(common: &Common, start: Instant) -> Option<f64> {
    common.timings.then(|| start.elapsed().as_secs_f64())
}

/// `f64` in shortest round-trip form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory writer");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

/// Maximal runs of consecutive indices of the same sign.
fn consecutive_runs(records: &[ZeroRecord]) -> Vec<Vec<ZeroRecord>> {
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|r| r.nu);
    let mut runs: Vec<Vec<ZeroRecord>> = Vec::new();
    for r in sorted {
        match runs.last_mut() {
            Some(run) if run.last().is_some_and(|p| p.nu + 1 == r.nu && p.nu.signum() == r.nu.signum()) => run.push(r),
            _ => runs.push(vec![r]),
        }
    }
    runs
}

#[derive(Serialize)]
struct RunSpacing {
    nu_lo: i64,
    nu_hi: i64,
    #[serde(flatten)]
    report: SpacingReport,
}

fn spacing_blocks(records: &[ZeroRecord]) -> Result<Vec<RunSpacing>, Failure> {
    consecutive_runs(records)
        .into_iter()
        .filter(|run| run.len() >= 2)
        .map(|run| {
            let report = spacing_report(&run)?;
            Ok(RunSpacing { nu_lo: run[0].nu, nu_hi: run[run.len() - 1].nu, report })
        })
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), num)
}

pub fn zeros(args: &ZerosArgs) -> Run {
    let start = Instant::now();
    let q = quasi(&args.common)?;
    if let Some(r) = args.small_radius {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Failure::Usage(format!("--small-radius must be positive, got {r}")));
        }
    }
    let (lo, hi) = args.nu;
    let e = enumerate_zeros(&q, lo, hi)?;
    let spacing = spacing_blocks(&e.records)?;
    let small = args.small_radius.map(|r| small_zeros(&q, r)).transpose()?;

    let body = match args.format {
        Format::Json => envelope(
            "zeros",
            args,
            json!({ "records": e.records, "skipped": e.skipped, "spacing": spacing, "small_zeros": small }),
            elapsed(&args.common, start),
        ),
        Format::Csv | Format::Text => {
            let mut w = csv_writer();
            w.write_record(["nu", "guess_re", "guess_im", "zero_re", "zero_im", "residual", "newton_iters"])
                .map_err(io_failure)?;
            for r in &e.records {
                w.write_record([
                    r.nu.to_string(),
                    num(r.guess.re),
                    num(r.guess.im),
                    num(r.refined.re),
                    num(r.refined.im),
                    num(r.residual),
                    r.newton_iters.to_string(),
                ])
                .map_err(io_failure)?;
            }
            let mut out = finish_csv(w);
            if !e.skipped.is_empty() {
                let list: Vec<String> = e.skipped.iter().map(i64::to_string).collect();
                let _ = writeln!(out, "# skipped (|nu| < {}): {}", quasizero::zeros::nu_min(&q), list.join(" "));
            }
            for s in &spacing {
                let max_gap_dev = s.report.gaps.iter().map(|g| g.deviation).fold(0.0, f64::max);
                let _ = writeln!(
                    out,
                    "# spacing nu {}..{}: gaps {}, max |gap - 2pi| {}, max from |nu|>=10 {}, decay ratio {}",
                    s.nu_lo,
                    s.nu_hi,
                    s.report.gaps.len(),
                    num(max_gap_dev),
                    opt(s.report.max_deviation_from_10),
                    opt(s.report.decay_ratio),
                );
            }
            if let (Some(r), Some(small)) = (args.small_radius, &small) {
                let _ = writeln!(out, "# zeros with |z| <= {}: {}", num(r), small.len());
                for z in small {
                    let _ = writeln!(out, "# small {},{}", num(z.re), num(z.im));
                }
            }
            out
        }
    };
    Ok(Outcome { body, code: 0 })
}

fn io_failure(e: csv::Error) -> Failure {
    Failure::Numeric(format!("writing csv: {e}"))
}

pub fn count(args: &CountArgs) -> Run {
    let start = Instant::now();
    let q = quasi(&args.common)?;
    let result = match (args.rect, args.disk) {
        (Some([a, b, c, d]), None) => count_zeros_rect(&q, &Rect::new(a, b, c, d)?, args.max_depth)?,
        (None, Some([re, im, r])) => count_zeros_disk(&q, Complex64::new(re, im), r, args.max_depth)?,
        _ => return Err(Failure::Usage("give exactly one of --rect or --disk".into())),
    };
    let body = match args.format {
        Format::Json => envelope("count", args, json!(result), elapsed(&args.common, start)),
        Format::Text | Format::Csv => {
            let mut out = format!("count: {}\n", result.count);
            let _ = writeln!(out, "edge_segments: {}", result.edge_segments);
            let _ = writeln!(out, "min_boundary_magnitude: {}", num(result.min_boundary_mag));
            out
        }
    };
    Ok(Outcome { body, code: 0 })
}

/// Seed from the environment when set, else from the flag.
pub fn resolve_seed(flag: u64) -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(s) => {
            s.trim().parse().map_err(|e| Failure::Usage(format!("{SEED_ENV}=`{s}` is not an unsigned integer: {e}")))
        }
        Err(_) => Ok(flag),
    }
}

pub fn resolve_h(q: &Quasipolynomial, ineq: Ineq, h: Option<HSpec>) -> f64 {
    let threshold = match ineq {
        Ineq::Eq3 => min_h_t1(q),
        Ineq::Eq4 | Ineq::Eq4Printed => min_h_t2(q),
        Ineq::Eq7 => q.ln_abs_a().abs(),
    };
    match h {
        Some(HSpec::Value(h)) => h,
        Some(HSpec::Auto(margin)) => threshold + margin,
        None if ineq == Ineq::Eq7 => 2.0,
        None => threshold + 0.5,
    }
}

#[derive(Serialize)]
struct BoundsConfig<'a> {
    #[serde(flatten)]
    args: &'a BoundsArgs,
    resolved_h: f64,
    resolved_seed: u64,
    resolved_samples: usize,
}

pub fn bounds(args: &BoundsArgs) -> Run {
    let start = Instant::now();
    let q = quasi(&args.common)?;
    let seed = resolve_seed(args.seed)?;
    let h = resolve_h(&q, args.ineq, args.h);
    let n = args.samples.unwrap_or(if args.ineq == Ineq::Eq7 { 100_000 } else { 10_000 });
    let report = match args.ineq {
        Ineq::Eq3 => verify_eq3(&q, h, args.radius, n, seed, args.window)?,
        Ineq::Eq4 => verify_eq4(&q, h, args.radius, n, seed, args.window)?,
        Ineq::Eq4Printed => probe_eq4_printed(&q, h, args.radius, n, seed, args.window)?,
        Ineq::Eq7 => estimate_c_delta(&q, h, args.radius, args.delta, args.nu_hi, n, seed)?,
    };
    let code = if report.pass { 0 } else { 1 };
    let config = BoundsConfig { args, resolved_h: h, resolved_seed: seed, resolved_samples: n };
    let body = envelope("bounds", &config, json!(report), elapsed(&args.common, start));
    Ok(Outcome { body, code })
}

pub fn geometry(args: &GeometryArgs) -> Run {
    let start = Instant::now();
    let q = quasi(&args.common)?;
    if args.quadrangle {
        let cell = quadrangle(&q, args.nu, args.h)?;
        let body = match args.format {
            Format::Json => envelope("geometry", args, json!(cell), elapsed(&args.common, start)),
            Format::Csv | Format::Text => {
                let mut w = csv_writer();
                w.write_record(["corner", "re", "im"]).map_err(io_failure)?;
                for (i, c) in cell.corners.iter().enumerate() {
                    w.write_record([i.to_string(), num(c.re), num(c.im)]).map_err(io_failure)?;
                }
                let mut out = finish_csv(w);
                let _ = writeln!(out, "# nu {}", cell.nu);
                let _ = writeln!(out, "# cuts {},{}", num(cell.lower_cut), num(cell.upper_cut));
                let _ = writeln!(out, "# diag {}", num(cell.diag));
                out
            }
        };
        return Ok(Outcome { body, code: 0 });
    }
    let family = Family::from_index(args.family)?;
    let half = HalfPlane::from_index(args.half)?;
    let (lo, hi) = args.im;
    let points = gamma_polyline(&q, family, half, args.h, lo, hi, args.n)?;
    let body = match args.format {
        Format::Json => envelope("geometry", args, json!({ "points": points }), elapsed(&args.common, start)),
        Format::Csv | Format::Text => {
            let mut w = csv_writer();
            w.write_record(["re", "im"]).map_err(io_failure)?;
            for p in &points {
                w.write_record([num(p.re), num(p.im)]).map_err(io_failure)?;
            }
            finish_csv(w)
        }
    };
    Ok(Outcome { body, code: 0 })
}
