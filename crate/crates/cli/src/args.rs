use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quasizero::Complex64;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "quasizero", version, about = "Zeros of exp(z) + a z^k: enumeration, certification, bounds, geometry")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate and refine the zero chain.
    Zeros(ZerosArgs),
    /// Count zeros inside a rectangle or disk by the argument principle.
    Count(CountArgs),
    /// Sample one of the lower bounds on |f|.
    Bounds(BoundsArgs),
    /// Export level curves or band cells for plotting.
    Geometry(GeometryArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Power of the polynomial term.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Coefficient, written `RE+IMi` (e.g. `0.5-0.5i`, `3i`, `-2`).
    #[arg(long, default_value = "1+0i", value_parser = parse_complex, allow_hyphen_values = true)]
    #[serde(serialize_with = "ser_complex")]
    pub a: Complex64,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Add wall-clock timings to JSON output (makes output non-reproducible).
    #[arg(long)]
    #[serde(skip)]
    pub timings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct ZerosArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Branch index range `LO..HI` (inclusive).
    #[arg(long, default_value = "1..40", value_parser = parse_int_range, allow_hyphen_values = true)]
    pub nu: (i64, i64),
    /// Also report all zeros with |z| <= R.
    #[arg(long)]
    pub small_radius: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct CountArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Rectangle `RE_LO,RE_HI,IM_LO,IM_HI`.
    #[arg(long, value_parser = parse_rect, allow_hyphen_values = true, conflicts_with = "disk", required_unless_present = "disk")]
    pub rect: Option<[f64; 4]>,
    /// Disk `RE,IM,RADIUS`.
    #[arg(long, value_parser = parse_disk, allow_hyphen_values = true)]
    pub disk: Option<[f64; 3]>,
    #[arg(long, default_value_t = 40)]
    pub max_depth: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ineq {
    Eq3,
    Eq4,
    Eq7,
    /// Probe |f| >= |e^z|/2 on sigma_2 > h; informational.
    Eq4Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HSpec {
    Auto(f64),
    Value(f64),
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub ineq: Ineq,
    /// Band level: a number, or `auto+X` for the relevant threshold plus X.
    #[arg(long, value_parser = parse_h)]
    pub h: Option<HSpec>,
    /// Inner exclusion radius.
    #[arg(long = "radius", visible_alias = "R", default_value_t = 1.0)]
    pub radius: f64,
    /// Sample count; 100000 for eq7, 10000 otherwise.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Overridden by QUASIZERO_SEED when set.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000.0)]
    pub window: f64,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 30)]
    pub nu_hi: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Curve {
    Gamma,
}

#[derive(Debug, Args, Serialize)]
pub struct GeometryArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, value_enum, conflicts_with = "quadrangle", required_unless_present = "quadrangle")]
    pub curve: Option<Curve>,
    #[arg(long)]
    pub quadrangle: bool,
    /// Coordinate family (1 or 2).
    #[arg(long = "S", default_value_t = 1)]
    pub family: u8,
    /// Half-plane: 1 for Im < 0, 2 for Im >= 0.
    #[arg(long = "j", default_value_t = 2)]
    pub half: u8,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub h: f64,
    #[arg(long, default_value = "10..200", value_parser = parse_real_range, allow_hyphen_values = true)]
    pub im: (f64, f64),
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 10, allow_hyphen_values = true)]
    pub nu: i64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(z)
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let z = Complex64::from_str(s.trim()).map_err(|_| format!("`{s}` is not a complex number of the form RE+IMi"))?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(z)
}

fn split_range(s: &str) -> Result<(&str, &str), String> {
    s.split_once("..").ok_or_else(|| format!("`{s}` is not a range LO..HI"))
}

pub fn parse_int_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = split_range(s)?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("bad range start `{lo}`: {e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("bad range end `{hi}`: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

pub fn parse_real_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = split_range(s)?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad range start `{lo}`: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad range end `{hi}`: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(format!("bad range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn parse_reals<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got `{s}`"));
    }
    let mut out = [0.0_f64; N];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part.trim().parse().map_err(|e| format!("bad number `{part}`: {e}"))?;
        if !slot.is_finite() {
            return Err(format!("`{part}` is not finite"));
        }
    }
    Ok(out)
}

pub fn parse_rect(s: &str) -> Result<[f64; 4], String> {
    parse_reals::<4>(s)
}

pub fn parse_disk(s: &str) -> Result<[f64; 3], String> {
    parse_reals::<3>(s)
}

pub fn parse_h(s: &str) -> Result<HSpec, String> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("auto") {
        if rest.is_empty() {
            return Ok(HSpec::Auto(0.0));
        }
        let margin: f64 = rest.parse().map_err(|e| format!("bad margin in `{s}`: {e}"))?;
        return Ok(HSpec::Auto(margin));
    }
    let h: f64 = s.parse().map_err(|e| format!("`{s}` is neither a number nor auto+X: {e}"))?;
    Ok(HSpec::Value(h))
}
