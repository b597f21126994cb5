//! Sampled checks of the lower bounds on `|f|` away from the zero chain, the
//! punctured-band constant, and the cells the cut lines carve out of the band.
//!
//! Sampling is uniform rejection sampling on a rectangle hull. Samples are
//! drawn in fixed-size batches, each from its own ChaCha8 stream (stream id =
//! batch index), so the result depends only on `(seed, n)` and not on how the
//! batches are scheduled.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{Family, Quasipolynomial};
use crate::oracle::{isolate_zeros, Rect};
use crate::regions::{classify, min_h_t1, min_h_t2, solve_level, RegionKind};
use crate::zeros::{
    asymptotic_guess, branch_offset, enumerate_zeros, newton_refine, nu_min, NEWTON_MAX_ITER, NEWTON_TOL,
};

const BATCH: usize = 1024;
const MAX_REJECTIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Inequality {
    /// `|f| >= |a||z|^k / 2` on `sigma_1 < -h`.
    Eq3,
    /// `|f| >= |e^z| / 2` on `sigma_1 > h`.
    Eq4,
    /// `|f| >= C_delta |z|^k` on the punctured band.
    Eq7,
    /// The `|e^z| / 2` bound probed on `sigma_2 > h` instead; informational.
    #[serde(rename = "eq4-printed")]
    Eq4Printed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inequality: Inequality,
    pub samples: usize,
    pub min_ratio: f64,
    pub threshold: f64,
    pub worst_point: Complex64,
    pub pass: bool,
    pub seed: u64,
    pub h: f64,
    /// `1 - e^(-h) / |a|` (Eq3) or `1 - |a| e^(-h)` (Eq4).
    pub analytic_floor: Option<f64>,
    /// Eq7 only: `|C(2n) - C(n)| / C(n)`.
    pub stability: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrangleGeom {
    pub nu: i64,
    /// Counterclockwise from the lower-left corner.
    pub corners: [Complex64; 4],
    pub diag: f64,
    pub lower_cut: f64,
    pub upper_cut: f64,
}

#[derive(Debug, Clone, Copy)]
struct Best {
    ratio: f64,
    point: Complex64,
}

impl Best {
    fn merge(self, other: Best) -> Best {
        if other.ratio < self.ratio {
            other
        } else {
            self
        }
    }
}

fn run_batch<F>(seed: u64, batch: usize, size: usize, hull: &Rect, accept: &F) -> Result<Best>
where
    F: Fn(Complex64) -> Result<Option<f64>> + Sync,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    let mut best = Best { ratio: f64::INFINITY, point: Complex64::new(f64::NAN, f64::NAN) };
    let mut drawn = 0;
    let mut misses = 0;
    while drawn < size {
        let z = Complex64::new(rng.random_range(hull.re_lo..hull.re_hi), rng.random_range(hull.im_lo..hull.im_hi));
        match accept(z)? {
            Some(ratio) => {
                drawn += 1;
                misses = 0;
                best = best.merge(Best { ratio, point: z });
            }
            None => {
                misses += 1;
                if misses >= MAX_REJECTIONS {
                    return Err(Error::EmptyRegion(format!("{MAX_REJECTIONS} consecutive rejections")));
                }
            }
        }
    }
    Ok(best)
}

fn sample_min<F>(n: usize, seed: u64, hull: &Rect, accept: F) -> Result<Best>
where
    F: Fn(Complex64) -> Result<Option<f64>> + Sync,
{
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let batches = n.div_ceil(BATCH);
    let size = |b: usize| if b + 1 == batches { n - b * BATCH } else { BATCH };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<Best>> = {
        use rayon::prelude::*;
        (0..batches).into_par_iter().map(|b| run_batch(seed, b, size(b), hull, &accept)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<Best>> = (0..batches).map(|b| run_batch(seed, b, size(b), hull, &accept)).collect();

    let mut best: Option<Best> = None;
    for r in results {
        let r = r?;
        best = Some(match best {
            None => r,
            Some(b) => b.merge(r),
        });
    }
    Ok(best.expect("n > 0"))
}

fn check_sampling(h: f64, radius: f64, window: f64) -> Result<Rect> {
    if !(h.is_finite() && radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidQuery(format!("need finite h and R > 0, got h = {h}, R = {radius}")));
    }
    if !(window.is_finite() && window > radius) {
        return Err(Error::EmptyRegion(format!("window {window} does not reach beyond R = {radius}")));
    }
    Rect::new(-window, window, -window, window)
}

#[allow(clippy::too_many_arguments)]
fn region_report(
    q: &Quasipolynomial,
    inequality: Inequality,
    family: Family,
    kind: RegionKind,
    h: f64,
    radius: f64,
    n: usize,
    seed: u64,
    window: f64,
) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let hull = check_sampling(h, radius, window)?;
    let use_alg = kind == RegionKind::T1;
    let best = sample_min(n, seed, &hull, |z| {
        if z.norm() > window || classify(q, family, h, radius, z)?.kind != kind {
            return Ok(None);
        }
        let ratio = if use_alg { q.ratio_alg(z)? } else { q.ratio_exp(z)? };
        Ok(Some(ratio.value))
    })?;
    let analytic_floor = match inequality {
        Inequality::Eq3 => Some(1.0 - (-h).exp() * q.abs_b()),
        Inequality::Eq4 => Some(1.0 - (-h).exp() * q.abs_a()),
        _ => None,
    };
    Ok(BoundReport {
        inequality,
        samples: n,
        min_ratio: best.ratio,
        threshold: 0.5,
        worst_point: best.point,
        pass: best.ratio >= 0.5,
        seed,
        h,
        analytic_floor,
        stability: None,
    })
}

/// `min |f| / (|a||z|^k)` over `n` uniform samples of `{sigma_1 < -h, R < |z| <= window}`.
pub fn verify_eq3(q: &Quasipolynomial, h: f64, radius: f64, n: usize, seed: u64, window: f64) -> Result<BoundReport> {
    if !(h > min_h_t1(q)) {
        return Err(Error::InvalidQuery(format!("h = {h} must exceed ln(2/|a|) = {}", min_h_t1(q))));
    }
    region_report(q, Inequality::Eq3, Family::S1, RegionKind::T1, h, radius, n, seed, window)
}

/// `min |f| / |e^z|` over `n` uniform samples of `{sigma_1 > h, R < |z| <= window}`.
pub fn verify_eq4(q: &Quasipolynomial, h: f64, radius: f64, n: usize, seed: u64, window: f64) -> Result<BoundReport> {
    if !(h > min_h_t2(q)) {
        return Err(Error::InvalidQuery(format!("h = {h} must exceed ln(2|a|) = {}", min_h_t2(q))));
    }
    region_report(q, Inequality::Eq4, Family::S1, RegionKind::T2, h, radius, n, seed, window)
}

/// Same ratio as [`verify_eq4`] but on `{sigma_2 > h}`. The bound is not
/// expected to hold there; the report is for inspection only.
pub fn probe_eq4_printed(
    q: &Quasipolynomial,
    h: f64,
    radius: f64,
    n: usize,
    seed: u64,
    window: f64,
) -> Result<BoundReport> {
    region_report(q, Inequality::Eq4Printed, Family::S2, RegionKind::T2, h, radius, n, seed, window)
}

/// Every zero with `|Im z| <= 2 pi (nu_hi + 1) + 4 pi` near the band: the chain
/// for `nu_min <= |nu| <= nu_hi + 1`, plus whatever quadtree isolation finds
/// between the two innermost chain members. Sorted by imaginary part.
pub fn band_zeros(q: &Quasipolynomial, h: f64, nu_hi: i64, margin: f64) -> Result<Vec<Complex64>> {
    let floor = nu_min(q);
    let top = nu_hi.max(floor) + 1;
    let mut zeros: Vec<Complex64> = Vec::new();
    for (lo, hi) in [(-top, -floor), (floor, top)] {
        zeros.extend(enumerate_zeros(q, lo, hi)?.records.iter().map(|r| r.refined));
    }
    let im_hi = asymptotic_guess(q, floor)?.im - PI;
    let im_lo = asymptotic_guess(q, -floor)?.im + PI;
    let k = q.kf();
    let reach = im_hi.abs().max(im_lo.abs()) + h + 10.0;
    let re_hi = h + k * reach.ln().max(0.0) + margin + 1.0;
    let re_lo = -h - margin - 1.0 - q.ln_abs_a().abs();
    let inner = Rect::new(re_lo, re_hi, im_lo, im_hi)?;
    for b in isolate_zeros(q, &inner, 1e-2)? {
        let z = newton_refine(q, b.center(), NEWTON_MAX_ITER, NEWTON_TOL)?.zero;
        if zeros.iter().all(|w| (w - z).norm() > 1e-6) {
            zeros.push(z);
        }
    }
    zeros.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    Ok(zeros)
}

fn nearest_distance(sorted: &[Complex64], z: Complex64, reach: f64) -> f64 {
    let start = sorted.partition_point(|w| w.im < z.im - reach);
    sorted[start..].iter().take_while(|w| w.im <= z.im + reach).map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min)
}

#[allow(clippy::too_many_arguments)]
fn punctured_min(
    q: &Quasipolynomial,
    h: f64,
    radius: f64,
    delta: f64,
    zeros: &[Complex64],
    hull: &Rect,
    n: usize,
    seed: u64,
) -> Result<Best> {
    let im_cap = hull.im_hi;
    sample_min(n, seed, hull, |z| {
        if z.im.abs() > im_cap || classify(q, Family::S1, h, radius, z)?.kind != RegionKind::Band {
            return Ok(None);
        }
        if nearest_distance(zeros, z, delta) <= delta {
            return Ok(None);
        }
        Ok(Some(q.ratio_alg(z)?.value))
    })
}

/// Estimate of the constant in `|f| >= C_delta |a| |z|^k` on the band
/// `|sigma_1| <= h`, `|z| > R`, `|Im z| <= 2 pi nu_hi`, with the open
/// `delta`-disks around every zero removed. The reported `min_ratio` is
/// `min |f| / (|a||z|^k)`; `stability` compares it with a `2n` rerun.
pub fn estimate_c_delta(
    q: &Quasipolynomial,
    h: f64,
    radius: f64,
    delta: f64,
    nu_hi: i64,
    n: usize,
    seed: u64,
) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidQuery(format!("delta must be positive, got {delta}")));
    }
    if !(h > 0.0 && h.is_finite() && radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidQuery(format!("need h > 0 and R > 0, got h = {h}, R = {radius}")));
    }
    if nu_hi < nu_min(q) {
        return Err(Error::InvalidQuery(format!("nu_hi = {nu_hi} is below nu_min = {}", nu_min(q))));
    }
    let zeros = band_zeros(q, h, nu_hi, delta)?;
    let min_gap = zeros
        .iter()
        .enumerate()
        .flat_map(|(i, a)| zeros[i + 1..].iter().map(move |b| (a - b).norm()))
        .fold(f64::INFINITY, f64::min);
    if 2.0 * delta >= min_gap {
        return Err(Error::DeltaTooLarge { delta, min_gap });
    }
    let im_cap = TAU * nu_hi as f64;
    let k = q.kf();
    let re_hi = h + k * (im_cap + h + 10.0 + k * (im_cap + 10.0).ln()).ln() + 1.0;
    let hull = Rect::new(-h - 1.0, re_hi, -im_cap, im_cap)?;
    let first = punctured_min(q, h, radius, delta, &zeros, &hull, n, seed)?;
    let second = punctured_min(q, h, radius, delta, &zeros, &hull, 2 * n, seed)?;
    let stability = if first.ratio > 0.0 { (second.ratio - first.ratio).abs() / first.ratio } else { f64::INFINITY };
    Ok(BoundReport {
        inequality: Inequality::Eq7,
        samples: n,
        min_ratio: first.ratio,
        threshold: f64::MIN_POSITIVE,
        worst_point: first.point,
        pass: first.ratio >= f64::MIN_POSITIVE,
        seed,
        h,
        analytic_floor: None,
        stability: Some(stability),
    })
}

/// The band cell between the two consecutive cut lines
/// `Im z = Im z_mu - branch_offset(mu)` that bracket `z_nu`,
/// with corners on `sigma_1 = -h` and `sigma_1 = +h`.
pub fn quadrangle(q: &Quasipolynomial, nu: i64, h: f64) -> Result<QuadrangleGeom> {
    if nu.abs() < nu_min(q) {
        return Err(Error::InvalidIndex { nu });
    }
    if !(h > q.ln_abs_a().abs() && h.is_finite()) {
        return Err(Error::InvalidQuery(format!("h = {h} must exceed |ln|a|| = {}", q.ln_abs_a().abs())));
    }
    let sign = nu.signum();
    let mut zero_nu = None;
    let mut cuts = Vec::new();
    for mu in (nu - 3)..=(nu + 3) {
        if mu == 0 || mu.signum() != sign {
            continue;
        }
        let z = newton_refine(q, asymptotic_guess(q, mu)?, NEWTON_MAX_ITER, NEWTON_TOL)?.zero;
        if mu == nu {
            zero_nu = Some(z);
        }
        cuts.push(z.im - branch_offset(q, mu));
    }
    let z = zero_nu.expect("nu is in its own window");
    cuts.sort_by(f64::total_cmp);
    let (lower_cut, upper_cut) = cuts
        .windows(2)
        .find(|w| w[0] <= z.im && z.im < w[1])
        .map(|w| (w[0], w[1]))
        .ok_or(Error::DegenerateCut { nu })?;
    if (z.im - lower_cut).min(upper_cut - z.im) < 1e-3 {
        return Err(Error::DegenerateCut { nu });
    }
    let corner = |level: f64, y: f64| solve_level(q, Family::S1, level, y).map(|x| Complex64::new(x, y));
    let corners = [corner(-h, lower_cut)?, corner(h, lower_cut)?, corner(h, upper_cut)?, corner(-h, upper_cut)?];
    let mut diag: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            diag = diag.max((corners[i] - corners[j]).norm());
        }
    }
    Ok(QuadrangleGeom { nu, corners, diag, lower_cut, upper_cut })
}

impl QuadrangleGeom {
    /// Bounding box of the four corners.
    pub fn hull(&self) -> Result<Rect> {
        let re_lo = self.corners.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        let re_hi = self.corners.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        Rect::new(re_lo, re_hi, self.lower_cut, self.upper_cut)
    }

    /// Inside the curvilinear cell: between the cuts and inside the band.
    pub fn contains(&self, q: &Quasipolynomial, h: f64, z: Complex64) -> bool {
        z.im > self.lower_cut && z.im < self.upper_cut && q.sigma(Family::S1, z).map(|s| s.abs() < h).unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::count_zeros_rect;

    fn q(k: u32, re: f64, im: f64) -> Quasipolynomial {
        Quasipolynomial::new(k, Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn eq3_and_eq4_pass_for_unit_coefficient() {
        let p = q(1, 1.0, 0.0);
        let h = std::f64::consts::LN_2 + 0.5;
        let r3 = verify_eq3(&p, h, 1.0, 10_000, 7, 1000.0).unwrap();
        assert!(r3.pass && r3.min_ratio >= 0.5);
        assert!(r3.min_ratio >= r3.analytic_floor.unwrap() - 1e-12);
        let r4 = verify_eq4(&p, h, 1.0, 10_000, 7, 1000.0).unwrap();
        assert!(r4.pass && r4.min_ratio >= 0.5);
        assert_eq!(r4.samples, 10_000);
    }

    #[test]
    fn eq_reports_for_other_coefficients() {
        let p = q(2, 0.5, 0.5);
        let r = verify_eq3(&p, min_h_t1(&p) + 0.5, 1.0, 4000, 1, 1000.0).unwrap();
        assert!(r.pass);
        let p = q(3, 2.0, 0.0);
        let r = verify_eq4(&p, 4.0_f64.ln() + 0.5, 1.0, 4000, 1, 1000.0).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn sampling_errors() {
        let p = q(1, 1.0, 0.0);
        assert_eq!(verify_eq3(&p, 2.0, 1.0, 0, 7, 1000.0), Err(Error::EmptySample));
        assert!(matches!(verify_eq4(&p, 2.0, 10.0, 100, 7, 5.0), Err(Error::EmptyRegion(_))));
        assert!(matches!(verify_eq3(&p, 0.1, 1.0, 100, 7, 1000.0), Err(Error::InvalidQuery(_))));
    }

    #[test]
    fn same_seed_same_report() {
        let p = q(1, 1.0, 0.0);
        let a = verify_eq3(&p, 2.0, 1.0, 3000, 11, 500.0).unwrap();
        let b = verify_eq3(&p, 2.0, 1.0, 3000, 11, 500.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.min_ratio.to_bits(), b.min_ratio.to_bits());
        let c = verify_eq3(&p, 2.0, 1.0, 3000, 12, 500.0).unwrap();
        assert_ne!(a.worst_point, c.worst_point);
    }

    #[test]
    fn zeros_are_never_sampled() {
        let p = q(1, 1.0, 0.0);
        let zeros = band_zeros(&p, 2.0, 6, 0.5).unwrap();
        for z in &zeros {
            assert_eq!(nearest_distance(&zeros, *z, 0.5), 0.0);
        }
    }

    #[test]
    fn band_zeros_include_inner_chain() {
        let p = q(1, 1.0, 0.0);
        let zeros = band_zeros(&p, 2.0, 8, 0.5).unwrap();
        // nu in +-[0, 9] plus the real root.
        assert_eq!(zeros.len(), 21);
        assert!(zeros.iter().any(|z| (z.re + 0.567_143_290_4).abs() < 1e-9 && z.im.abs() < 1e-12));
    }

    #[test]
    fn c_delta_small_run() {
        let p = q(1, 1.0, 0.0);
        let r = estimate_c_delta(&p, 2.0, 1.0, 0.5, 10, 5000, 3).unwrap();
        assert!(r.pass);
        assert!(r.min_ratio > 0.0 && r.min_ratio < 1.0);
        assert!(r.stability.unwrap() < 0.5);
        assert!(matches!(estimate_c_delta(&p, 2.0, 1.0, 3.5, 10, 100, 3), Err(Error::DeltaTooLarge { .. })));
    }

    #[test]
    fn quadrangle_for_nu_10() {
        let p = q(1, 1.0, 0.0);
        let g = quadrangle(&p, 10, 2.0).unwrap();
        assert!((g.upper_cut - g.lower_cut - TAU).abs() < 0.1);
        let width = g.corners[1].re - g.corners[0].re;
        assert!((width - 4.0).abs() < 0.2, "{width}");
        let expected = (4.0 * PI * PI + 16.0_f64).sqrt();
        assert!((g.diag - expected).abs() < 0.1, "{} vs {expected}", g.diag);
        let z = newton_refine(&p, asymptotic_guess(&p, 10).unwrap(), 50, 1e-12).unwrap().zero;
        assert!(g.contains(&p, 2.0, z));
        let hull = g.hull().unwrap();
        assert_eq!(count_zeros_rect(&p, &hull, 40).unwrap().count, 1);
    }

    #[test]
    fn quadrangle_corners_are_counterclockwise() {
        let p = q(2, 0.0, 3.0);
        let g = quadrangle(&p, -12, 3.0).unwrap();
        let c = g.corners;
        let mut area = 0.0;
        for i in 0..4 {
            let (a, b) = (c[i], c[(i + 1) % 4]);
            area += a.re * b.im - b.re * a.im;
        }
        assert!(area > 0.0);
        assert!(quadrangle(&p, 2, 3.0).is_err());
        assert!(quadrangle(&p, 10, 0.5).is_err());
    }

    #[test]
    fn diagonal_flattens() {
        let p = q(1, 1.0, 0.0);
        let h = 2.0;
        let limit = (4.0 * PI * PI + 4.0 * h * h).sqrt();
        let g = quadrangle(&p, 100, h).unwrap();
        assert!((g.diag - limit).abs() / limit < 0.01);
    }
}
