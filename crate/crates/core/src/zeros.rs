//! The zero chain of `exp(z) + a z^k`.
//!
//! Writing a zero as `z = 2 pi nu i + xi` turns `exp(z) = -a z^k` into the
//! fixed-point equation
//!
//! ```text
//! xi = ln|a| + i (arg a + sgn(nu) pi) + k Log(2 pi nu i + xi)
//! ```
//!
//! whose map contracts with factor about `k / |z|`. Dropping the
//! `Log(1 + xi / (2 pi nu i))` part gives the closed-form seed
//! `ln|a| + k ln(2 pi |nu|) + i (2 pi nu + sgn(nu) (pi + k pi / 2) + arg a)`,
//! off by `O(ln|nu| / |nu|)`. Each zero is refined twice, by Newton on `f`
//! and by the fixed-point iteration, and the two must agree.
//!
//! The seed's real part grows like `+k ln(2 pi |nu|)`; that is the only sign
//! for which `sigma_1(z) = ln|a|` holds on the chain. The `k pi / 2` term takes
//! the sign of `nu` because `Log(2 pi nu i)` has imaginary part `sgn(nu) pi / 2`;
//! the `pi` from `arg(-a)` is mirrored as well so that, for real `a`, the zero
//! `-nu` is the conjugate of the zero `nu`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{ensure_finite, Quasipolynomial};
use crate::oracle::{count_zeros_disk, isolate_zeros, Rect};

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;
pub const FIXED_POINT_TOL: f64 = 1e-13;
pub const FIXED_POINT_MAX_ITER: usize = 100;
/// Newton iterates may not wander farther than this from their seed.
pub const TRUST_RADIUS: f64 = 5.0;
/// Largest admissible gap between the two refiners.
pub const AGREEMENT_TOL: f64 = 1e-9;
/// Converged records must have a relative residual at or below this.
pub const RESIDUAL_CEILING: f64 = 1e-10;

/// One zero of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub nu: i64,
    pub guess: Complex64,
    pub refined: Complex64,
    /// `|f| / max(|exp z|, |a||z|^k)` at `refined`.
    pub residual: f64,
    pub newton_iters: usize,
    pub fixedpoint_iters: usize,
}

/// Result of a Newton run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub zero: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    /// Sorted by imaginary part.
    pub records: Vec<ZeroRecord>,
    /// Indices dropped because `|nu| < nu_min`.
    pub skipped: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub nu: i64,
    pub gap: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingReport {
    pub gaps: Vec<Gap>,
    /// Largest `|gap - 2 pi|` over gaps starting at `|nu| >= 10`.
    pub max_deviation_from_10: Option<f64>,
    /// Mean deviation of the five gaps nearest `|nu| = 100` over that of the
    /// five nearest `|nu| = 10`, when both windows are present.
    pub decay_ratio: Option<f64>,
}

/// Smallest `|nu|` handled by the chain refiners: `max(5, k)`.
pub fn nu_min(q: &Quasipolynomial) -> i64 {
    5_i64.max(i64::from(q.k()))
}

/// `arg a` taken in `(-pi, pi]` for `nu > 0` and in `[-pi, pi)` for `nu < 0`.
fn signed_arg(q: &Quasipolynomial, nu: i64) -> f64 {
    let arg = q.arg_a();
    if nu < 0 && arg == PI {
        -PI
    } else {
        arg
    }
}

/// `sgn(nu) (pi + k pi / 2) + arg a`: imaginary offset of the `nu`-th seed
/// from `2 pi nu`. The negative branch uses `-pi` in place of `pi`, which
/// labels the same zeros but makes `nu` and `-nu` conjugate when `a` is real.
pub fn branch_offset(q: &Quasipolynomial, nu: i64) -> f64 {
    let s = nu.signum() as f64;
    s * (PI + q.kf() * FRAC_PI_2) + signed_arg(q, nu)
}

/// Closed-form seed for the `nu`-th zero.
pub fn asymptotic_guess(q: &Quasipolynomial, nu: i64) -> Result<Complex64> {
    if nu == 0 {
        return Err(Error::InvalidIndex { nu });
    }
    let k = q.kf();
    let n = nu as f64;
    let re = q.ln_abs_a() + k * (TAU * n.abs()).ln();
    let im = TAU * n + branch_offset(q, nu);
    Ok(Complex64::new(re, im))
}

/// The seed as literally printed with `[2 pi |nu|]^k` in the denominator.
/// Kept only to document that this variant leaves the zero curve.
pub fn displayed_sign_guess(q: &Quasipolynomial, nu: i64) -> Result<Complex64> {
    let g = asymptotic_guess(q, nu)?;
    Ok(Complex64::new(q.ln_abs_a() - q.kf() * (TAU * (nu as f64).abs()).ln(), g.im))
}

fn check_index(q: &Quasipolynomial, nu: i64) -> Result<()> {
    if nu.abs() < nu_min(q) {
        Err(Error::InvalidIndex { nu })
    } else {
        Ok(())
    }
}

/// Iterates `xi <- ln|a| + i(arg a + sgn(nu) pi) + k Log(2 pi nu i + xi)` from the seed.
/// Returns the zero and the number of iterations.
pub fn fixedpoint_refine_counted(
    q: &Quasipolynomial,
    nu: i64,
    max_iter: usize,
    tol: f64,
) -> Result<(Complex64, usize)> {
    check_index(q, nu)?;
    if max_iter == 0 || !(tol > 0.0) {
        return Err(Error::InvalidQuery("max_iter must be >= 1 and tol > 0".into()));
    }
    let shift = Complex64::new(0.0, TAU * nu as f64);
    let constant = Complex64::new(q.ln_abs_a(), signed_arg(q, nu) + (nu.signum() as f64) * PI);
    let k = q.kf();
    let mut xi = asymptotic_guess(q, nu)? - shift;
    for i in 1..=max_iter {
        let next = constant + k * (shift + xi).ln();
        let step = (next - xi).norm();
        xi = next;
        if step < tol {
            return Ok((shift + xi, i));
        }
    }
    Err(Error::NotConverged { iterations: max_iter, last: shift + xi })
}

pub fn fixedpoint_refine(q: &Quasipolynomial, nu: i64, max_iter: usize, tol: f64) -> Result<Complex64> {
    fixedpoint_refine_counted(q, nu, max_iter, tol).map(|(z, _)| z)
}

/// Newton's method on `f`, with `f` and `f'` carried in scaled form so the
/// step `f / f'` never overflows. Stops once the relative residual drops
/// below `tol`, or when the step stalls at rounding level with the residual
/// already under [`RESIDUAL_CEILING`].
pub fn newton_refine(q: &Quasipolynomial, seed: Complex64, max_iter: usize, tol: f64) -> Result<Refinement> {
    ensure_finite(seed)?;
    if max_iter == 0 || !(tol > 0.0) {
        return Err(Error::InvalidQuery("max_iter must be >= 1 and tol > 0".into()));
    }
    let mut z = seed;
    let mut s = q.scaled(z)?;
    for iterations in 0..=max_iter {
        let residual = s.value.norm();
        if residual < tol {
            return finish(q, z, residual, iterations);
        }
        if iterations == max_iter {
            break;
        }
        if s.derivative.norm() < 1e-300 {
            return Err(Error::DerivativeVanished(z));
        }
        let step = s.value / s.derivative;
        z -= step;
        if !(z.re.is_finite() && z.im.is_finite()) || (z - seed).norm() > TRUST_RADIUS {
            return Err(Error::Diverged { seed, at: z });
        }
        s = q.scaled(z)?;
        if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(1.0) && s.value.norm() <= RESIDUAL_CEILING {
            return finish(q, z, s.value.norm(), iterations + 1);
        }
    }
    Err(Error::NotConverged { iterations: max_iter, last: z })
}

fn finish(q: &Quasipolynomial, z: Complex64, residual: f64, iterations: usize) -> Result<Refinement> {
    let s = q.scaled(z)?;
    if s.derivative.norm() < 1e-8 {
        return Err(Error::DegenerateZero(z));
    }
    Ok(Refinement { zero: z, residual, iterations })
}

fn refine_index(q: &Quasipolynomial, nu: i64) -> Result<ZeroRecord> {
    let guess = asymptotic_guess(q, nu)?;
    let newton = newton_refine(q, guess, NEWTON_MAX_ITER, NEWTON_TOL)?;
    let (fixed, fixedpoint_iters) = fixedpoint_refine_counted(q, nu, FIXED_POINT_MAX_ITER, FIXED_POINT_TOL)?;
    let gap = (newton.zero - fixed).norm();
    if gap > AGREEMENT_TOL {
        return Err(Error::RefinerDisagreement { nu, gap });
    }
    if newton.residual > RESIDUAL_CEILING {
        return Err(Error::NotConverged { iterations: newton.iterations, last: newton.zero });
    }
    Ok(ZeroRecord {
        nu,
        guess,
        refined: newton.zero,
        residual: newton.residual,
        newton_iters: newton.iterations,
        fixedpoint_iters,
    })
}

#[cfg(feature = "parallel")]
fn refine_all(q: &Quasipolynomial, indices: &[i64]) -> Result<Vec<ZeroRecord>> {
    use rayon::prelude::*;
    indices.par_iter().map(|&nu| refine_index(q, nu)).collect()
}

#[cfg(not(feature = "parallel"))]
fn refine_all(q: &Quasipolynomial, indices: &[i64]) -> Result<Vec<ZeroRecord>> {
    indices.iter().map(|&nu| refine_index(q, nu)).collect()
}

/// Refines every admissible `nu` in `[nu_lo, nu_hi]`.
pub fn enumerate_zeros(q: &Quasipolynomial, nu_lo: i64, nu_hi: i64) -> Result<Enumeration> {
    if nu_lo > nu_hi {
        return Err(Error::InvalidQuery(format!("empty index range {nu_lo}..{nu_hi}")));
    }
    let floor = nu_min(q);
    let (kept, skipped): (Vec<i64>, Vec<i64>) = (nu_lo..=nu_hi).partition(|nu| nu.abs() >= floor);
    let mut records = refine_all(q, &kept)?;
    for (i, a) in records.iter().enumerate() {
        for b in &records[i + 1..] {
            let distance = (a.refined - b.refined).norm();
            if distance < 1.0 {
                return Err(Error::DuplicateZero { first: a.nu, second: b.nu, distance });
            }
        }
    }
    records.sort_by(|a, b| a.refined.im.total_cmp(&b.refined.im).then(a.nu.cmp(&b.nu)));
    Ok(Enumeration { records, skipped })
}

fn window_mean(gaps: &[Gap], centre: i64) -> Option<f64> {
    let mut near: Vec<&Gap> = gaps.iter().collect();
    near.sort_by_key(|g| ((g.nu.abs() - centre).abs(), g.nu));
    if near.len() < 5 || (near[4].nu.abs() - centre).abs() > 5 {
        return None;
    }
    Some(near[..5].iter().map(|g| g.deviation).sum::<f64>() / 5.0)
}

/// Consecutive gaps `|z_{nu+1} - z_nu|` and their distance from `2 pi`.
pub fn spacing_report(records: &[ZeroRecord]) -> Result<SpacingReport> {
    let mut sorted: Vec<&ZeroRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.nu);
    let mut gaps = Vec::with_capacity(sorted.len().saturating_sub(1));
    for pair in sorted.windows(2) {
        if pair[1].nu != pair[0].nu + 1 {
            return Err(Error::NonConsecutive { after: pair[0].nu });
        }
        let gap = (pair[1].refined - pair[0].refined).norm();
        gaps.push(Gap { nu: pair[0].nu, gap, deviation: (gap - TAU).abs() });
    }
    let max_deviation_from_10 = gaps
        .iter()
        .filter(|g| g.nu.abs() >= 10)
        .map(|g| g.deviation)
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
    let decay_ratio = match (window_mean(&gaps, 100), window_mean(&gaps, 10)) {
        (Some(far), Some(near)) if near > 0.0 => Some(far / near),
        _ => None,
    };
    Ok(SpacingReport { gaps, max_deviation_from_10, decay_ratio })
}

/// All zeros with `|z| <= radius`, isolated on the enclosing square, refined by
/// Newton, and checked against an independent disk count.
pub fn small_zeros(q: &Quasipolynomial, radius: f64) -> Result<Vec<Complex64>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidQuery(format!("radius must be positive, got {radius}")));
    }
    let square = Rect::new(-radius, radius, -radius, radius)?;
    let eps = (radius * 1e-3).max(1e-9);
    let boxes = isolate_zeros(q, &square, eps)?;
    let mut zeros = Vec::with_capacity(boxes.len());
    for b in &boxes {
        let r = newton_refine(q, b.center(), NEWTON_MAX_ITER, NEWTON_TOL)?;
        if r.zero.norm() <= radius {
            zeros.push(r.zero);
        }
    }
    zeros.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    let certified = count_zeros_disk(q, Complex64::new(0.0, 0.0), radius, 40)?.count;
    if certified != zeros.len() as i64 {
        return Err(Error::CountMismatch { isolated: zeros.len(), certified });
    }
    Ok(zeros)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::Family;
    use crate::oracle::count_zeros_rect;

    fn q(k: u32, re: f64, im: f64) -> Quasipolynomial {
        Quasipolynomial::new(k, Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn seed_for_first_index() {
        let p = q(1, 1.0, 0.0);
        let g = asymptotic_guess(&p, 1).unwrap();
        assert!((g.re - 1.837_877_066).abs() < 1e-8);
        assert!((g.im - 10.995_574_287).abs() < 1e-8);
        let g = asymptotic_guess(&p, -1).unwrap();
        assert!((g.im + 10.995_574_287).abs() < 1e-8);
        assert_eq!(asymptotic_guess(&p, 0), Err(Error::InvalidIndex { nu: 0 }));
    }

    #[test]
    fn seed_real_part_identity() {
        for p in [q(1, 1.0, 0.0), q(3, 0.5, 0.5), q(2, 0.0, 3.0)] {
            for nu in [-17, -1, 1, 4, 250] {
                let g = asymptotic_guess(&p, nu).unwrap();
                let expected = p.ln_abs_a() + p.kf() * (TAU * (nu as f64).abs()).ln();
                assert_eq!(g.re, expected);
            }
        }
    }

    #[test]
    fn newton_from_first_seed() {
        let p = q(1, 1.0, 0.0);
        let g = asymptotic_guess(&p, 1).unwrap();
        let r = newton_refine(&p, g, NEWTON_MAX_ITER, NEWTON_TOL).unwrap();
        assert!(r.iterations <= 10);
        assert!(r.residual < 1e-12);
        let count = count_zeros_rect(&p, &Rect::around(r.zero, 2.0).unwrap(), 40).unwrap();
        assert_eq!(count.count, 1);
        let mirror = newton_refine(&p, asymptotic_guess(&p, -1).unwrap(), 50, 1e-12).unwrap();
        assert!((mirror.zero - r.zero.conj()).norm() < 1e-10);
    }

    #[test]
    fn conjugate_symmetry_for_real_coefficients() {
        for p in [q(1, 1.0, 0.0), q(2, -2.0, 0.0), q(3, 0.25, 0.0)] {
            let up = enumerate_zeros(&p, 5, 30).unwrap().records;
            let down = enumerate_zeros(&p, -30, -5).unwrap().records;
            for r in &up {
                let m = down.iter().find(|d| d.nu == -r.nu).unwrap();
                assert!((m.refined - r.refined.conj()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn newton_finds_omega_root() {
        let p = q(1, 1.0, 0.0);
        let r = newton_refine(&p, Complex64::new(-0.5, 0.0), 50, 1e-12).unwrap();
        assert!((r.zero.re + 0.567_143_290_4).abs() < 1e-9);
        let again = newton_refine(&p, r.zero, 50, 1e-12).unwrap();
        assert_eq!(again.iterations, 0);
        assert_eq!(again.zero, r.zero);
        assert_eq!(again.residual, r.residual);
    }

    #[test]
    fn newton_reports_divergence() {
        let p = q(1, 1.0, 0.0);
        let err = newton_refine(&p, Complex64::new(0.0, 0.0), 1, 1e-12);
        assert!(matches!(err, Err(Error::NotConverged { .. })));
        // f'(z) = exp(z) + 1 vanishes at i pi.
        let err = newton_refine(&p, Complex64::new(0.0, PI), 50, 1e-12);
        assert!(matches!(err, Err(Error::DerivativeVanished(_)) | Err(Error::Diverged { .. })));
    }

    #[test]
    fn fixed_point_lands_on_zero_curve() {
        let p = q(1, 1.0, 0.0);
        let z = fixedpoint_refine(&p, 10, 100, 1e-13).unwrap();
        assert!(p.sigma(Family::S1, z).unwrap().abs() < 1e-9);
        assert!(fixedpoint_refine(&p, 2, 100, 1e-13).is_err());
    }

    #[test]
    fn refiners_agree() {
        let p = q(2, 0.0, 3.0);
        let fixed = fixedpoint_refine(&p, 20, 100, 1e-13).unwrap();
        let newton = newton_refine(&p, asymptotic_guess(&p, 20).unwrap(), 50, 1e-12).unwrap();
        assert!((fixed - newton.zero).norm() < 1e-9);
    }

    #[test]
    fn displayed_sign_misses_the_curve() {
        let p = q(1, 1.0, 0.0);
        for nu in [10, 40] {
            let wrong = displayed_sign_guess(&p, nu).unwrap();
            let off = (p.sigma(Family::S1, wrong).unwrap() - p.ln_abs_a()).abs();
            assert!(off > 1.0, "nu = {nu}: {off}");
            let right = fixedpoint_refine(&p, nu, 100, 1e-13).unwrap();
            assert!((p.sigma(Family::S1, right).unwrap() - p.ln_abs_a()).abs() < 1e-8);
        }
    }

    #[test]
    fn enumerate_first_forty() {
        let p = q(1, 1.0, 0.0);
        let e = enumerate_zeros(&p, 1, 40).unwrap();
        assert_eq!(e.skipped, vec![1, 2, 3, 4]);
        assert_eq!(e.records.len(), 36);
        for r in &e.records {
            assert!(r.residual < 1e-10);
        }
        assert!(e.records.windows(2).all(|w| w[0].refined.im < w[1].refined.im));
    }

    #[test]
    fn enumerate_on_curve_for_cubic() {
        let p = q(3, 0.5, 0.5);
        let e = enumerate_zeros(&p, 5, 25).unwrap();
        assert_eq!(e.records.len(), 21);
        for r in &e.records {
            assert!((p.sigma(Family::S1, r.refined).unwrap() - p.ln_abs_a()).abs() < 1e-8);
        }
        // The seed error is about k |xi| / (2 pi |nu|), close to 1 at nu = 5
        // for k = 3; it is well inside 1 once nu is moderately large.
        for r in e.records.iter().filter(|r| r.nu >= 10) {
            assert!((r.refined - r.guess).norm() < 1.0);
        }
    }

    #[test]
    fn enumerate_empty_after_filter() {
        let p = q(1, 1.0, 0.0);
        let e = enumerate_zeros(&p, 0, 0).unwrap();
        assert!(e.records.is_empty());
        assert_eq!(e.skipped, vec![0]);
        assert!(enumerate_zeros(&p, 3, 2).is_err());
    }

    #[test]
    fn spacing_near_two_pi() {
        let p = q(1, 1.0, 0.0);
        let e = enumerate_zeros(&p, 10, 12).unwrap();
        let s = spacing_report(&e.records).unwrap();
        assert_eq!(s.gaps.len(), 2);
        for g in &s.gaps {
            assert!(g.deviation < 0.2);
        }
        let single = spacing_report(&e.records[..1]).unwrap();
        assert!(single.gaps.is_empty());
        let holed = [e.records[0], e.records[2]];
        assert_eq!(spacing_report(&holed), Err(Error::NonConsecutive { after: 10 }));
    }

    #[test]
    fn spacing_deviation_decays() {
        let p = q(1, 1.0, 0.0);
        let e = enumerate_zeros(&p, 5, 105).unwrap();
        let s = spacing_report(&e.records).unwrap();
        let ratio = s.decay_ratio.unwrap();
        assert!(ratio < 1.0, "{ratio}");
    }

    #[test]
    fn small_zero_examples() {
        let p = q(1, 1.0, 0.0);
        let z = small_zeros(&p, 2.0).unwrap();
        assert_eq!(z.len(), 1);
        assert!((z[0].re + 0.567_143_290_4).abs() < 1e-9);

        let p = q(1, std::f64::consts::E, 0.0);
        let z = small_zeros(&p, 0.1).unwrap();
        let n = count_zeros_disk(&p, Complex64::new(0.0, 0.0), 0.1, 40).unwrap().count;
        assert_eq!(z.len() as i64, n);

        let p = q(2, 1.0, 0.0);
        let z = small_zeros(&p, 0.5).unwrap();
        let n = count_zeros_disk(&p, Complex64::new(0.0, 0.0), 0.5, 40).unwrap().count;
        assert_eq!(z.len() as i64, n);
    }
}
