//! Point-set families of the complex plane built on the band coordinate
//! `sigma_S(z) = Re z + (-1)^S k ln|z|`.
//!
//! Outside the inner disk `|z| <= R` the plane is split into three pieces by
//! the level `h`: the band `|sigma_S| <= h`, the left set `sigma_S < -h` and
//! the right set `sigma_S > h`. The labels returned by [`classify`] form a
//! partition; the inner disk and the band are closed, the other two are open.

use std::f64::consts::E;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{ensure_finite, Family, Quasipolynomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    /// `sigma_S < -h`, `|z| > R`.
    T1,
    /// `|sigma_S| <= h`, `|z| > R`.
    Band,
    /// `sigma_S > h`, `|z| > R`.
    T2,
    /// `|z| <= R`.
    InnerDisk,
}

/// Half-plane selector. `Lower` is `Im z < 0` (j = 1), `Upper` is `Im z >= 0` (j = 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HalfPlane {
    Lower,
    Upper,
}

impl HalfPlane {
    pub fn of(z: Complex64) -> Self {
        if z.im < 0.0 {
            HalfPlane::Lower
        } else {
            HalfPlane::Upper
        }
    }

    pub fn from_index(j: u8) -> Result<Self> {
        match j {
            1 => Ok(HalfPlane::Lower),
            2 => Ok(HalfPlane::Upper),
            other => Err(Error::InvalidQuery(format!("half-plane index must be 1 or 2, got {other}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            HalfPlane::Lower => 1,
            HalfPlane::Upper => 2,
        }
    }

    pub fn contains_im(self, y: f64) -> bool {
        match self {
            HalfPlane::Lower => y < 0.0,
            HalfPlane::Upper => y >= 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionLabel {
    pub kind: RegionKind,
    pub half: HalfPlane,
}

/// Parameters of one region family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionQuery {
    pub family: Family,
    pub half: Option<HalfPlane>,
    pub h: f64,
    pub radius: f64,
    pub delta: Option<f64>,
}

impl RegionQuery {
    pub fn new(family: Family, h: f64, radius: f64) -> Result<Self> {
        let query = Self { family, half: None, h, radius, delta: None };
        query.validate()?;
        Ok(query)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h >= 0.0) {
            return Err(Error::InvalidQuery(format!("h must be finite and >= 0, got {}", self.h)));
        }
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            return Err(Error::InvalidQuery(format!("R must be finite and >= 0, got {}", self.radius)));
        }
        if let Some(delta) = self.delta {
            check_sector_angle(delta)?;
        }
        Ok(())
    }

    pub fn classify(&self, q: &Quasipolynomial, z: Complex64) -> Result<RegionLabel> {
        classify(q, self.family, self.h, self.radius, z)
    }
}

fn check_sector_angle(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < std::f64::consts::FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::InvalidQuery(format!("sector half-angle must lie in (0, pi/2), got {delta}")))
    }
}

pub fn classify(q: &Quasipolynomial, family: Family, h: f64, radius: f64, z: Complex64) -> Result<RegionLabel> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidQuery(format!("h must be positive, got {h}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidQuery(format!("R must be positive, got {radius}")));
    }
    ensure_finite(z)?;
    let half = HalfPlane::of(z);
    let kind = if z.norm() <= radius {
        RegionKind::InnerDisk
    } else {
        let s = q.sigma(family, z)?;
        if s.abs() <= h {
            RegionKind::Band
        } else if s < -h {
            RegionKind::T1
        } else {
            RegionKind::T2
        }
    };
    Ok(RegionLabel { kind, half })
}

/// `ln(2 / |a|)`: above this level `|f| >= |a||z|^k / 2` on the left set.
pub fn min_h_t1(q: &Quasipolynomial) -> f64 {
    (2.0 * q.abs_b()).ln()
}

/// `ln(2 |a|)`: above this level `|f| >= |e^z| / 2` on the right set.
pub fn min_h_t2(q: &Quasipolynomial) -> f64 {
    (2.0 * q.abs_a()).ln()
}

/// `||arg z| - pi/2| < delta`, i.e. membership in the union of the two
/// sectors around the imaginary axis.
pub fn in_sectors(z: Complex64, delta: f64) -> bool {
    (z.arg().abs() - std::f64::consts::FRAC_PI_2).abs() < delta
}

/// Smallest `R >= e` with `(h + k ln r) / r <= sin(delta)` for every `r >= R`.
///
/// On `[e, inf)` the left side is decreasing, so the answer is either `e`
/// itself or the unique crossing, located by bisection. Every band point
/// beyond this radius has `|cos arg z| <= sin(delta)`.
/// The bound is the same for both families.
pub fn sector_radius(q: &Quasipolynomial, _family: Family, h: f64, delta: f64) -> Result<f64> {
    check_sector_angle(delta)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidQuery(format!("h must be positive, got {h}")));
    }
    let k = q.kf();
    let target = delta.sin();
    let excess = |r: f64| (h + k * r.ln()) / r - target;
    if excess(E) <= 0.0 {
        return Ok(E);
    }
    let mut lo = E;
    let mut hi = 2.0 * E;
    while excess(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `x + (-1)^S k ln sqrt(x^2 + y^2) - level` and its x-derivative.
fn level_equation(k: f64, sign: f64, level: f64, x: f64, y: f64) -> (f64, f64) {
    let r2 = x * x + y * y;
    let value = x + sign * 0.5 * k * r2.ln() - level;
    let slope = 1.0 + sign * k * x / r2;
    (value, slope)
}

/// Solves `sigma_S(x + iy) = level` for `x` inside `[-|y|-|level|-10, |y|+|level|+10]`.
///
/// Bisection keeps the bracket; Newton steps are taken whenever they stay
/// inside it. For `|y| > k/2` the equation is strictly monotone in `x` and the
/// root is unique.
pub fn solve_level(q: &Quasipolynomial, family: Family, level: f64, y: f64) -> Result<f64> {
    if !(y.is_finite() && level.is_finite()) {
        return Err(Error::NoSolution { y });
    }
    let k = q.kf();
    let sign = family.sign();
    let span = y.abs() + level.abs() + 10.0;
    let (mut lo, mut hi) = (-span, span);
    let (f_lo, _) = level_equation(k, sign, level, lo, y);
    let (f_hi, _) = level_equation(k, sign, level, hi, y);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::NoSolution { y });
    }
    let rising = f_hi > 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let (f, slope) = level_equation(k, sign, level, x, y);
        if !f.is_finite() {
            // Only possible at the origin; nudge off it.
            x = 0.5 * (x + hi);
            continue;
        }
        if f.abs() < 1e-12 {
            return Ok(x);
        }
        if (f > 0.0) == rising {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - f / slope;
        x = if slope != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    let (f, _) = level_equation(k, sign, level, x, y);
    if f.abs() < 1e-10 {
        Ok(x)
    } else {
        Err(Error::NoSolution { y })
    }
}

/// `n` points of the level curve `sigma_S = h` at equally spaced heights in
/// `[im_lo, im_hi]`, which must lie in the half-plane `half`.
pub fn gamma_polyline(
    q: &Quasipolynomial,
    family: Family,
    half: HalfPlane,
    h: f64,
    im_lo: f64,
    im_hi: f64,
    n: usize,
) -> Result<Vec<Complex64>> {
    if n < 2 {
        return Err(Error::InvalidQuery(format!("need at least 2 points, got {n}")));
    }
    if !(im_lo.is_finite() && im_hi.is_finite() && im_lo <= im_hi) {
        return Err(Error::InvalidQuery(format!("bad imaginary range [{im_lo}, {im_hi}]")));
    }
    if !(half.contains_im(im_lo) && half.contains_im(im_hi)) {
        return Err(Error::InvalidQuery(format!(
            "imaginary range [{im_lo}, {im_hi}] is not inside half-plane j = {}",
            half.index()
        )));
    }
    let step = (im_hi - im_lo) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let y = if i == n - 1 { im_hi } else { im_lo + step * i as f64 };
            solve_level(q, family, h, y).map(|x| Complex64::new(x, y))
        })
        .collect()
}
