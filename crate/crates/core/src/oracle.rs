//! Argument-principle zero counting on rectangles and disks, and quadtree
//! isolation built on top of it.
//!
//! The phase of `f` is read off the scaled form (`f / exp(log_scale)` has the
//! same argument as `f`), so contours may sit at any distance from the origin.
//! Each boundary segment is bisected until the phase step across it and across
//! both of its halves is below `pi/2` and the halves add up to the whole; the
//! winding number is then the wrapped phase sum divided by `2 pi`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{ensure_finite, Quasipolynomial};

/// Relative `|f|` below which a boundary sample counts as a zero.
pub const BOUNDARY_ZERO: f64 = 1e-12;

/// Largest boundary step (in `z`) before adaptive refinement begins.
const BASE_STEP: f64 = 0.25;

/// Deterministic offsets, in units of `1e-4` of the box size, tried when a
/// contour passes through a zero.
const JITTER: [f64; 3] = [1.0, -1.7, 2.3];

const MAX_QUADTREE_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rect {
    pub fn new(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Result<Self> {
        let finite = [re_lo, re_hi, im_lo, im_hi].iter().all(|v| v.is_finite());
        if !finite || re_lo >= re_hi || im_lo >= im_hi {
            return Err(Error::InvalidQuery(format!(
                "rectangle [{re_lo}, {re_hi}] x [{im_lo}, {im_hi}] is empty or not finite"
            )));
        }
        Ok(Self { re_lo, re_hi, im_lo, im_hi })
    }

    /// Axis-aligned square of half-width `half` centred at `center`.
    pub fn around(center: Complex64, half: f64) -> Result<Self> {
        Self::new(center.re - half, center.re + half, center.im - half, center.im + half)
    }

    pub fn width(&self) -> f64 {
        self.re_hi - self.re_lo
    }

    pub fn height(&self) -> f64 {
        self.im_hi - self.im_lo
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_lo && z.re <= self.re_hi && z.im >= self.im_lo && z.im <= self.im_hi
    }

    /// Corners, counterclockwise from the lower left.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_lo, self.im_lo),
            Complex64::new(self.re_hi, self.im_lo),
            Complex64::new(self.re_hi, self.im_hi),
            Complex64::new(self.re_lo, self.im_hi),
        ]
    }

    /// Splits at `(re_cut, im_cut)` into lower-left, lower-right, upper-right, upper-left.
    pub fn quarters_at(&self, re_cut: f64, im_cut: f64) -> [Rect; 4] {
        [
            Rect { re_lo: self.re_lo, re_hi: re_cut, im_lo: self.im_lo, im_hi: im_cut },
            Rect { re_lo: re_cut, re_hi: self.re_hi, im_lo: self.im_lo, im_hi: im_cut },
            Rect { re_lo: re_cut, re_hi: self.re_hi, im_lo: im_cut, im_hi: self.im_hi },
            Rect { re_lo: self.re_lo, re_hi: re_cut, im_lo: im_cut, im_hi: self.im_hi },
        ]
    }

    fn grown(&self, by: f64) -> Rect {
        let dx = by * self.width();
        let dy = by * self.height();
        Rect { re_lo: self.re_lo - dx, re_hi: self.re_hi + dx, im_lo: self.im_lo - dy, im_hi: self.im_hi + dy }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Contour {
    Rect(Rect),
    Disk { center: Complex64, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourCount {
    pub count: i64,
    pub contour: Contour,
    /// Boundary segments accepted after refinement.
    pub edge_segments: usize,
    /// Smallest relative `|f|` sampled on the contour.
    pub min_boundary_mag: f64,
}

struct Walk<'a> {
    q: &'a Quasipolynomial,
    max_depth: usize,
    segments: usize,
    min_mag: f64,
}

fn wrap(angle: f64) -> f64 {
    let mut a = angle % TAU;
    if a > PI {
        a -= TAU;
    } else if a <= -PI {
        a += TAU;
    }
    a
}

impl Walk<'_> {
    fn phase(&mut self, z: Complex64) -> Result<f64> {
        let value = self.q.scaled(z)?.value;
        let mag = value.norm();
        self.min_mag = self.min_mag.min(mag);
        if mag < BOUNDARY_ZERO {
            return Err(Error::BoundaryZero { at: z, magnitude: mag });
        }
        Ok(value.arg())
    }

    /// Phase change of `f` along `path` for `t` in `[0, 1]`.
    fn path<P: Fn(f64) -> Complex64>(&mut self, path: &P, length: f64) -> Result<f64> {
        let pieces = ((length / BASE_STEP).ceil() as usize).max(8);
        let mut total = 0.0;
        let mut t0 = 0.0;
        let mut p0 = self.phase(path(0.0))?;
        for i in 1..=pieces {
            let t1 = i as f64 / pieces as f64;
            let p1 = self.phase(path(t1))?;
            total += self.segment(path, t0, p0, t1, p1, 0)?;
            t0 = t1;
            p0 = p1;
        }
        Ok(total)
    }

    fn segment<P: Fn(f64) -> Complex64>(
        &mut self,
        path: &P,
        t0: f64,
        p0: f64,
        t1: f64,
        p1: f64,
        depth: usize,
    ) -> Result<f64> {
        let tm = 0.5 * (t0 + t1);
        let pm = self.phase(path(tm))?;
        let whole = wrap(p1 - p0);
        let left = wrap(pm - p0);
        let right = wrap(p1 - pm);
        if whole.abs() < FRAC_PI_2
            && left.abs() < FRAC_PI_2
            && right.abs() < FRAC_PI_2
            && (left + right - whole).abs() < 1e-9
        {
            self.segments += 1;
            return Ok(left + right);
        }
        if depth >= self.max_depth {
            return Err(Error::DepthExceeded { max_depth: self.max_depth });
        }
        let a = self.segment(path, t0, p0, tm, pm, depth + 1)?;
        let b = self.segment(path, tm, pm, t1, p1, depth + 1)?;
        Ok(a + b)
    }

    fn finish(self, total: f64, contour: Contour) -> Result<ContourCount> {
        let turns = total / TAU;
        let count = turns.round();
        if (turns - count).abs() > 1e-6 {
            return Err(Error::NonIntegerWinding { turns });
        }
        Ok(ContourCount { count: count as i64, contour, edge_segments: self.segments, min_boundary_mag: self.min_mag })
    }
}

fn check_depth(max_depth: usize) -> Result<()> {
    if max_depth < 8 {
        return Err(Error::InvalidQuery(format!("max_depth must be at least 8, got {max_depth}")));
    }
    Ok(())
}

/// Number of zeros inside `rect`, from the winding of `f` along its boundary.
pub fn count_zeros_rect(q: &Quasipolynomial, rect: &Rect, max_depth: usize) -> Result<ContourCount> {
    check_depth(max_depth)?;
    let rect = Rect::new(rect.re_lo, rect.re_hi, rect.im_lo, rect.im_hi)?;
    let mut walk = Walk { q, max_depth, segments: 0, min_mag: f64::INFINITY };
    let corners = rect.corners();
    let mut total = 0.0;
    for i in 0..4 {
        let from = corners[i];
        let to = corners[(i + 1) % 4];
        let edge = move |t: f64| {
            if t >= 1.0 {
                to
            } else {
                from + (to - from) * t
            }
        };
        total += walk.path(&edge, (to - from).norm())?;
    }
    walk.finish(total, Contour::Rect(rect))
}

/// Number of zeros inside the open disk `|z - center| < radius`.
pub fn count_zeros_disk(q: &Quasipolynomial, center: Complex64, radius: f64, max_depth: usize) -> Result<ContourCount> {
    check_depth(max_depth)?;
    ensure_finite(center)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidQuery(format!("radius must be positive, got {radius}")));
    }
    let mut walk = Walk { q, max_depth, segments: 0, min_mag: f64::INFINITY };
    let circle = move |t: f64| {
        if t >= 1.0 {
            center + radius
        } else {
            center + Complex64::from_polar(radius, TAU * t)
        }
    };
    let total = walk.path(&circle, TAU * radius)?;
    walk.finish(total, Contour::Disk { center, radius })
}

/// Counts `rect`, retrying on slightly enlarged copies if the boundary hits a zero.
/// Returns the rectangle actually certified along with its count.
pub fn count_zeros_rect_jittered(q: &Quasipolynomial, rect: &Rect, max_depth: usize) -> Result<(Rect, ContourCount)> {
    let mut last = match count_zeros_rect(q, rect, max_depth) {
        Ok(c) => return Ok((*rect, c)),
        Err(e @ Error::BoundaryZero { .. }) => e,
        Err(e) => return Err(e),
    };
    for offset in JITTER {
        let moved = rect.grown(offset * 1e-4);
        match count_zeros_rect(q, &moved, max_depth) {
            Ok(c) => return Ok((moved, c)),
            Err(e @ Error::BoundaryZero { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

const ISOLATION_DEPTH: usize = 48;

/// Splits `rect` into four children with counts, jittering the cut point if a
/// cut line runs through a zero.
fn split(q: &Quasipolynomial, rect: &Rect, parent: i64) -> Result<Vec<(Rect, i64)>> {
    let center = rect.center();
    let mut last = None;
    for offset in std::iter::once(0.0).chain(JITTER) {
        let re_cut = center.re + offset * 1e-4 * rect.width();
        let im_cut = center.im + offset * 1e-4 * rect.height();
        let mut children = Vec::with_capacity(4);
        let mut failed = None;
        for child in rect.quarters_at(re_cut, im_cut) {
            match count_zeros_rect(q, &child, ISOLATION_DEPTH) {
                Ok(c) => children.push((child, c.count)),
                Err(e @ Error::BoundaryZero { .. }) => {
                    failed = Some(e);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        match failed {
            None => {
                let total: i64 = children.iter().map(|(_, n)| n).sum();
                if total != parent {
                    return Err(Error::CountMismatch { isolated: total.max(0) as usize, certified: parent });
                }
                return Ok(children);
            }
            Some(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Quadtree isolation: boxes of diameter at most `eps`, each holding exactly one zero.
///
/// The root rectangle may be enlarged by a relative `1e-4` jitter if its
/// boundary passes through a zero. Output is ordered by a depth-first walk
/// (lower-left, lower-right, upper-right, upper-left).
pub fn isolate_zeros(q: &Quasipolynomial, rect: &Rect, eps: f64) -> Result<Vec<Rect>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidQuery(format!("eps must be positive, got {eps}")));
    }
    let (root, root_count) = count_zeros_rect_jittered(q, rect, ISOLATION_DEPTH)?;
    let mut out = Vec::new();
    let mut stack = vec![(root, root_count.count, 0_usize)];
    while let Some((r, n, depth)) = stack.pop() {
        if n == 0 {
            continue;
        }
        if n == 1 && r.diameter() <= eps {
            out.push(r);
            continue;
        }
        if depth >= MAX_QUADTREE_DEPTH {
            return Err(Error::DepthExceeded { max_depth: MAX_QUADTREE_DEPTH });
        }
        let children = split(q, &r, n)?;
        for (child, m) in children.into_iter().rev() {
            stack.push((child, m, depth + 1));
        }
    }
    Ok(out)
}
