//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers and returns either a JSON string or a
//! byte grid, so the same functions run natively under `cargo test`.

use quasizero::bounds::quadrangle;
use quasizero::regions::{classify, gamma_polyline, HalfPlane, RegionKind};
use quasizero::zeros::{enumerate_zeros, nu_min, small_zeros};
use quasizero::{Complex64, Family, Quasipolynomial};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest index range and grid the page is allowed to request.
const MAX_NU: i64 = 2000;
const MAX_CELLS: usize = 1 << 20;

fn quasi(k: u32, a_re: f64, a_im: f64) -> Result<Quasipolynomial, String> {
    Quasipolynomial::new(k, Complex64::new(a_re, a_im)).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ChainPoint {
    nu: i64,
    guess: [f64; 2],
    zero: [f64; 2],
    residual: f64,
}

#[derive(Serialize)]
struct Chain {
    nu_min: i64,
    chain: Vec<ChainPoint>,
    small: Vec<[f64; 2]>,
}

/// Refined zeros for `nu_min <= |nu| <= nu_max`. With `inner`, also every
/// zero strictly inside the first chain zero's circle, found by isolation.
#[wasm_bindgen]
pub fn zero_chain(k: u32, a_re: f64, a_im: f64, nu_max: u32, inner: bool) -> Result<String, String> {
    let q = quasi(k, a_re, a_im)?;
    let nu_max = i64::from(nu_max);
    if !(1..=MAX_NU).contains(&nu_max) {
        return Err(format!("nu_max must lie in 1..={MAX_NU}"));
    }
    let lo = nu_min(&q);
    let mut chain = Vec::new();
    if nu_max >= lo {
        for (a, b) in [(-nu_max, -lo), (lo, nu_max)] {
            let e = enumerate_zeros(&q, a, b).map_err(|e| e.to_string())?;
            chain.extend(e.records.into_iter().map(|r| ChainPoint {
                nu: r.nu,
                guess: [r.guess.re, r.guess.im],
                zero: [r.refined.re, r.refined.im],
                residual: r.residual,
            }));
        }
    }
    chain.sort_by(|a, b| a.zero[1].total_cmp(&b.zero[1]));
    let first = chain.iter().map(|p| p.zero[0].hypot(p.zero[1])).fold(f64::INFINITY, f64::min);
    let small = if inner && first.is_finite() {
        small_zeros(&q, first - 1.0).map_err(|e| e.to_string())?.into_iter().map(|z| [z.re, z.im]).collect()
    } else {
        Vec::new()
    };
    to_json(&Chain { nu_min: lo, chain, small })
}

/// Region code per pixel, row-major from the top-left corner
/// (`re_lo + i im_hi`): 0 inner disk, 1 band, 2 left set, 3 right set.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn region_grid(
    k: u32,
    a_re: f64,
    a_im: f64,
    family: u8,
    h: f64,
    radius: f64,
    re_lo: f64,
    re_hi: f64,
    im_lo: f64,
    im_hi: f64,
    width: usize,
    height: usize,
) -> Result<Vec<u8>, String> {
    let q = quasi(k, a_re, a_im)?;
    let family = Family::from_index(family).map_err(|e| e.to_string())?;
    if width == 0 || height == 0 || width.saturating_mul(height) > MAX_CELLS {
        return Err(format!("grid must have between 1 and {MAX_CELLS} cells"));
    }
    if !(re_lo < re_hi && im_lo < im_hi) {
        return Err("empty viewport".into());
    }
    let dx = (re_hi - re_lo) / width as f64;
    let dy = (im_hi - im_lo) / height as f64;
    let mut out = Vec::with_capacity(width * height);
    for row in 0..height {
        let y = im_hi - (row as f64 + 0.5) * dy;
        for col in 0..width {
            let z = Complex64::new(re_lo + (col as f64 + 0.5) * dx, y);
            let code = match classify(&q, family, h, radius, z).map_err(|e| e.to_string())?.kind {
                RegionKind::InnerDisk => 0,
                RegionKind::Band => 1,
                RegionKind::T1 => 2,
                RegionKind::T2 => 3,
            };
            out.push(code);
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct Curve {
    level: f64,
    half: u8,
    points: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct Cell {
    nu: i64,
    corners: Vec<[f64; 2]>,
    diag: f64,
}

#[derive(Serialize)]
struct Band {
    curves: Vec<Curve>,
    cells: Vec<Cell>,
}

/// The two edges `sigma_1 = +-h` of the band for `im_min <= |Im z| <= im_max`,
/// and the band cells of every index whose zero lies in that range.
#[wasm_bindgen]
pub fn band_geometry(
    k: u32,
    a_re: f64,
    a_im: f64,
    h: f64,
    im_min: f64,
    im_max: f64,
    n: usize,
) -> Result<String, String> {
    let q = quasi(k, a_re, a_im)?;
    if !(im_min > 0.0 && im_min < im_max && im_max.is_finite()) {
        return Err("need 0 < im_min < im_max".into());
    }
    let mut curves = Vec::new();
    for level in [-h, h] {
        for (half, lo, hi) in [(HalfPlane::Lower, -im_max, -im_min), (HalfPlane::Upper, im_min, im_max)] {
            let pts = gamma_polyline(&q, Family::S1, half, level, lo, hi, n).map_err(|e| e.to_string())?;
            curves.push(Curve { level, half: half.index(), points: pts.iter().map(|z| [z.re, z.im]).collect() });
        }
    }
    let mut cells = Vec::new();
    let nu_hi = ((im_max / std::f64::consts::TAU).ceil() as i64).min(MAX_NU);
    for nu in nu_min(&q)..=nu_hi {
        for signed in [-nu, nu] {
            // Cells can be degenerate for special coefficients; the page just skips them.
            let Ok(cell) = quadrangle(&q, signed, h) else { continue };
            let inside = cell.corners.iter().all(|c| (im_min..=im_max).contains(&c.im.abs()));
            if inside {
                cells.push(Cell {
                    nu: signed,
                    corners: cell.corners.iter().map(|c| [c.re, c.im]).collect(),
                    diag: cell.diag,
                });
            }
        }
    }
    to_json(&Band { curves, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn chain_is_sorted_and_converged() {
        let doc: Value = serde_json::from_str(&zero_chain(1, 1.0, 0.0, 20, true).unwrap()).unwrap();
        let chain = doc["chain"].as_array().unwrap();
        assert_eq!(chain.len(), 32);
        let ims: Vec<f64> = chain.iter().map(|p| p["zero"][1].as_f64().unwrap()).collect();
        assert!(ims.windows(2).all(|w| w[0] < w[1]));
        assert!(chain.iter().all(|p| p["residual"].as_f64().unwrap() < 1e-10));
        // The real zero and the five conjugate pairs below nu_min.
        assert_eq!(doc["small"].as_array().unwrap().len(), 11);
    }

    #[test]
    fn chain_rejects_bad_input() {
        assert!(zero_chain(0, 1.0, 0.0, 10, false).is_err());
        assert!(zero_chain(1, 0.0, 0.0, 10, false).is_err());
        assert!(zero_chain(1, 1.0, 0.0, 0, false).is_err());
        let doc: Value = serde_json::from_str(&zero_chain(3, 1.0, 0.0, 2, false).unwrap()).unwrap();
        assert!(doc["chain"].as_array().unwrap().is_empty());
    }

    #[test]
    fn grid_codes_match_classification() {
        let q = quasi(2, 0.5, 0.5).unwrap();
        let (w, hgt) = (40, 30);
        let grid = region_grid(2, 0.5, 0.5, 1, 1.5, 3.0, -20.0, 20.0, -60.0, 60.0, w, hgt).unwrap();
        assert_eq!(grid.len(), w * hgt);
        for (i, &code) in grid.iter().enumerate() {
            let (row, col) = (i / w, i % w);
            let z = Complex64::new(-20.0 + (col as f64 + 0.5), 60.0 - (row as f64 + 0.5) * 4.0);
            let kind = classify(&q, Family::S1, 1.5, 3.0, z).unwrap().kind;
            let expected = [RegionKind::InnerDisk, RegionKind::Band, RegionKind::T1, RegionKind::T2][code as usize];
            assert_eq!(kind, expected);
        }
        assert!(grid.contains(&0) && grid.contains(&1) && grid.contains(&2) && grid.contains(&3));
    }

    #[test]
    fn grid_rejects_bad_viewports() {
        assert!(region_grid(1, 1.0, 0.0, 1, 1.0, 1.0, 1.0, 0.0, -1.0, 1.0, 4, 4).is_err());
        assert!(region_grid(1, 1.0, 0.0, 3, 1.0, 1.0, 0.0, 1.0, -1.0, 1.0, 4, 4).is_err());
        assert!(region_grid(1, 1.0, 0.0, 1, 1.0, 1.0, 0.0, 1.0, -1.0, 1.0, 0, 4).is_err());
        assert!(region_grid(1, 1.0, 0.0, 1, -1.0, 1.0, 0.0, 1.0, -1.0, 1.0, 4, 4).is_err());
    }

    #[test]
    fn band_edges_and_cells() {
        let doc: Value = serde_json::from_str(&band_geometry(1, 1.0, 0.0, 2.0, 30.0, 150.0, 64).unwrap()).unwrap();
        let q = quasi(1, 1.0, 0.0).unwrap();
        let curves = doc["curves"].as_array().unwrap();
        assert_eq!(curves.len(), 4);
        for c in curves {
            let level = c["level"].as_f64().unwrap();
            for p in c["points"].as_array().unwrap() {
                let z = Complex64::new(p[0].as_f64().unwrap(), p[1].as_f64().unwrap());
                assert!((q.sigma(Family::S1, z).unwrap() - level).abs() < 1e-9);
            }
        }
        let cells = doc["cells"].as_array().unwrap();
        assert!(!cells.is_empty());
        assert!(cells.iter().any(|c| c["nu"].as_i64().unwrap() < 0));
        assert!(cells.iter().all(|c| c["corners"].as_array().unwrap().len() == 4));
    }
}
