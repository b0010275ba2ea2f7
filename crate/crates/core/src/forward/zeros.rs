//! Locating the zeros of `det J(rho)` in the closed upper half-plane.
//!
//! `det J` is sampled on a polar grid, local minima of its modulus are refined by
//! a secant iteration on the analytic function `det J`, and converged points with
//! `|det J| < 1e-6` are kept.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::linalg::c;
use crate::spectral::SpectralPoint;

use super::{jost_matrix, Problem};

/// Smallest circle radius (in `lambda`) suggested when no zeros are found.
pub const DEFAULT_MIN_R0: f64 = 1.0;

const ZERO_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ZeroScan {
    /// Approximate zeros `rho_0`; `lambda_0 = rho_0^2` belongs to the singular set.
    pub zeros: Vec<SpectralPoint>,
    /// Suggested radius of the circle around the singular set in the `lambda` plane.
    pub r0: f64,
}

fn det_j(problem: &Problem, rho: Complex64) -> Option<Complex64> {
    let pt = SpectralPoint::new(rho).ok()?;
    let j = jost_matrix(problem, pt).ok()?;
    Some(j.determinant())
}

fn refine(problem: &Problem, start: Complex64, scale: f64) -> Option<Complex64> {
    let mut x0 = start;
    let mut x1 = start + c(0.25, 0.25) * scale;
    let clamp = |z: Complex64| if z.im < 0.0 { c(z.re, 0.0) } else { z };
    x1 = clamp(x1);
    let mut f0 = det_j(problem, x0)?;
    let mut f1 = det_j(problem, x1)?;
    for _ in 0..60 {
        if f1 == f0 {
            break;
        }
        let x2 = clamp(x1 - f1 * (x1 - x0) / (f1 - f0));
        if x2.norm() < 1e-10 {
            return None;
        }
        let f2 = det_j(problem, x2)?;
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        if (x1 - x0).norm() < 1e-13 * x1.norm().max(1.0) {
            break;
        }
    }
    (f1.norm() < ZERO_TOL).then_some(x1)
}

/// Scans `0 < |rho| <= radius`, `0 <= arg rho <= pi` for zeros of `det J`.
pub fn scan_jost_zeros(problem: &Problem, radius: f64, grid_density: usize) -> ZeroScan {
    let nr = grid_density.max(4);
    let nt = 2 * nr;
    let radii: Vec<f64> = (1..=nr).map(|i| radius * i as f64 / nr as f64).collect();
    let angles: Vec<f64> = (0..=nt).map(|k| std::f64::consts::PI * k as f64 / nt as f64).collect();

    let samples: Vec<f64> = radii
        .par_iter()
        .flat_map_iter(|&r| {
            angles.iter().map(move |&t| {
                let rho = Complex64::from_polar(r, t);
                let rho = if rho.im < 0.0 { c(rho.re, 0.0) } else { rho };
                det_j(problem, rho).map(|d| d.norm()).unwrap_or(0.0)
            })
        })
        .collect();
    let at = |i: usize, k: usize| samples[i * (nt + 1) + k];

    let mut candidates = Vec::new();
    for i in 0..nr {
        for k in 0..=nt {
            let v = at(i, k);
            let mut is_min = true;
            for di in [-1i64, 0, 1] {
                for dk in [-1i64, 0, 1] {
                    if di == 0 && dk == 0 {
                        continue;
                    }
                    let ii = i as i64 + di;
                    let kk = k as i64 + dk;
                    if ii < 0 || ii >= nr as i64 || kk < 0 || kk > nt as i64 {
                        continue;
                    }
                    if at(ii as usize, kk as usize) < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                candidates.push(Complex64::from_polar(radii[i], angles[k]));
            }
        }
    }

    let step = radius / nr as f64;
    let refined: Vec<Complex64> = candidates
        .par_iter()
        .filter_map(|&z| refine(problem, if z.im < 0.0 { c(z.re, 0.0) } else { z }, step))
        .filter(|z| z.norm() <= radius * (1.0 + 1e-9) + step)
        .collect();

    let mut zeros: Vec<Complex64> = Vec::new();
    for z in refined {
        if !zeros.iter().any(|w| (w - z).norm() < 1e-6 * z.norm().max(1.0)) {
            zeros.push(z);
        }
    }
    zeros.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.re.total_cmp(&b.re)));

    let max_lambda = zeros.iter().map(|z| z.norm_sqr()).fold(DEFAULT_MIN_R0, f64::max);
    let zeros = zeros.into_iter().filter_map(|z| SpectralPoint::new(z).ok()).collect();
    ZeroScan { zeros, r0: 1.5 * max_lambda }
}
