//! Jost solutions `e(x, rho)` of `-Y'' + Q Y = rho^2 Y` and `e*(x, rho)` of the
//! right-multiplied equation, both normalised by `e ~ e^{i rho x} I` as `x -> inf`.
//!
//! The Volterra equation is solved in the scaled unknown `u = e^{-i rho x} e`:
//!
//! ```text
//! u(x)  = I    + int_x^X (e^{2 i rho (t-x)} - 1) / (2 i rho) Q(t) u(t) dt
//! u'(x) = i rho I - int_x^X (e^{2 i rho (t-x)} + 1) / 2     Q(t) u(t) dt
//! ```
//!
//! Both kernels are bounded on `Im rho >= 0`, so nothing overflows for large
//! `Im rho`. The sine kernel vanishes on the diagonal, which makes the Simpson
//! discretisation strictly triangular: marching from `X` down to `0` is its exact
//! fixed point.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, axpy, cr, simpson_weights, CMat};
use crate::spectral::{MatrixWave, PotentialGrid, SpectralPoint};

/// Which side the potential multiplies from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    /// `l Y = -Y'' + Q Y`
    Left,
    /// `l* Z = -Z'' + Z Q`
    Right,
}

#[inline]
pub(crate) fn apply_q(side: Side, q: &CMat, y: &CMat) -> CMat {
    match side {
        Side::Left => q * y,
        Side::Right => y * q,
    }
}

/// Index of the last non-zero potential sample, if any.
pub(crate) fn support_end(q: &PotentialGrid) -> Option<usize> {
    q.values().iter().rposition(|v| v.iter().any(|z| z.norm() != 0.0))
}

/// Scaled Jost data `(u, u')` on the grid.
pub(crate) fn scaled_jost(q: &PotentialGrid, pt: SpectralPoint, side: Side) -> Result<(Vec<CMat>, Vec<CMat>)> {
    let grid = q.grid();
    let len = grid.len();
    let h = grid.step();
    let n = q.dim();
    let rho = pt.rho();
    let two_i_rho = Complex64::new(0.0, 2.0) * rho;
    let id = linalg::identity(n);
    let i_rho_id = &id * pt.i_rho();

    let Some(last) = support_end(q) else {
        return Ok((vec![id; len], vec![i_rho_id; len]));
    };

    let sin_kernel: Vec<Complex64> = (0..len).map(|d| linalg::expm1(two_i_rho * (d as f64 * h)) / two_i_rho).collect();
    let cos_kernel: Vec<Complex64> = (0..len).map(|d| 0.5 * ((two_i_rho * (d as f64 * h)).exp() + 1.0)).collect();

    let mut u = vec![id.clone(); len];
    let mut qu: Vec<CMat> = vec![linalg::zeros(n); len];
    for j in (0..len).rev() {
        if j < last {
            let w = simpson_weights(len - 1 - j);
            let mut acc = id.clone();
            for m in (j + 1)..=last {
                axpy(&mut acc, cr(w[m - j] * h) * sin_kernel[m - j], &qu[m]);
            }
            u[j] = acc;
        }
        qu[j] = apply_q(side, q.at(j), &u[j]);
    }

    let mut du = vec![i_rho_id.clone(); len];
    for (j, slot) in du.iter_mut().enumerate().take(last + 1) {
        let w = simpson_weights(len - 1 - j);
        let mut acc = i_rho_id.clone();
        for m in j..=last {
            axpy(&mut acc, -cr(w[m - j] * h) * cos_kernel[m - j], &qu[m]);
        }
        *slot = acc;
    }

    if !u.iter().chain(du.iter()).all(linalg::is_finite) {
        return Err(Error::Convergence { residual: f64::NAN });
    }
    Ok((u, du))
}

fn unscale(q: &PotentialGrid, pt: SpectralPoint, u: Vec<CMat>, du: Vec<CMat>) -> MatrixWave {
    let grid = q.grid();
    let i_rho = pt.i_rho();
    let phases: Vec<Complex64> = grid.nodes().map(|x| (i_rho * x).exp()).collect();
    let values = u.into_iter().zip(&phases).map(|(v, p)| v * *p).collect();
    let derivs = du.into_iter().zip(&phases).map(|(v, p)| v * *p).collect();
    MatrixWave::new(grid, pt, values, derivs)
}

/// Jost solution `e(x, rho)` and `e'(x, rho)` on the potential grid.
pub fn solve_jost(q: &PotentialGrid, pt: SpectralPoint) -> Result<MatrixWave> {
    let (u, du) = scaled_jost(q, pt, Side::Left)?;
    Ok(unscale(q, pt, u, du))
}

/// Adjoint Jost solution `e*(x, rho)` of `-Z'' + Z Q = rho^2 Z`.
pub fn solve_jost_adjoint(q: &PotentialGrid, pt: SpectralPoint) -> Result<MatrixWave> {
    let (u, du) = scaled_jost(q, pt, Side::Right)?;
    Ok(unscale(q, pt, u, du))
}

/// `e(0, rho)` and `e'(0, rho)` only.
pub(crate) fn jost_at_origin(q: &PotentialGrid, pt: SpectralPoint, side: Side) -> Result<(CMat, CMat)> {
    let (mut u, mut du) = scaled_jost(q, pt, side)?;
    Ok((u.swap_remove(0), du.swap_remove(0)))
}
