//! Recovery of `A = I - lim M(lambda) / (-i rho)` from samples on the imaginary axis.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat};
use crate::spectral::SpectralPoint;

/// Eigenvalues of the extrapolated limit inside this band make the rank ambiguous.
pub const PROJECTOR_REJECT_BAND: (f64, f64) = (0.25, 0.75);

const MAX_EXTRAPOLATION_RESIDUAL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct ExtractedA {
    /// The projector nearest to the extrapolated limit.
    pub a: CMat,
    /// Extrapolated limit before projection.
    pub limit: CMat,
    /// Largest misfit of the quadratic model in `1/|rho|` at the sample points.
    pub residual: f64,
    /// `|limit - a|`.
    pub projection_distance: f64,
}

/// Fits `I - M / (-i rho) = L0 + L1 u + L2 u^2`, `u = 1/|rho|`, entrywise by least
/// squares, and rounds the eigenvalues of the Hermitian part of `L0` to `{0, 1}`.
pub fn extract_a(tail: &[(SpectralPoint, CMat)]) -> Result<ExtractedA> {
    if tail.len() < 3 {
        return Err(Error::invalid(format!("extract_A needs at least 3 tail samples, got {}", tail.len())));
    }
    let n = tail[0].1.nrows();
    let id = linalg::identity(n);
    let data: Vec<CMat> = tail.iter().map(|(pt, m)| &id + m / pt.i_rho()).collect();
    let u: Vec<f64> = tail.iter().map(|(pt, _)| 1.0 / pt.rho().norm()).collect();

    let k = tail.len();
    let design = DMatrix::from_fn(k, 3, |i, j| u[i].powi(j as i32));
    let svd = design.clone().svd(true, true);
    let mut coef = [linalg::zeros(n), linalg::zeros(n), linalg::zeros(n)];
    for r in 0..n {
        for s in 0..n {
            for part in 0..2 {
                let b = DVector::from_fn(k, |i, _| if part == 0 { data[i][(r, s)].re } else { data[i][(r, s)].im });
                let x = svd.solve(&b, 1e-14).map_err(|e| Error::DataQuality(e.to_string()))?;
                for (j, c) in coef.iter_mut().enumerate() {
                    if part == 0 {
                        c[(r, s)].re = x[j];
                    } else {
                        c[(r, s)].im = x[j];
                    }
                }
            }
        }
    }
    let residual = data
        .iter()
        .zip(&u)
        .map(|(d, &ui)| linalg::dist(d, &(&coef[0] + &coef[1] * cr(ui) + &coef[2] * cr(ui * ui))))
        .fold(0.0, f64::max);
    if !(residual <= MAX_EXTRAPOLATION_RESIDUAL) {
        return Err(Error::DataQuality(format!(
            "tail extrapolation residual {residual:.3e} exceeds {MAX_EXTRAPOLATION_RESIDUAL:.0e}"
        )));
    }

    let limit = coef[0].clone();
    let (eigs, vecs) = linalg::hermitian_eigen(&limit);
    let mut a = linalg::zeros(n);
    for (j, &e) in eigs.iter().enumerate() {
        if e >= PROJECTOR_REJECT_BAND.0 && e <= PROJECTOR_REJECT_BAND.1 {
            return Err(Error::DataQuality(format!(
                "extrapolated limit has eigenvalue {e:.3} between 0 and 1; the rank of A is ambiguous"
            )));
        }
        if e > 0.5 {
            let v = vecs.column(j);
            a += v * v.adjoint();
        }
    }
    let projection_distance = linalg::dist(&limit, &a);
    Ok(ExtractedA { a, limit, residual, projection_distance })
}
