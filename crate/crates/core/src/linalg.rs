//! Dense complex matrix helpers shared by every module.
//!
//! Matrices are small (n <= 8) and dense; everything is built on
//! `nalgebra::DMatrix<Complex64>`. The matrix norm used in all contracts is the
//! max row-sum norm.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// Builds an `n x n` matrix from a row-major slice.
pub fn from_rows(n: usize, data: &[Complex64]) -> CMat {
    assert_eq!(data.len(), n * n, "expected {} entries", n * n);
    CMat::from_row_slice(n, n, data)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> CMat {
    let n = values.len();
    let mut m = zeros(n);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = cr(*v);
    }
    m
}

/// Max row-sum norm `max_l sum_s |m_ls|`.
pub fn norm(m: &CMat) -> f64 {
    m.row_iter().map(|row| row.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn dist(a: &CMat, b: &CMat) -> f64 {
    norm(&(a - b))
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn inverse(m: &CMat) -> Option<CMat> {
    m.clone().lu().try_inverse()
}

/// 2-norm condition number from singular values; infinite for singular input.
pub fn cond(m: &CMat) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `acc += a * x`, in place.
#[inline]
pub fn axpy(acc: &mut CMat, a: Complex64, x: &CMat) {
    for (s, v) in acc.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *s += a * v;
    }
}

pub fn check_square(m: &CMat, n: usize, what: &str) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::invalid(format!("{what} must be {n}x{n}, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix: real eigenvalues and orthonormal
/// eigenvectors as columns.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let herm = (m + m.adjoint()) * cr(0.5);
    let eig = nalgebra::SymmetricEigen::new(herm);
    (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors)
}

/// `e^z - 1` without cancellation for small `|z|`.
pub fn expm1(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    let ea = a.exp();
    let half = (0.5 * b).sin();
    c(a.exp_m1() * b.cos() - 2.0 * half * half, ea * b.sin())
}

/// `sin(a x) / a`, continuous through `a = 0` where it equals `x`.
pub fn sin_over(a: Complex64, x: f64) -> Complex64 {
    let z = a * x;
    if z.norm() < 1e-4 {
        let z2 = z * z;
        cr(x) * (cr(1.0) - z2 / 6.0 + z2 * z2 / 120.0)
    } else {
        z.sin() / a
    }
}

/// Composite Simpson weights (in units of the step) for `panels` uniform panels.
///
/// An odd panel count finishes with the 3/8 rule on the last three panels; a
/// single panel degrades to the trapezoid rule.
pub fn simpson_weights(panels: usize) -> Vec<f64> {
    let mut w = vec![0.0; panels + 1];
    match panels {
        0 => {}
        1 => {
            w[0] = 0.5;
            w[1] = 0.5;
        }
        _ => {
            let simpson_panels = if panels.is_multiple_of(2) { panels } else { panels - 3 };
            for k in (0..simpson_panels).step_by(2) {
                w[k] += 1.0 / 3.0;
                w[k + 1] += 4.0 / 3.0;
                w[k + 2] += 1.0 / 3.0;
            }
            if panels % 2 == 1 {
                let s = simpson_panels;
                w[s] += 3.0 / 8.0;
                w[s + 1] += 9.0 / 8.0;
                w[s + 2] += 9.0 / 8.0;
                w[s + 3] += 3.0 / 8.0;
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_cubics_exactly() {
        for panels in 2..12 {
            let h = 1.0 / panels as f64;
            let w = simpson_weights(panels);
            let s: f64 = w
                .iter()
                .enumerate()
                .map(|(i, wi)| {
                    let x = i as f64 * h;
                    wi * h * (x * x * x - 2.0 * x + 1.0)
                })
                .sum();
            assert!((s - 0.25).abs() < 1e-13, "panels={panels}: {s}");
        }
    }

    #[test]
    fn expm1_small_and_large() {
        let z = c(1e-9, -2e-9);
        let got = expm1(z);
        assert!((got - z).norm() < 1e-17);
        let z = c(0.7, 2.1);
        assert!((expm1(z) - (z.exp() - 1.0)).norm() < 1e-14);
    }

    #[test]
    fn row_sum_norm() {
        let m = from_rows(2, &[c(1.0, 0.0), c(0.0, -2.0), c(3.0, 4.0), cr(0.0)]);
        assert!((norm(&m) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn sin_over_limit() {
        assert!((sin_over(cr(0.0), 1.5) - cr(1.5)).norm() < 1e-15);
        let a = c(0.3, 0.2);
        assert!((sin_over(a, 2.0) - (a * 2.0).sin() / a).norm() < 1e-14);
    }
}
