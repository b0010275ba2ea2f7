use num_complex::Complex64;

use crate::linalg::{self, sin_over, CMat};
use crate::spectral::SpectralPoint;

/// `M~(lambda) = A / (i rho) - i rho A_perp`, the Weyl matrix of `Q = 0`, `h = 0`.
pub fn model_weyl(a: &CMat, pt: SpectralPoint) -> CMat {
    let ap = linalg::identity(a.nrows()) - a;
    a / pt.i_rho() - ap * pt.i_rho()
}

/// `phi~(x, lambda) = A cos(rho x) + A_perp sin(rho x) / rho`.
pub fn model_phi(a: &CMat, x: f64, pt: SpectralPoint) -> CMat {
    let ap = linalg::identity(a.nrows()) - a;
    let rho = pt.rho();
    a * (rho * x).cos() + ap * sin_over(rho, x)
}

/// Scalar coefficients `(d_a, d_perp)` with `D~ = A d_a + A_perp d_perp`.
#[inline]
pub(crate) fn model_d_coeffs(x: f64, rho: Complex64, tau: Complex64) -> (Complex64, Complex64) {
    let sp = sin_over(rho + tau, x);
    let sm = sin_over(rho - tau, x);
    (0.5 * (sp + sm), 0.5 * (sm - sp) / (tau * rho))
}

/// `D~(x, lambda, mu) = int_0^x phi~*(t, mu) phi~(t, lambda) dt` for the zero model,
/// with `lambda = rho^2`, `mu = tau^2`:
///
/// ```text
/// D~ = A [s(rho + tau) + s(rho - tau)] / 2 + A_perp [s(rho - tau) - s(rho + tau)] / (2 tau rho)
/// ```
///
/// where `s(a) = sin(a x) / a` is continued by `x` at `a = 0`.
pub fn model_d(a: &CMat, x: f64, lam: SpectralPoint, mu: SpectralPoint) -> CMat {
    let (da, dp) = model_d_coeffs(x, lam.rho(), mu.rho());
    let ap = linalg::identity(a.nrows()) - a;
    a * da + ap * dp
}

/// `r~(x, lambda, mu) = M^(mu) D~(x, lambda, mu)`.
pub fn kernel_rtilde(a: &CMat, mhat_at_mu: &CMat, x: f64, lam: SpectralPoint, mu: SpectralPoint) -> CMat {
    mhat_at_mu * model_d(a, x, lam, mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cr};

    #[test]
    fn model_weyl_special_values() {
        let id = linalg::identity(2);
        let m = model_weyl(&id, SpectralPoint::imaginary(1.0).unwrap());
        assert!(linalg::dist(&m, &-linalg::identity(2)) < 1e-15);
        let z = linalg::zeros(2);
        let m = model_weyl(&z, SpectralPoint::new(cr(2.0)).unwrap());
        assert!(linalg::dist(&m, &(linalg::identity(2) * c(0.0, -2.0))) < 1e-15);
    }

    #[test]
    fn diagonal_limit_matches_cos_squared() {
        let id = linalg::identity(1);
        let p = SpectralPoint::new(cr(1.0)).unwrap();
        let d = model_d(&id, 1.0, p, p);
        let expect = 0.5 + 2f64.sin() / 4.0;
        assert!((d[(0, 0)] - cr(expect)).norm() < 1e-12);
    }

    #[test]
    fn zero_at_origin() {
        let a = linalg::diag(&[1.0, 0.0]);
        let p = SpectralPoint::new(c(1.0, 2.0)).unwrap();
        let q = SpectralPoint::new(c(-3.0, 0.5)).unwrap();
        assert_eq!(linalg::norm(&model_d(&a, 0.0, p, q)), 0.0);
    }
}
