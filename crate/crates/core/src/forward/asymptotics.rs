//! Residuals of the large-`|rho|` expansions and a log-log decay fit.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{self, cr, simpson_weights, CMat};
use crate::spectral::{free_jost, free_jost_inverse, PotentialGrid, SpectralPoint};

use super::jost::{jost_at_origin, Side};
use super::{jost_matrix, solve_phi, weyl_matrix, Problem};

/// `omega(x, rho) = 1/2 int_x^inf Q(t) e^{2 i rho (t - x)} dt` at grid node `index`.
pub fn omega(q: &PotentialGrid, index: usize, rho: Complex64) -> CMat {
    let grid = q.grid();
    let h = grid.step();
    let x = grid.x(index);
    let w = simpson_weights(grid.len() - 1 - index);
    let two_i_rho = Complex64::new(0.0, 2.0) * rho;
    let mut acc = linalg::zeros(q.dim());
    for (k, wk) in w.iter().enumerate() {
        let m = index + k;
        let t = grid.x(m);
        linalg::axpy(&mut acc, cr(0.5 * wk * h) * (two_i_rho * (t - x)).exp(), q.at(m));
    }
    acc
}

/// `kappa(rho) = (A_perp - A) omega(0, rho)`.
pub fn kappa(problem: &Problem, rho: Complex64) -> CMat {
    let a = problem.bc().a();
    (problem.bc().a_perp() - a) * omega(problem.potential(), 0, rho)
}

/// Residual norms of an expansion at probe points of growing `|rho|`.
#[derive(Debug, Clone)]
pub struct AsymptoticsReport {
    pub probes: Vec<SpectralPoint>,
    pub residuals: Vec<f64>,
    /// Negative log-log slope of `residuals` against `|rho|`.
    pub decay_order: f64,
}

impl AsymptoticsReport {
    fn from_residuals(probes: &[SpectralPoint], residuals: Vec<f64>) -> Self {
        let decay_order = fit_decay_order(probes, &residuals);
        AsymptoticsReport { probes: probes.to_vec(), residuals, decay_order }
    }
}

/// Least-squares slope `p` of `log r = c - p log |rho|`.
pub fn fit_decay_order(probes: &[SpectralPoint], residuals: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = probes
        .iter()
        .zip(residuals)
        .filter(|(_, r)| **r > 0.0 && r.is_finite())
        .map(|(p, r)| (p.rho().norm().ln(), r.ln()))
        .collect();
    let k = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    -sxy / sxx
}

fn report<F>(probes: &[SpectralPoint], f: F) -> Result<AsymptoticsReport>
where
    F: Fn(SpectralPoint) -> Result<f64> + Sync,
{
    use rayon::prelude::*;
    let residuals = probes.par_iter().map(|&p| f(p)).collect::<Result<Vec<_>>>()?;
    Ok(AsymptoticsReport::from_residuals(probes, residuals))
}

/// `|e(0, rho) - I - (omega(0,rho) - omega(0,0)) / (i rho)|`.
pub fn jost_asymptotics(problem: &Problem, probes: &[SpectralPoint]) -> Result<AsymptoticsReport> {
    let q = problem.potential();
    let n = problem.dim();
    let w0 = omega(q, 0, cr(0.0));
    report(probes, |pt| {
        let (e0, _) = jost_at_origin(q, pt, Side::Left)?;
        let wr = omega(q, 0, pt.rho());
        let approx = linalg::identity(n) + (wr - &w0) / pt.i_rho();
        Ok(linalg::dist(&e0, &approx))
    })
}

/// `|e'(0, rho) / (i rho) - I + (omega(0,0) + omega(0,rho)) / (i rho)|`.
pub fn jost_derivative_asymptotics(problem: &Problem, probes: &[SpectralPoint]) -> Result<AsymptoticsReport> {
    let q = problem.potential();
    let n = problem.dim();
    let w0 = omega(q, 0, cr(0.0));
    report(probes, |pt| {
        let (_, de0) = jost_at_origin(q, pt, Side::Left)?;
        let wr = omega(q, 0, pt.rho());
        let approx = linalg::identity(n) - (&w0 + wr) / pt.i_rho();
        Ok(linalg::dist(&(de0 / pt.i_rho()), &approx))
    })
}

/// `|J_0^{-1} J - I + (h + omega(0,0)) / (i rho) - kappa / (i rho)|`.
pub fn jost_matrix_asymptotics(problem: &Problem, probes: &[SpectralPoint]) -> Result<AsymptoticsReport> {
    let q = problem.potential();
    let bc = problem.bc();
    let n = problem.dim();
    let w0 = omega(q, 0, cr(0.0));
    report(probes, |pt| {
        let j = jost_matrix(problem, pt)?;
        let lhs = free_jost_inverse(bc.a(), pt) * j;
        let k = kappa(problem, pt.rho());
        let approx = linalg::identity(n) - (bc.h() + &w0) / pt.i_rho() + k / pt.i_rho();
        Ok(linalg::dist(&lhs, &approx))
    })
}

fn weyl_leading(problem: &Problem, pt: SpectralPoint) -> (CMat, CMat, CMat) {
    let bc = problem.bc();
    let n = problem.dim();
    let left = bc.a() + bc.a_perp() * pt.i_rho();
    let k = kappa(problem, pt.rho());
    let middle = linalg::identity(n) + bc.h() / pt.i_rho() - k * (cr(2.0) / pt.i_rho());
    (left, middle, free_jost_inverse(bc.a(), pt))
}

/// `|M - (A + i rho A_perp)[I + h/(i rho) - 2 kappa/(i rho)](i rho A - A_perp)^{-1}|`.
pub fn weyl_asymptotics(problem: &Problem, probes: &[SpectralPoint]) -> Result<AsymptoticsReport> {
    report(probes, |pt| {
        let m = weyl_matrix(problem, pt)?;
        let (l, mid, r) = weyl_leading(problem, pt);
        Ok(linalg::dist(&m, &(l * mid * r)))
    })
}

/// Same expansion with the outer factors stripped:
/// `|(A + i rho A_perp)^{-1} M (i rho A - A_perp) - [I + h/(i rho) - 2 kappa/(i rho)]|`.
pub fn weyl_weighted_asymptotics(problem: &Problem, probes: &[SpectralPoint]) -> Result<AsymptoticsReport> {
    let bc = problem.bc();
    report(probes, |pt| {
        let m = weyl_matrix(problem, pt)?;
        let (_, mid, _) = weyl_leading(problem, pt);
        let left_inv = bc.a() + bc.a_perp() / pt.i_rho();
        let inner = left_inv * m * free_jost(bc.a(), pt);
        Ok(linalg::dist(&inner, &mid))
    })
}

/// `|phi(x) - A cos rho x - (A_perp + h) sin(rho x)/rho - sin(rho x)/(2 rho) int_0^x Q A| * |rho| / e^{|Im rho| x}`
/// at grid node `index`.
pub fn regular_asymptotics(problem: &Problem, index: usize, probes: &[SpectralPoint]) -> Result<AsymptoticsReport> {
    let q = problem.potential();
    let grid = q.grid();
    let x = grid.x(index);
    let h = grid.step();
    let w = simpson_weights(index);
    let mut int_q = linalg::zeros(problem.dim());
    for (m, wm) in w.iter().enumerate() {
        linalg::axpy(&mut int_q, cr(wm * h), q.at(m));
    }
    let bc = problem.bc();
    report(probes, |pt| {
        let rho = pt.rho();
        let phi = solve_phi(problem, pt);
        let s = (rho * x).sin() / rho;
        let approx = bc.a() * (rho * x).cos() + (bc.a_perp() + bc.h()) * s + &int_q * bc.a() * (s * 0.5);
        let scale = rho.norm() / (rho.im.abs() * x).exp();
        Ok(linalg::dist(phi.value(index), &approx) * scale)
    })
}
