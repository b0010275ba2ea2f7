//! Residuals of the kernel relations
//!
//! ```text
//! r~(x,l,m) - r(x,l,m) - (1/2 pi i) int r(x,xi,m) r~(x,l,xi) d xi = 0
//! r~(x,l,m) - r(x,l,m) - (1/2 pi i) int r~(x,xi,m) r(x,l,xi) d xi = 0
//! ```
//!
//! with `r = M^ D` built from the true problem, so they can only be evaluated when
//! the truth is known.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{solve_phi, solve_phi_adjoint, weyl_matrix, Problem};
use crate::linalg::{self, c, cr, simpson_weights, CMat};
use crate::spectral::{MatrixWave, SpectralPoint};

use super::model::{model_d, model_weyl};
use super::WeylData;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport {
    /// Largest residual of the first relation over the probe pairs.
    pub first: f64,
    /// Largest residual of the second relation.
    pub second: f64,
}

impl LemmaReport {
    pub fn max(&self) -> f64 {
        self.first.max(self.second)
    }
}

fn node_index(problem: &Problem, x: f64) -> Result<usize> {
    problem
        .potential()
        .grid()
        .index_of(x)
        .ok_or_else(|| Error::invalid(format!("x = {x} is not a node of the potential grid")))
}

fn product_integral(star: &MatrixWave, phi: &MatrixWave, upto: usize) -> CMat {
    let h = phi.grid.step();
    let w = simpson_weights(upto);
    let mut acc = linalg::zeros(phi.value(0).nrows());
    for (i, wi) in w.iter().enumerate() {
        acc += star.value(i) * phi.value(i) * cr(wi * h);
    }
    acc
}

/// `D(x, lambda, mu) = int_0^x phi*(t, mu) phi(t, lambda) dt` by Simpson's rule on the
/// grid of `problem`; `x` must be a grid node.
pub fn regular_product_integral(problem: &Problem, x: f64, lam: SpectralPoint, mu: SpectralPoint) -> Result<CMat> {
    let i = node_index(problem, x)?;
    Ok(product_integral(&solve_phi_adjoint(problem, mu), &solve_phi(problem, lam), i))
}

/// Evaluates both relations at every `(lambda, mu)` pair, with the contour integral
/// discretised on the nodes of `weyl` and `M^(mu)` at the probes taken from `truth`.
pub fn lemma42_residual(
    weyl: &WeylData,
    a: &CMat,
    truth: &Problem,
    x: f64,
    pairs: &[(SpectralPoint, SpectralPoint)],
) -> Result<LemmaReport> {
    let idx = node_index(truth, x)?;
    let nodes = weyl.contour().nodes();
    let two_pi_i = c(0.0, 2.0 * PI);
    let mhat: Vec<CMat> = nodes.iter().zip(weyl.m_samples()).map(|(nd, m)| m - model_weyl(a, nd.point)).collect();
    let waves: Vec<(MatrixWave, MatrixWave)> =
        nodes.par_iter().map(|nd| (solve_phi(truth, nd.point), solve_phi_adjoint(truth, nd.point))).collect();

    let mut report = LemmaReport { first: 0.0, second: 0.0 };
    for &(lam, mu) in pairs {
        let mhat_mu = weyl_matrix(truth, mu)? - model_weyl(a, mu);
        let phi_lam = solve_phi(truth, lam);
        let star_mu = solve_phi_adjoint(truth, mu);
        let r_tilde = &mhat_mu * model_d(a, x, lam, mu);
        let r = &mhat_mu * product_integral(&star_mu, &phi_lam, idx);

        let (s1, s2) = nodes
            .par_iter()
            .enumerate()
            .map(|(k, nd)| {
                let xi = nd.point;
                let wk = nd.weight / two_pi_i;
                let r_xi_mu = &mhat_mu * product_integral(&star_mu, &waves[k].0, idx);
                let rt_lam_xi = &mhat[k] * model_d(a, x, lam, xi);
                let rt_xi_mu = &mhat_mu * model_d(a, x, xi, mu);
                let r_lam_xi = &mhat[k] * product_integral(&waves[k].1, &phi_lam, idx);
                (r_xi_mu * rt_lam_xi * wk, rt_xi_mu * r_lam_xi * wk)
            })
            .reduce(|| (linalg::zeros(a.nrows()), linalg::zeros(a.nrows())), |(a1, a2), (b1, b2)| (a1 + b1, a2 + b2));
        report.first = report.first.max(linalg::norm(&(&r_tilde - &r - s1)));
        report.second = report.second.max(linalg::norm(&(&r_tilde - &r - s2)));
    }
    Ok(report)
}
