//! Nystrom discretisation of the main equation
//!
//! ```text
//! phi~(x, lambda) = phi(x, lambda) + (1/2 pi i) int_gamma phi(x, mu) M^(mu) D~(x, lambda, mu) d mu
//! ```
//!
//! The unknowns are the weighted values `w_k = phi(x, mu_k) W_k`,
//! `W_k = A + i rho_k A_perp`. The unknown multiplies the kernel from the left, so
//! each row of `phi` satisfies its own `nK x nK` system
//!
//! ```text
//! w_j + sum_k w_k B_jk = phi~_j W_j,   B_jk = W_k^{-1} c_k M^_k D~(x, lambda_j, mu_k) W_j
//! ```
//!
//! with `c_k` the contour weight over `2 pi i`. All `n` rows share one matrix and
//! are solved as `n` right-hand sides of a single LU factorisation.

use std::f64::consts::PI;

use nalgebra::linalg::LU;
use nalgebra::{DMatrix, Dyn};
use num_complex::Complex64;

use crate::contour::Segment;
use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, CMat};
use crate::spectral::SpectralPoint;

use super::model::{model_d_coeffs, model_phi, model_weyl};
use super::WeylData;

/// Systems with an estimated 1-norm condition number above this are rejected.
pub const MAIN_COND_LIMIT: f64 = 1e12;

const OFFGRID_PROBES: usize = 8;

/// Per-node data of the discretised kernel: `c_k M^_k A` and `c_k M^_k A_perp`.
#[derive(Debug, Clone)]
struct KernelNode {
    point: SpectralPoint,
    mhat_a: CMat,
    mhat_ap: CMat,
}

#[derive(Debug, Clone)]
pub struct MainEquationSolution {
    pub x: f64,
    /// Recovered `phi(x, mu_k)` at every contour node.
    pub phi_nodes: Vec<CMat>,
    /// Model values `phi~(x, mu_k)`.
    pub model_nodes: Vec<CMat>,
    /// Estimated 1-norm condition number of the Nystrom matrix.
    pub cond_estimate: f64,
    /// `max_k |(discrete equation residual at node k)|`.
    pub node_residual: f64,
    /// Residual of the main equation at off-grid points, with `phi - phi~` there taken
    /// from cubic interpolation of the nodal values along the contour.
    pub offgrid_residual: f64,
    /// `max_k |phi(x, mu_k)(A + i rho_k A_perp)|`.
    pub weighted_max: f64,
    a: CMat,
    kernel: Vec<KernelNode>,
}

impl MainEquationSolution {
    /// Nystrom interpolant `phi(x, lambda) = phi~ - (1/2 pi i) sum_k w_k phi_k M^_k D~(x, lambda, mu_k)`.
    pub fn interpolate(&self, lam: SpectralPoint) -> CMat {
        let mut out = model_phi(&self.a, self.x, lam);
        out -= self.kernel_sum(lam, &self.phi_nodes);
        out
    }

    fn kernel_sum(&self, lam: SpectralPoint, phi: &[CMat]) -> CMat {
        let n = self.a.nrows();
        let mut acc = linalg::zeros(n);
        for (node, f) in self.kernel.iter().zip(phi) {
            let (da, dp) = model_d_coeffs(self.x, lam.rho(), node.point.rho());
            acc += f * (&node.mhat_a * da + &node.mhat_ap * dp);
        }
        acc
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }
}

fn weight(a: &CMat, ap: &CMat, rho: Complex64) -> CMat {
    a + ap * (c(0.0, 1.0) * rho)
}

fn weight_inv(a: &CMat, ap: &CMat, rho: Complex64) -> CMat {
    a + ap / (c(0.0, 1.0) * rho)
}

/// Solves the main equation at `x` on the contour carried by `weyl`.
pub fn solve_main_equation(weyl: &WeylData, a: &CMat, x: f64) -> Result<MainEquationSolution> {
    let n = weyl.dim();
    linalg::check_square(a, n, "A")?;
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::invalid(format!("x must be >= 0, got {x}")));
    }
    let contour = weyl.contour();
    let nodes = contour.nodes();
    let k_len = nodes.len();
    let ap = linalg::identity(n) - a;
    let two_pi_i = c(0.0, 2.0 * PI);

    let kernel: Vec<KernelNode> = nodes
        .iter()
        .zip(weyl.m_samples())
        .map(|(node, m)| {
            let mhat = (m - model_weyl(a, node.point)) * (node.weight / two_pi_i);
            KernelNode { point: node.point, mhat_a: &mhat * a, mhat_ap: &mhat * &ap }
        })
        .collect();

    // U_k = W_k^{-1} c_k M^_k split by the right factor A or A_perp of D~, and again
    // by the A / A_perp part of W_j, so that B_jk is a sum of four fixed matrices
    // with scalar coefficients.
    let parts: Vec<[CMat; 4]> = kernel
        .iter()
        .map(|kn| {
            let winv = weight_inv(a, &ap, kn.point.rho());
            let ua = &winv * &kn.mhat_a;
            let uap = &winv * &kn.mhat_ap;
            [&ua * a, &ua * &ap, &uap * a, &uap * &ap]
        })
        .collect();

    let size = n * k_len;
    let mut g = DMatrix::<Complex64>::identity(size, size);
    for j in 0..k_len {
        let rho_j = nodes[j].point.rho();
        let irho_j = c(0.0, 1.0) * rho_j;
        for k in 0..k_len {
            let (da, dp) = model_d_coeffs(x, rho_j, nodes[k].point.rho());
            let [ua_a, ua_ap, up_a, up_ap] = &parts[k];
            // B_jk = (U_a da + U_p dp)(A + i rho_j A_perp); block (j, k) of G holds B_jk^T.
            let (s1, s2, s3, s4) = (da, da * irho_j, dp, dp * irho_j);
            for r in 0..n {
                for s in 0..n {
                    let b = ua_a[(r, s)] * s1 + ua_ap[(r, s)] * s2 + up_a[(r, s)] * s3 + up_ap[(r, s)] * s4;
                    g[(j * n + s, k * n + r)] += b;
                }
            }
        }
    }

    let model_nodes: Vec<CMat> = nodes.iter().map(|nd| model_phi(a, x, nd.point)).collect();
    let mut rhs = DMatrix::<Complex64>::zeros(size, n);
    for (j, nd) in nodes.iter().enumerate() {
        let target = &model_nodes[j] * weight(a, &ap, nd.point.rho());
        for r in 0..n {
            for s in 0..n {
                rhs[(j * n + s, r)] = target[(r, s)];
            }
        }
    }

    let g_norm = one_norm(&g);
    let lu = g.clone().lu();
    let sol = lu.solve(&rhs).ok_or(Error::IllConditioned { x, cond: f64::INFINITY })?;
    let cond_estimate = g_norm * inverse_one_norm_estimate(&lu, size);
    if !(cond_estimate <= MAIN_COND_LIMIT) {
        return Err(Error::IllConditioned { x, cond: cond_estimate });
    }

    let mut phi_nodes = Vec::with_capacity(k_len);
    let mut weighted_max: f64 = 0.0;
    for (k, nd) in nodes.iter().enumerate() {
        let mut w = linalg::zeros(n);
        for r in 0..n {
            for s in 0..n {
                w[(r, s)] = sol[(k * n + s, r)];
            }
        }
        weighted_max = weighted_max.max(linalg::norm(&w));
        phi_nodes.push(w * weight_inv(a, &ap, nd.point.rho()));
    }
    if !phi_nodes.iter().all(linalg::is_finite) {
        return Err(Error::IllConditioned { x, cond: f64::INFINITY });
    }

    let mut out = MainEquationSolution {
        x,
        phi_nodes,
        model_nodes,
        cond_estimate,
        node_residual: 0.0,
        offgrid_residual: 0.0,
        weighted_max,
        a: a.clone(),
        kernel,
    };
    out.node_residual = nodes
        .iter()
        .enumerate()
        .map(|(j, nd)| {
            let lhs = &out.phi_nodes[j] + out.kernel_sum(nd.point, &out.phi_nodes);
            linalg::dist(&lhs, &out.model_nodes[j])
        })
        .fold(0.0, f64::max);
    out.offgrid_residual = offgrid_residual(weyl, &out);
    Ok(out)
}

/// Points midway between contour nodes, spread over the three segments, together
/// with cubic interpolation of the nodal `phi` values at them.
fn offgrid_residual(weyl: &WeylData, sol: &MainEquationSolution) -> f64 {
    let contour = weyl.contour();
    let nodes = contour.nodes();
    let a = &sol.a;
    let ap = linalg::identity(a.nrows()) - a;
    let mut worst: f64 = 0.0;
    for (segment, count) in [(Segment::Circle, 2), (Segment::UpperCut, 3), (Segment::LowerCut, 3)] {
        let range = contour.segment_range(segment);
        let len = range.len();
        debug_assert_eq!(OFFGRID_PROBES, 8);
        for p in 0..count {
            // interval [m, m+1] with two neighbours on each side
            let m = 1 + (p + 1) * (len - 4) / (count + 1);
            let idx: Vec<usize> = (m - 1..=m + 2).map(|i| range.start + i).collect();
            let (params, point) = match segment {
                Segment::Circle => {
                    let t: Vec<f64> = idx.iter().map(|&i| 2.0 * nodes[i].point.rho().arg()).collect();
                    let mid = 0.5 * (t[1] + t[2]);
                    let rho = Complex64::from_polar(contour.r0().sqrt(), 0.5 * mid);
                    (t, (mid, rho))
                }
                _ => {
                    let t: Vec<f64> = idx.iter().map(|&i| nodes[i].point.rho().re.abs()).collect();
                    let mid = 0.5 * (t[1] + t[2]);
                    let sign = if segment == Segment::UpperCut { 1.0 } else { -1.0 };
                    let lam = c(mid * mid, sign * contour.delta());
                    let sheet = if sign > 0.0 { crate::spectral::Sheet::Upper } else { crate::spectral::Sheet::Lower };
                    let rho = crate::spectral::lambda_to_point(lam, sheet).map(|p| p.rho()).unwrap_or(cr(mid));
                    (t, (mid, rho))
                }
            };
            let Ok(lam) = SpectralPoint::new(point.1) else { continue };
            let corr: Vec<CMat> = idx.iter().map(|&i| &sol.phi_nodes[i] - &sol.model_nodes[i]).collect();
            let corr_interp = lagrange(&params, &corr.iter().collect::<Vec<_>>(), point.0);
            let res = -corr_interp - sol.kernel_sum(lam, &sol.phi_nodes);
            let w = weight(a, &ap, lam.rho());
            worst = worst.max(linalg::norm(&(res * w)));
        }
    }
    worst
}

fn lagrange(t: &[f64], f: &[&CMat], at: f64) -> CMat {
    let mut out = linalg::zeros(f[0].nrows());
    for i in 0..t.len() {
        let mut l = 1.0;
        for j in 0..t.len() {
            if i != j {
                l *= (at - t[j]) / (t[i] - t[j]);
            }
        }
        out += f[i] * cr(l);
    }
    out
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter().map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Hager-Higham estimate of `|G^{-1}|_1` from an LU factorisation of `G`.
fn inverse_one_norm_estimate(lu: &LU<Complex64, Dyn, Dyn>, size: usize) -> f64 {
    let l_adj = lu.l().adjoint();
    let u_adj = lu.u().adjoint();
    let p = lu.p();
    let solve_adjoint = |b: &DMatrix<Complex64>| -> Option<DMatrix<Complex64>> {
        let t = u_adj.solve_lower_triangular(b)?;
        let mut v = l_adj.solve_upper_triangular(&t)?;
        p.inv_permute_rows(&mut v);
        Some(v)
    };

    let mut x = DMatrix::<Complex64>::from_element(size, 1, cr(1.0 / size as f64));
    let mut estimate = 0.0;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let Some(y) = lu.solve(&x) else { return f64::INFINITY };
        estimate = y.iter().map(|z| z.norm()).sum::<f64>();
        let xi = y.map(|z| if z.norm() > 0.0 { z / z.norm() } else { cr(1.0) });
        let Some(z) = solve_adjoint(&xi) else { return f64::INFINITY };
        let (j, zmax) =
            z.iter().enumerate().fold((0, 0.0), |acc, (i, v)| if v.norm() > acc.1 { (i, v.norm()) } else { acc });
        let ztx: f64 = z.iter().zip(x.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        if zmax <= ztx || j == last_j {
            break;
        }
        last_j = j;
        x.fill(cr(0.0));
        x[(j, 0)] = cr(1.0);
    }
    // Higham's alternative lower bound guards against unlucky starting vectors.
    let alt = DMatrix::<Complex64>::from_fn(size, 1, |i, _| {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        cr(sign * (1.0 + i as f64 / (size.max(2) - 1) as f64))
    });
    if let Some(y) = lu.solve(&alt) {
        let bound = 2.0 * y.iter().map(|z| z.norm()).sum::<f64>() / (3.0 * size as f64);
        estimate = f64::max(estimate, bound);
    }
    estimate
}
