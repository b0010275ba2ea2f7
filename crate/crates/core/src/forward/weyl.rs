use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::spectral::{apply_t, apply_t_star, MatrixWave, SpectralPoint};

use super::jost::{jost_at_origin, Side};
use super::{solve_jost, solve_jost_adjoint, Problem};

/// Jost matrices with `cond > POLE_COND_LIMIT` are treated as singular.
pub const POLE_COND_LIMIT: f64 = 1e10;

fn checked_inverse(j: &CMat, pt: SpectralPoint) -> Result<CMat> {
    let cond = linalg::cond(j);
    if cond > POLE_COND_LIMIT {
        return Err(Error::PoleProximity { rho: pt.rho(), cond });
    }
    linalg::inverse(j).ok_or(Error::PoleProximity { rho: pt.rho(), cond })
}

/// `J(rho) = T(e(., rho))`.
pub fn jost_matrix(problem: &Problem, pt: SpectralPoint) -> Result<CMat> {
    let (e0, de0) = jost_at_origin(problem.potential(), pt, Side::Left)?;
    apply_t(problem.bc(), &e0, &de0)
}

/// `J*(rho) = T*(e*(., rho))`.
pub fn jost_matrix_adjoint(problem: &Problem, pt: SpectralPoint) -> Result<CMat> {
    let (e0, de0) = jost_at_origin(problem.potential(), pt, Side::Right)?;
    apply_t_star(problem.bc(), &e0, &de0)
}

/// Weyl matrix together with the condition number of the Jost matrix.
pub fn weyl_matrix_cond(problem: &Problem, pt: SpectralPoint) -> Result<(CMat, f64)> {
    let (e0, de0) = jost_at_origin(problem.potential(), pt, Side::Left)?;
    let bc = problem.bc();
    let j = apply_t(bc, &e0, &de0)?;
    let cond = linalg::cond(&j);
    let j_inv = checked_inverse(&j, pt)?;
    Ok(((bc.a() * &e0 + bc.a_perp() * &de0) * j_inv, cond))
}

/// `M(lambda) = [A e(0) + A_perp e'(0)] J(rho)^{-1}`.
pub fn weyl_matrix(problem: &Problem, pt: SpectralPoint) -> Result<CMat> {
    weyl_matrix_cond(problem, pt).map(|(m, _)| m)
}

/// Weyl solution `Phi(x, lambda) = e(x, rho) J(rho)^{-1}`, normalised by `T(Phi) = I`.
pub fn weyl_solution(problem: &Problem, pt: SpectralPoint) -> Result<MatrixWave> {
    let e = solve_jost(problem.potential(), pt)?;
    let j = apply_t(problem.bc(), e.value(0), e.deriv(0))?;
    let j_inv = checked_inverse(&j, pt)?;
    Ok(e.mul_right(&j_inv))
}

/// Adjoint Weyl solution `Phi*(x, lambda) = T*(e*)^{-1} e*(x, rho)`.
pub fn adjoint_weyl_solution(problem: &Problem, pt: SpectralPoint) -> Result<MatrixWave> {
    let e = solve_jost_adjoint(problem.potential(), pt)?;
    let j = apply_t_star(problem.bc(), e.value(0), e.deriv(0))?;
    let j_inv = checked_inverse(&j, pt)?;
    Ok(e.mul_left(&j_inv))
}

/// `M*(lambda) = Phi*(0) A + Phi*'(0) A_perp`.
pub fn weyl_matrix_adjoint(problem: &Problem, pt: SpectralPoint) -> Result<CMat> {
    let (e0, de0) = jost_at_origin(problem.potential(), pt, Side::Right)?;
    let bc = problem.bc();
    let j = apply_t_star(bc, &e0, &de0)?;
    let j_inv = checked_inverse(&j, pt)?;
    Ok(j_inv * (e0 * bc.a() + de0 * bc.a_perp()))
}

/// Largest `|M - M*|` over the given points.
pub fn check_m_equals_mstar(problem: &Problem, pts: &[SpectralPoint]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &pt in pts {
        let m = weyl_matrix(problem, pt)?;
        let ms = weyl_matrix_adjoint(problem, pt)?;
        worst = worst.max(linalg::dist(&m, &ms));
    }
    Ok(worst)
}
