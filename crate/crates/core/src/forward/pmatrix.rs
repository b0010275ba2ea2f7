use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::spectral::SpectralPoint;

use super::{adjoint_weyl_solution, solve_phi, solve_phi_adjoint, weyl_solution, Problem};

/// Blocks of the transfer matrix `P(x, lambda)` between `problem` and `model`.
#[derive(Debug, Clone)]
pub struct PBlocks {
    pub p11: CMat,
    pub p12: CMat,
    pub p21: CMat,
    pub p22: CMat,
}

/// Evaluates `P_jk(x, lambda)` from the regular and Weyl solutions of `problem`
/// and the adjoint solutions of `model`:
///
/// ```text
/// P_j1 = phi^(j-1) Phi~*' - Phi^(j-1) phi~*'
/// P_j2 = Phi^(j-1) phi~*  - phi^(j-1) Phi~*
/// ```
///
/// `x` must be a node of both potential grids.
pub fn p_matrix_diagnostic(problem: &Problem, model: &Problem, pt: SpectralPoint, x: f64) -> Result<PBlocks> {
    if linalg::dist(problem.bc().a(), model.bc().a()) > 1e-12 {
        return Err(Error::invalid("P-matrix estimates need the model to share the projector A"));
    }
    let i = problem
        .potential()
        .grid()
        .index_of(x)
        .ok_or_else(|| Error::invalid(format!("x = {x} is not a node of the problem grid")))?;
    let k = model
        .potential()
        .grid()
        .index_of(x)
        .ok_or_else(|| Error::invalid(format!("x = {x} is not a node of the model grid")))?;

    let phi = solve_phi(problem, pt);
    let weyl = weyl_solution(problem, pt)?;
    let phi_m = solve_phi_adjoint(model, pt);
    let weyl_m = adjoint_weyl_solution(model, pt)?;

    let (f, df) = (phi.value(i), phi.deriv(i));
    let (w, dw) = (weyl.value(i), weyl.deriv(i));
    let (fs, dfs) = (phi_m.value(k), phi_m.deriv(k));
    let (ws, dws) = (weyl_m.value(k), weyl_m.deriv(k));

    Ok(PBlocks { p11: f * dws - w * dfs, p21: df * dws - dw * dfs, p12: w * fs - f * ws, p22: dw * fs - df * ws })
}
