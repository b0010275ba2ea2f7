//! Forward problem: Jost, regular, adjoint and Weyl solutions, the Jost matrix and
//! the Weyl matrix of `L(Q, A, h)`.

mod asymptotics;
mod jost;
mod pmatrix;
mod regular;
mod weyl;
mod zeros;

pub use asymptotics::{
    fit_decay_order, jost_asymptotics, jost_derivative_asymptotics, jost_matrix_asymptotics, kappa, omega,
    regular_asymptotics, weyl_asymptotics, weyl_weighted_asymptotics, AsymptoticsReport,
};
pub use jost::{solve_jost, solve_jost_adjoint};
pub use pmatrix::{p_matrix_diagnostic, PBlocks};
pub use weyl::{
    adjoint_weyl_solution, check_m_equals_mstar, jost_matrix, jost_matrix_adjoint, weyl_matrix, weyl_matrix_adjoint,
    weyl_matrix_cond, weyl_solution, POLE_COND_LIMIT,
};
pub use zeros::{scan_jost_zeros, ZeroScan, DEFAULT_MIN_R0};

use crate::error::{Error, Result};
use crate::spectral::{BoundaryCondition, MatrixWave, PotentialGrid, SpectralPoint};

use jost::Side;

/// The boundary value problem `L(Q, A, h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    potential: PotentialGrid,
    bc: BoundaryCondition,
}

impl Problem {
    pub fn new(potential: PotentialGrid, bc: BoundaryCondition) -> Result<Self> {
        if potential.dim() != bc.dim() {
            return Err(Error::invalid(format!(
                "potential is {0}x{0} but boundary condition is {1}x{1}",
                potential.dim(),
                bc.dim()
            )));
        }
        Ok(Problem { potential, bc })
    }

    pub fn potential(&self) -> &PotentialGrid {
        &self.potential
    }

    pub fn bc(&self) -> &BoundaryCondition {
        &self.bc
    }

    pub fn dim(&self) -> usize {
        self.bc.dim()
    }
}

/// `phi` with `phi(0) = A, phi'(0) = A_perp + h` and `S` with `S(0) = -A_perp, S'(0) = A`.
pub fn solve_regular(problem: &Problem, pt: SpectralPoint) -> (MatrixWave, MatrixWave) {
    regular_pair(problem, pt, Side::Left)
}

/// Adjoint regular solutions `phi*`, `S*` (same initial data, right-multiplied
/// equation) and the adjoint Jost solution `e*`.
pub fn solve_adjoint(problem: &Problem, pt: SpectralPoint) -> Result<(MatrixWave, MatrixWave, MatrixWave)> {
    let (phi, s) = regular_pair(problem, pt, Side::Right);
    let e = solve_jost_adjoint(&problem.potential, pt)?;
    Ok((phi, s, e))
}

fn regular_pair(problem: &Problem, pt: SpectralPoint, side: Side) -> (MatrixWave, MatrixWave) {
    let a = problem.bc.a().clone();
    let ap = problem.bc.a_perp();
    let phi = regular::integrate(&problem.potential, pt, side, a.clone(), &ap + problem.bc.h());
    let s = regular::integrate(&problem.potential, pt, side, -ap, a);
    (phi, s)
}

/// Regular solution `phi` alone.
pub fn solve_phi(problem: &Problem, pt: SpectralPoint) -> MatrixWave {
    let a = problem.bc.a().clone();
    let dphi = problem.bc.a_perp() + problem.bc.h();
    regular::integrate(&problem.potential, pt, Side::Left, a, dphi)
}

/// Adjoint regular solution `phi*` alone.
pub fn solve_phi_adjoint(problem: &Problem, pt: SpectralPoint) -> MatrixWave {
    let a = problem.bc.a().clone();
    let dphi = problem.bc.a_perp() + problem.bc.h();
    regular::integrate(&problem.potential, pt, Side::Right, a, dphi)
}
