//! Boundary conditions in unitary and general `(A1, B1)` form, their conversion to
//! the projector form `(A, h)`, and a small catalog of named conditions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, CMat, I};
use crate::spectral::{BoundaryCondition, ProjectorResiduals};

/// Eigenvalues of `U` closer than this to `-1` form the Dirichlet block.
pub const DIRICHLET_CLUSTER_TOL: f64 = 1e-10;

const UNITARY_TOL: f64 = 1e-10;

/// Boundary condition `A1^dagger Y'(0) - B1^dagger Y(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralBoundaryPair {
    pub a1: CMat,
    pub b1: CMat,
}

impl GeneralBoundaryPair {
    /// `A1 = (U + I) / 2`, `B1 = i (U - I) / 2`.
    pub fn from_unitary(u: &CMat) -> Self {
        let n = u.nrows();
        let id = linalg::identity(n);
        GeneralBoundaryPair { a1: (u + &id) * cr(0.5), b1: (u - &id) * c(0.0, 0.5) }
    }

    pub fn dim(&self) -> usize {
        self.a1.nrows()
    }

    /// The `n x 2n` condition matrix acting on stacked data `(Y(0), Y'(0))`.
    pub fn condition_matrix(&self) -> CMat {
        stack_columns(&-self.b1.adjoint(), &self.a1.adjoint())
    }
}

/// The `n x 2n` matrix of `T` acting on stacked data `(Y(0), Y'(0))`:
/// `[-A h - A_perp, A]`.
pub fn projector_condition_matrix(bc: &BoundaryCondition) -> CMat {
    let left = -(bc.a() * bc.h()) - bc.a_perp();
    stack_columns(&left, bc.a())
}

fn stack_columns(left: &CMat, right: &CMat) -> CMat {
    let n = left.nrows();
    let mut m = CMat::zeros(n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(left);
    m.view_mut((0, n), (n, n)).copy_from(right);
    m
}

/// Converts a unitary-form condition to projector form.
///
/// The eigenvectors of the Hermitian `(U + I)^dagger (U + I)` are eigenvectors of the
/// normal `U`; those whose eigenvalue of `U` lies within [`DIRICHLET_CLUSTER_TOL`] of
/// `-1` span the Dirichlet block. On the rest, with basis `N` and `U_N = N^dagger U N`,
/// `A = N N^dagger` and `h = N i (U_N - I)(U_N + I)^{-1} N^dagger`, which is
/// `-cot theta` on each eigenvalue `-e^{-2 i theta}`.
pub fn from_unitary(u: &CMat) -> Result<BoundaryCondition> {
    let n = u.nrows();
    linalg::check_square(u, n, "U")?;
    let id = linalg::identity(n);
    let defect = linalg::dist(&(u.adjoint() * u), &id);
    if defect > UNITARY_TOL {
        return Err(Error::invalid(format!("U is not unitary: |U*U - I| = {defect:.2e}")));
    }

    let shifted = u + &id;
    let (_, vecs) = linalg::hermitian_eigen(&(shifted.adjoint() * &shifted));
    let keep: Vec<usize> = (0..n)
        .filter(|&j| {
            let v = vecs.column(j);
            let mu = (v.adjoint() * u * v)[(0, 0)];
            (mu + cr(1.0)).norm() > DIRICHLET_CLUSTER_TOL
        })
        .collect();
    let basis = CMat::from_fn(n, keep.len(), |i, j| vecs[(i, keep[j])]);
    let (a, h) = if keep.len() == n {
        (id.clone(), cayley(u)?)
    } else if keep.is_empty() {
        (linalg::zeros(n), linalg::zeros(n))
    } else {
        let inner = cayley(&(basis.adjoint() * u * &basis))?;
        (&basis * basis.adjoint(), &basis * inner * basis.adjoint())
    };
    let h = (&h + h.adjoint()) * cr(0.5);
    let bc = BoundaryCondition::unchecked(a, h);
    let res = bc.residuals();
    if !res.passes(UNITARY_TOL) {
        return Err(Error::invalid(format!(
            "converted condition violates the projector identities (residual {:.2e})",
            res.max()
        )));
    }
    Ok(bc)
}

/// `i (V - I)(V + I)^{-1}` for unitary `V` without eigenvalue `-1`.
fn cayley(v: &CMat) -> Result<CMat> {
    let id = linalg::identity(v.nrows());
    let inv = linalg::inverse(&(v + &id)).ok_or_else(|| Error::invalid("U + I is singular off the Dirichlet block"))?;
    Ok((v - &id) * inv * I)
}

/// Delta-type condition at a star vertex with `n` edges: `A` has all entries `1/n`
/// and `h = a A`.
///
/// On continuous data `y_1 = ... = y_n` this imposes `sum_j y_j'(0) = n a y_1(0)`;
/// pass `a / n` for the coupling written as `sum_j y_j'(0) = a y_1(0)`.
pub fn delta_condition(n: usize, a: Complex64) -> Result<BoundaryCondition> {
    if n == 0 {
        return Err(Error::invalid("delta condition needs n >= 1"));
    }
    let p = CMat::from_element(n, n, cr(1.0 / n as f64));
    let h = &p * a;
    BoundaryCondition::new(p, h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelfAdjointReport {
    /// `B1^dagger A1 = A1^dagger B1` and `A1^dagger A1 + B1^dagger B1 > 0`.
    pub cond_a3: bool,
    /// `rank [-B1^dagger, A1^dagger] = n`.
    pub cond_a4: bool,
}

pub fn check_selfadjoint_pair(pair: &GeneralBoundaryPair) -> SelfAdjointReport {
    let (a1, b1) = (&pair.a1, &pair.b1);
    let n = pair.dim();
    let scale = 1.0 + linalg::norm(a1) + linalg::norm(b1);
    let sym = linalg::norm(&(b1.adjoint() * a1 - a1.adjoint() * b1)) <= 1e-10 * scale * scale;
    let gram = a1.adjoint() * a1 + b1.adjoint() * b1;
    let (eigs, _) = linalg::hermitian_eigen(&gram);
    let positive = eigs.iter().cloned().fold(f64::INFINITY, f64::min) > 1e-12;

    let sv = pair.condition_matrix().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let rank = sv.iter().filter(|s| **s > 1e-10 * max && max > 0.0).count();
    SelfAdjointReport { cond_a3: sym && positive, cond_a4: rank == n }
}

/// Residuals of the projector-form identities.
pub fn validate(bc: &BoundaryCondition) -> ProjectorResiduals {
    bc.residuals()
}

/// Largest violation of the statement "the two `n x 2n` conditions have the same
/// null space": rank mismatch is reported as infinity, otherwise the larger of the
/// residuals of each condition on an orthonormal basis of the other's null space.
pub fn null_space_mismatch(first: &CMat, second: &CMat) -> f64 {
    let (k1, n1) = null_space(first);
    let (k2, n2) = null_space(second);
    if k1 != k2 {
        return f64::INFINITY;
    }
    let r1 = (first * &n2).norm() / (1.0 + first.norm());
    let r2 = (second * &n1).norm() / (1.0 + second.norm());
    r1.max(r2)
}

/// Dimension of the null space and an orthonormal basis of it as columns.
fn null_space(m: &CMat) -> (usize, CMat) {
    let cols = m.ncols();
    let mut padded = CMat::zeros(cols, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let null: Vec<usize> = (0..cols).filter(|&i| svd.singular_values[i] <= 1e-10 * max.max(1.0)).collect();
    let mut basis = CMat::zeros(cols, null.len());
    for (j, &i) in null.iter().enumerate() {
        let row = v_t.row(i).adjoint();
        basis.column_mut(j).copy_from(&row);
    }
    (null.len(), basis)
}
