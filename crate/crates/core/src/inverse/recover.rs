//! `Q = phi'' phi^{-1} + lambda I` and `h = A (phi'(0) - A_perp) A` from the
//! recovered `phi(x, lambda)` at probe values of `lambda`.
//!
//! Only the correction `psi = phi - phi~` to the model solution is differentiated
//! numerically. With `phi~'' = -lambda phi~` and `phi~'(0) = A_perp` this gives
//! `Q = (psi'' + lambda psi) phi^{-1}` and `h = A psi'(0) A`, so data equal to the
//! model reproduce `Q = 0`, `h = 0` without finite-difference error.

use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat};
use crate::spectral::{Grid, PotentialGrid, SpectralPoint};

use super::{model_phi, MainEquationSolution};

/// `phi(x)` is treated as singular beyond this condition number.
const PHI_COND_LIMIT: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct Recovery {
    /// Potential averaged over the usable probes.
    pub q: PotentialGrid,
    pub h: CMat,
    /// Potential from each probe separately.
    pub per_probe: Vec<PotentialGrid>,
    /// Largest L1 distance between single-probe potentials.
    pub probe_spread: f64,
    /// Whether `Q(0)` was extrapolated because `phi(0) = A` is singular.
    pub extrapolated_origin: bool,
}

/// Fourth-order first and second derivatives of grid samples; one-sided stencils at
/// the two nodes nearest each end.
pub(crate) fn derivatives(f: &[CMat], h: f64) -> (Vec<CMat>, Vec<CMat>) {
    let len = f.len();
    assert!(len >= 6, "finite differences need at least 6 nodes");
    let comb = |idx: [usize; 6], w: [f64; 6], scale: f64| -> CMat {
        let mut acc = linalg::zeros(f[0].nrows());
        for (i, wi) in idx.iter().zip(w) {
            if wi != 0.0 {
                acc += &f[*i] * cr(wi * scale);
            }
        }
        acc
    };
    let d1s = 1.0 / (12.0 * h);
    let d2s = 1.0 / (12.0 * h * h);
    let mut d1 = Vec::with_capacity(len);
    let mut d2 = Vec::with_capacity(len);
    for i in 0..len {
        let (a1, a2) = match i {
            0 => (
                comb([0, 1, 2, 3, 4, 5], [-25.0, 48.0, -36.0, 16.0, -3.0, 0.0], d1s),
                comb([0, 1, 2, 3, 4, 5], [45.0, -154.0, 214.0, -156.0, 61.0, -10.0], d2s),
            ),
            1 => (
                comb([0, 1, 2, 3, 4, 5], [-3.0, -10.0, 18.0, -6.0, 1.0, 0.0], d1s),
                comb([0, 1, 2, 3, 4, 5], [10.0, -15.0, -4.0, 14.0, -6.0, 1.0], d2s),
            ),
            _ if i + 2 == len => {
                let b = len - 6;
                let idx = [b, b + 1, b + 2, b + 3, b + 4, b + 5];
                (
                    comb(idx, [0.0, -1.0, 6.0, -18.0, 10.0, 3.0], d1s),
                    comb(idx, [1.0, -6.0, 14.0, -4.0, -15.0, 10.0], d2s),
                )
            }
            _ if i + 1 == len => {
                let b = len - 6;
                let idx = [b, b + 1, b + 2, b + 3, b + 4, b + 5];
                (
                    comb(idx, [0.0, 3.0, -16.0, 36.0, -48.0, 25.0], d1s),
                    comb(idx, [-10.0, 61.0, -156.0, 214.0, -154.0, 45.0], d2s),
                )
            }
            _ => {
                let idx = [i - 2, i - 1, i, i + 1, i + 2, i];
                (comb(idx, [1.0, -8.0, 0.0, 8.0, -1.0, 0.0], d1s), comb(idx, [-1.0, 16.0, -30.0, 16.0, -1.0, 0.0], d2s))
            }
        };
        d1.push(a1);
        d2.push(a2);
    }
    (d1, d2)
}

/// Recovers `(Q, h)` from main-equation solutions at every node of `grid`.
///
/// `Q` is averaged over the probes at which `phi(x)` is invertible. At `x = 0`,
/// where `phi(0) = A` is singular unless `A = I`, `Q` is extrapolated from the next
/// four nodes.
pub fn recover_potential(solutions: &[MainEquationSolution], grid: Grid, probes: &[SpectralPoint]) -> Result<Recovery> {
    if solutions.len() != grid.len() {
        return Err(Error::invalid(format!("{} solutions for {} grid nodes", solutions.len(), grid.len())));
    }
    if probes.is_empty() {
        return Err(Error::invalid("recovery needs at least one probe"));
    }
    if grid.len() < 7 {
        return Err(Error::invalid("recovery needs at least 7 grid nodes"));
    }
    for (i, s) in solutions.iter().enumerate() {
        if (s.x - grid.x(i)).abs() > 1e-12 * grid.x_max() {
            return Err(Error::invalid(format!("solution {i} is at x = {}, expected {}", s.x, grid.x(i))));
        }
    }
    let a = solutions[0].a().clone();
    let n = a.nrows();
    let h_step = grid.step();

    let mut sums = vec![linalg::zeros(n); grid.len()];
    let mut counts = vec![0usize; grid.len()];
    let mut per_probe = Vec::with_capacity(probes.len());
    let mut h_sum = linalg::zeros(n);
    for &probe in probes {
        let phi: Vec<CMat> = solutions.iter().map(|s| s.interpolate(probe)).collect();
        let psi: Vec<CMat> = phi.iter().zip(solutions).map(|(f, s)| f - model_phi(&a, s.x, probe)).collect();
        let (d1, d2) = derivatives(&psi, h_step);
        h_sum += &a * &d1[0] * &a;
        let mut q = vec![linalg::zeros(n); grid.len()];
        for i in 0..grid.len() {
            if linalg::cond(&phi[i]) > PHI_COND_LIMIT {
                continue;
            }
            let inv = linalg::inverse(&phi[i]).expect("invertible after the condition check");
            q[i] = (&d2[i] + &psi[i] * probe.lambda()) * inv;
            sums[i] += &q[i];
            counts[i] += 1;
        }
        per_probe.push(q);
    }

    let extrapolated_origin = counts[0] == 0;
    for i in 0..grid.len() {
        if counts[i] > 0 {
            sums[i] /= cr(counts[i] as f64);
        } else if i != 0 {
            return Err(Error::Reconstruction {
                x: grid.x(i),
                reason: "phi(x, lambda) is singular at every probe".into(),
            });
        }
    }
    if extrapolated_origin {
        sums[0] = extrapolate_origin(&sums);
        for q in per_probe.iter_mut() {
            q[0] = extrapolate_origin(q);
        }
    }

    let per_probe: Vec<PotentialGrid> =
        per_probe.into_iter().map(|q| PotentialGrid::new(grid, q)).collect::<Result<_>>()?;
    let mut probe_spread: f64 = 0.0;
    for i in 0..per_probe.len() {
        for j in i + 1..per_probe.len() {
            probe_spread = probe_spread.max(per_probe[i].l1_distance(&per_probe[j])?);
        }
    }
    let h = h_sum / cr(probes.len() as f64);
    Ok(Recovery { q: PotentialGrid::new(grid, sums)?, h, per_probe, probe_spread, extrapolated_origin })
}

/// Cubic extrapolation `Q_0 = 4 Q_1 - 6 Q_2 + 4 Q_3 - Q_4`.
fn extrapolate_origin(q: &[CMat]) -> CMat {
    &q[1] * cr(4.0) - &q[2] * cr(6.0) + &q[3] * cr(4.0) - &q[4]
}
