//! Solutions fixed by initial data at `x = 0`: `phi`, `S` and their adjoint
//! counterparts. Classical RK4 with step `2 dx` uses the potential samples at the
//! step ends and the midpoint node, so no interpolation of `Q` is needed; odd
//! nodes are filled by cubic Hermite interpolation from the even ones.

use num_complex::Complex64;

use crate::linalg::{cr, CMat};
use crate::spectral::{MatrixWave, PotentialGrid, SpectralPoint};

use super::jost::{apply_q, Side};

fn accel(side: Side, q: &CMat, lambda: Complex64, y: &CMat) -> CMat {
    apply_q(side, q, y) - y * lambda
}

/// Integrates `Y'' = (Q - lambda) Y` (or `Z'' = Z (Q - lambda)`) on the grid.
pub(crate) fn integrate(q: &PotentialGrid, pt: SpectralPoint, side: Side, y0: CMat, dy0: CMat) -> MatrixWave {
    let grid = q.grid();
    let len = grid.len();
    let dx = grid.step();
    let step = 2.0 * dx;
    let lambda = pt.lambda();

    let mut values: Vec<CMat> = vec![y0.clone(); len];
    let mut derivs: Vec<CMat> = vec![dy0.clone(); len];
    let (mut y, mut z) = (y0, dy0);

    for j in (0..len - 1).step_by(2) {
        let (q0, q1, q2) = (q.at(j), q.at(j + 1), q.at(j + 2));
        let k1y = z.clone();
        let k1z = accel(side, q0, lambda, &y);
        let y2 = &y + &k1y * cr(0.5 * step);
        let z2 = &z + &k1z * cr(0.5 * step);
        let k2y = z2.clone();
        let k2z = accel(side, q1, lambda, &y2);
        let y3 = &y + &k2y * cr(0.5 * step);
        let z3 = &z + &k2z * cr(0.5 * step);
        let k3y = z3.clone();
        let k3z = accel(side, q1, lambda, &y3);
        let y4 = &y + &k3y * cr(step);
        let z4 = &z + &k3z * cr(step);
        let k4y = z4;
        let k4z = accel(side, q2, lambda, &y4);

        let s6 = cr(step / 6.0);
        y += (&k1y + &k2y * cr(2.0) + &k3y * cr(2.0) + &k4y) * s6;
        z += (&k1z + &k2z * cr(2.0) + &k3z * cr(2.0) + &k4z) * s6;
        values[j + 2] = y.clone();
        derivs[j + 2] = z.clone();
    }

    // Hermite midpoint values from (y, y') and (y', y'') at the even nodes.
    for j in (0..len - 1).step_by(2) {
        let (ya, yb) = (&values[j], &values[j + 2]);
        let (za, zb) = (&derivs[j], &derivs[j + 2]);
        let aa = accel(side, q.at(j), lambda, ya);
        let ab = accel(side, q.at(j + 2), lambda, yb);
        let ym = (ya + yb) * cr(0.5) + (za - zb) * cr(step / 8.0);
        let zm = (za + zb) * cr(0.5) + (aa - ab) * cr(step / 8.0);
        values[j + 1] = ym;
        derivs[j + 1] = zm;
    }

    MatrixWave::new(grid, pt, values, derivs)
}
