use mweyl::forward::{
    jost_matrix, p_matrix_diagnostic, scan_jost_zeros, solve_adjoint, solve_jost, solve_phi, solve_regular,
    weyl_matrix, weyl_solution, Problem,
};
use mweyl::inverse::regular_product_integral;
use mweyl::linalg::{self, c, cr, CMat};
use mweyl::spectral::{apply_t, bracket};
use mweyl::{BoundaryCondition, Grid, PotentialGrid, SpectralPoint};
use num_complex::Complex64;

fn smooth_problem() -> Problem {
    let g = Grid::new(1.0, 1001).unwrap();
    let q = PotentialGrid::from_fn(2, g, |x| {
        let s = (std::f64::consts::PI * x).sin().powi(2);
        linalg::from_rows(2, &[cr(0.9), c(0.4, 0.2), c(-0.1, 0.3), cr(-0.5)]) * cr(s)
    })
    .unwrap();
    let a = linalg::diag(&[1.0, 0.0]);
    Problem::new(q, BoundaryCondition::new(a, linalg::diag(&[0.3, 0.0])).unwrap()).unwrap()
}

/// Classical RK4 for `y'' = (Q - lambda) y` from `x = 1` down to `0` with `Q` given
/// pointwise, starting from the plane wave.
fn rk4_backward(q: impl Fn(f64) -> Complex64, rho: Complex64, steps: usize) -> (Complex64, Complex64) {
    let lam = rho * rho;
    let i_rho = c(0.0, 1.0) * rho;
    let f = |x: f64, y: Complex64, dy: Complex64| (dy, (q(x) - lam) * y);
    let h = -1.0 / steps as f64;
    let (mut x, mut y, mut dy) = (1.0, i_rho.exp(), i_rho * i_rho.exp());
    for _ in 0..steps {
        let k1 = f(x, y, dy);
        let k2 = f(x + h / 2.0, y + k1.0 * (h / 2.0), dy + k1.1 * (h / 2.0));
        let k3 = f(x + h / 2.0, y + k2.0 * (h / 2.0), dy + k2.1 * (h / 2.0));
        let k4 = f(x + h, y + k3.0 * h, dy + k3.1 * h);
        y += (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0);
        dy += (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0);
        x += h;
    }
    (y, dy)
}

#[test]
fn jost_matches_rk4_oracle() {
    let g = Grid::new(1.0, 1001).unwrap();
    let bump = |x: f64| 0.8 * (std::f64::consts::PI * x).sin().powi(2);
    let q = PotentialGrid::from_fn(1, g, |x| linalg::identity(1) * cr(bump(x))).unwrap();
    for rho in [c(0.0, 2.0), c(1.5, 0.3), c(4.0, 0.0)] {
        let e = solve_jost(&q, SpectralPoint::new(rho).unwrap()).unwrap();
        let (y, dy) = rk4_backward(|x| cr(bump(x)), rho, 20_000);
        assert!((e.value(0)[(0, 0)] - y).norm() < 1e-8, "rho {rho}");
        assert!((e.deriv(0)[(0, 0)] - dy).norm() < 1e-8, "rho {rho}");
    }
}

fn closed_form_error(nodes: usize) -> f64 {
    let g = Grid::new(1.0, nodes).unwrap();
    let a = linalg::diag(&[1.0, 0.0]);
    let h = linalg::diag(&[0.7, 0.0]);
    let bc = BoundaryCondition::new(a.clone(), h.clone()).unwrap();
    let ap = bc.a_perp();
    let problem = Problem::new(PotentialGrid::zero(2, g), bc).unwrap();
    let pt = SpectralPoint::new(c(1.7, 0.4)).unwrap();
    let rho = pt.rho();
    let (phi, s) = solve_regular(&problem, pt);
    let mut worst: f64 = 0.0;
    for i in 0..g.len() {
        let x = g.x(i);
        let (cs, sn) = ((rho * x).cos(), (rho * x).sin() / rho);
        let phi_exact = &a * cs + (&ap + &h) * sn;
        let s_exact = -&ap * cs + &a * sn;
        worst = worst.max(linalg::dist(phi.value(i), &phi_exact)).max(linalg::dist(s.value(i), &s_exact));
    }
    worst
}

#[test]
fn zero_potential_regular_solutions_are_closed_form() {
    let coarse = closed_form_error(201);
    let fine = closed_form_error(401);
    assert!(coarse < 1e-8, "{coarse:e}");
    assert!(coarse / fine > 12.0, "{coarse:e} -> {fine:e}");
}

#[test]
fn weyl_solution_satisfies_boundary_condition_and_matches_m() {
    let problem = smooth_problem();
    let pt = SpectralPoint::new(c(2.0, 1.0)).unwrap();
    let w = weyl_solution(&problem, pt).unwrap();
    let t = apply_t(problem.bc(), w.value(0), w.deriv(0)).unwrap();
    assert!(linalg::dist(&t, &linalg::identity(2)) < 1e-12);
    let bc = problem.bc();
    let m = bc.a() * w.value(0) + bc.a_perp() * w.deriv(0);
    assert!(linalg::dist(&m, &weyl_matrix(&problem, pt).unwrap()) < 1e-12);
}

#[test]
fn weyl_solution_is_combination_of_regular_solutions() {
    // Phi = S + phi M
    let problem = smooth_problem();
    let pt = SpectralPoint::new(c(-1.2, 0.8)).unwrap();
    let (phi, s) = solve_regular(&problem, pt);
    let w = weyl_solution(&problem, pt).unwrap();
    let m = weyl_matrix(&problem, pt).unwrap();
    for i in [0, 250, 500, 1000] {
        let comb = s.value(i) + phi.value(i) * &m;
        assert!(linalg::dist(&comb, w.value(i)) < 1e-8 * (1.0 + linalg::norm(w.value(i))), "node {i}");
    }
}

#[test]
fn same_point_bracket_is_constant() {
    let problem = smooth_problem();
    let pt = SpectralPoint::new(c(0.9, 0.6)).unwrap();
    let phi = solve_phi(&problem, pt);
    let (phi_star, _, _) = solve_adjoint(&problem, pt).unwrap();
    for i in [0, 300, 700, 1000] {
        let b = bracket(phi_star.value(i), phi_star.deriv(i), phi.value(i), phi.deriv(i)).unwrap();
        assert!(linalg::norm(&b) < 1e-9, "node {i}: {}", linalg::norm(&b));
    }
}

#[test]
fn bracket_derivative_gives_product_integral() {
    // <phi*(mu), phi(lambda)>(x) = (lambda - mu) int_0^x phi*(mu) phi(lambda)
    let problem = smooth_problem();
    let lam = SpectralPoint::new(c(1.1, 0.5)).unwrap();
    let mu = SpectralPoint::new(c(2.3, 0.2)).unwrap();
    let phi = solve_phi(&problem, lam);
    let (phi_star, _, _) = solve_adjoint(&problem, mu).unwrap();
    let x = 0.6;
    let i = problem.potential().grid().index_of(x).unwrap();
    let b = bracket(phi_star.value(i), phi_star.deriv(i), phi.value(i), phi.deriv(i)).unwrap();
    let d = regular_product_integral(&problem, x, lam, mu).unwrap();
    assert!(linalg::dist(&b, &(d * (lam.lambda() - mu.lambda()))) < 1e-9);
}

#[test]
fn transfer_matrix_of_problem_against_itself_is_identity() {
    let problem = smooth_problem();
    let pt = SpectralPoint::new(c(3.0, 1.0)).unwrap();
    let p = p_matrix_diagnostic(&problem, &problem, pt, 0.5).unwrap();
    assert!(linalg::dist(&p.p11, &linalg::identity(2)) < 1e-8);
    assert!(linalg::norm(&p.p12) < 1e-8);
    assert!(linalg::dist(&p.p22, &linalg::identity(2)) < 1e-8);
}

#[test]
fn p_matrix_rejects_different_projectors() {
    let problem = smooth_problem();
    let g = problem.potential().grid();
    let model = Problem::new(PotentialGrid::zero(2, g), BoundaryCondition::neumann(2)).unwrap();
    let pt = SpectralPoint::new(c(3.0, 1.0)).unwrap();
    assert!(p_matrix_diagnostic(&problem, &model, pt, 0.5).is_err());
}

/// `k cot k = -kappa` with `k^2 + kappa^2 = v`, by bisection on `(pi/2, pi)`.
fn square_well_dirichlet_kappa(v: f64) -> f64 {
    let f = |k: f64| k / k.tan() + (v - k * k).sqrt();
    let (mut lo, mut hi) = (std::f64::consts::FRAC_PI_2 + 1e-9, std::f64::consts::PI.min(v.sqrt()) - 1e-9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    (v - k * k).sqrt()
}

#[test]
fn zero_scan_finds_square_well_bound_state() {
    let v = 6.0;
    let g = Grid::new(1.0, 1001).unwrap();
    let q = PotentialGrid::diagonal_box(&[-v], 1.0, g).unwrap();
    let problem = Problem::new(q, BoundaryCondition::dirichlet(1)).unwrap();
    let kappa = square_well_dirichlet_kappa(v);
    let scan = scan_jost_zeros(&problem, 4.0, 24);
    assert_eq!(scan.zeros.len(), 1, "{:?}", scan.zeros);
    let z = scan.zeros[0].rho();
    assert!((z - c(0.0, kappa)).norm() < 1e-6, "found {z}, expected i {kappa}");
    assert!(scan.r0 > kappa * kappa);
    let j = jost_matrix(&problem, scan.zeros[0]).unwrap();
    assert!(j.determinant().norm() < 1e-6);
}

#[test]
fn zero_scan_on_positive_potential_is_empty() {
    let g = Grid::new(1.0, 401).unwrap();
    let q = PotentialGrid::diagonal_box(&[0.3], 1.0, g).unwrap();
    let problem = Problem::new(q, BoundaryCondition::neumann(1)).unwrap();
    let scan = scan_jost_zeros(&problem, 5.0, 16);
    assert!(scan.zeros.is_empty(), "{:?}", scan.zeros);
}

#[test]
fn weyl_matrix_errors_at_a_jost_zero() {
    let v = 6.0;
    let g = Grid::new(1.0, 1001).unwrap();
    let q = PotentialGrid::diagonal_box(&[-v, 0.3], 1.0, g).unwrap();
    let problem = Problem::new(q, BoundaryCondition::dirichlet(2)).unwrap();
    let scan = scan_jost_zeros(&problem, 4.0, 24);
    let res = weyl_matrix(&problem, scan.zeros[0]);
    assert!(matches!(res, Err(mweyl::Error::PoleProximity { .. })), "{res:?}");
}

#[test]
fn identity_potential_shifts_spectral_parameter() {
    // Q = c I on [0, X] with X large acts like lambda - c inside the support
    let g = Grid::new(1.0, 801).unwrap();
    let shift = 0.5;
    let q = PotentialGrid::from_fn(1, g, |_| CMat::from_element(1, 1, cr(shift))).unwrap();
    let problem = Problem::new(q, BoundaryCondition::neumann(1)).unwrap();
    let pt = SpectralPoint::new(c(1.4, 0.7)).unwrap();
    let k = (pt.lambda() - shift).sqrt();
    let phi = solve_phi(&problem, pt);
    let x = 0.75;
    let i = g.index_of(x).unwrap();
    assert!((phi.value(i)[(0, 0)] - (k * x).cos()).norm() < 1e-9);
}
