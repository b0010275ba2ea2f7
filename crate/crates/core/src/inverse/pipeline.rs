//! End-to-end reconstruction: recover `A`, solve the main equation on an x-grid,
//! extract `Q` and `h`, and estimate the discretisation error.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{scan_jost_zeros, Problem};
use crate::linalg::CMat;
use crate::spectral::{BoundaryCondition, Grid, PotentialGrid, SpectralPoint};

use super::{extract_a, recover_potential, solve_main_equation, ExtractedA, MainEquationSolution, Recovery, WeylData};

#[derive(Debug, Clone)]
pub struct InvertConfig {
    /// Grid on which `Q` is reconstructed.
    pub x_grid: Grid,
    /// Values of `lambda` (as spectral points) at which `phi` is differentiated.
    pub probes: Vec<SpectralPoint>,
    /// Re-run at half resolution in each knob to estimate the discretisation error.
    pub estimate_discretization: bool,
    /// Scan the recovered problem for Jost zeros outside the contour circle.
    pub check_zeros: bool,
}

impl InvertConfig {
    pub fn new(x_grid: Grid) -> Self {
        InvertConfig { x_grid, probes: default_probes(), estimate_discretization: false, check_zeros: false }
    }
}

/// `lambda = -1` and `lambda = -4`.
pub fn default_probes() -> Vec<SpectralPoint> {
    [1.0, 2.0].iter().map(|&t| SpectralPoint::imaginary(t).expect("positive")).collect()
}

/// L1 changes of the recovered `Q` when one knob is halved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationEstimate {
    /// Half as many x-grid panels.
    pub x_grid: f64,
    /// Every other contour node.
    pub contour_nodes: f64,
    /// Cut truncated at `R / 2`.
    pub radius: f64,
}

impl DiscretizationEstimate {
    pub fn total(&self) -> f64 {
        self.x_grid + self.contour_nodes + self.radius
    }
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub a: CMat,
    pub h: CMat,
    pub q: PotentialGrid,
    pub extraction: ExtractedA,
    /// Largest Nystrom condition estimate over the x-grid.
    pub max_cond: f64,
    /// Largest discrete residual of the main equation over x and the nodes.
    pub main_residual: f64,
    /// Largest off-grid residual of the main equation.
    pub offgrid_residual: f64,
    /// Largest weighted norm `|phi(x, mu)(A + i rho A_perp)|` on the contour.
    pub weighted_max: f64,
    /// Largest L1 distance between potentials recovered from different probes.
    pub probe_spread: f64,
    pub extrapolated_origin: bool,
    pub discretization: Option<DiscretizationEstimate>,
    /// Jost zeros of the recovered problem lying outside the contour circle.
    pub zeros_outside: Option<usize>,
}

/// Solves the main equation at every node of `grid`.
pub fn solve_on_grid(weyl: &WeylData, a: &CMat, grid: Grid) -> Result<Vec<MainEquationSolution>> {
    (0..grid.len()).into_par_iter().map(|i| solve_main_equation(weyl, a, grid.x(i))).collect()
}

fn reconstruct(weyl: &WeylData, a: &CMat, config: &InvertConfig) -> Result<(Recovery, Vec<MainEquationSolution>)> {
    let solutions = solve_on_grid(weyl, a, config.x_grid).map_err(|e| e.in_stage("main_equation"))?;
    let rec =
        recover_potential(&solutions, config.x_grid, &config.probes).map_err(|e| e.in_stage("recover_potential"))?;
    Ok((rec, solutions))
}

pub fn invert(weyl: &WeylData, config: &InvertConfig) -> Result<ReconstructionResult> {
    let extraction = extract_a(weyl.tail()).map_err(|e| e.in_stage("extract_A"))?;
    let a = extraction.a.clone();
    let (rec, solutions) = reconstruct(weyl, &a, config)?;

    let fold = |f: fn(&MainEquationSolution) -> f64| solutions.iter().map(f).fold(0.0, f64::max);
    let max_cond = fold(|s| s.cond_estimate);
    let main_residual = fold(|s| s.node_residual);
    let offgrid_residual = fold(|s| s.offgrid_residual);
    let weighted_max = fold(|s| s.weighted_max);
    drop(solutions);

    let discretization = if config.estimate_discretization {
        Some(estimate(weyl, &a, config, &rec.q).map_err(|e| e.in_stage("discretization_estimate"))?)
    } else {
        None
    };

    let h = &a * &rec.h * &a;
    let zeros_outside = if config.check_zeros {
        let bc = BoundaryCondition::with_tolerance(a.clone(), h.clone(), 1e-8).map_err(|e| e.in_stage("zero_check"))?;
        let problem = Problem::new(rec.q.clone(), bc).map_err(|e| e.in_stage("zero_check"))?;
        let r0 = weyl.contour().r0();
        let scan = scan_jost_zeros(&problem, weyl.contour().r_max().sqrt(), 16);
        Some(scan.zeros.iter().filter(|z| z.lambda().norm() >= r0).count())
    } else {
        None
    };

    Ok(ReconstructionResult {
        a,
        h,
        q: rec.q,
        extraction,
        max_cond,
        main_residual,
        offgrid_residual,
        weighted_max,
        probe_spread: rec.probe_spread,
        extrapolated_origin: rec.extrapolated_origin,
        discretization,
        zeros_outside,
    })
}

fn estimate(weyl: &WeylData, a: &CMat, config: &InvertConfig, q: &PotentialGrid) -> Result<DiscretizationEstimate> {
    let grid = config.x_grid;
    let coarse_grid =
        Grid::new(grid.x_max(), grid.len().div_ceil(2)).map_err(|_| Error::invalid("x-grid too small to halve"))?;
    let coarse_cfg = InvertConfig { x_grid: coarse_grid, ..config.clone() };
    let (rec_x, _) = reconstruct(weyl, a, &coarse_cfg)?;
    let x_change = l1_change_on(&rec_x.q, q)?;

    let (contour, index) = weyl.contour().coarsened()?;
    let (rec_k, _) = reconstruct(&weyl.restricted(contour, &index)?, a, config)?;
    let k_change = q.l1_distance(&rec_k.q)?;

    let (contour, index) = weyl.contour().truncated(0.5 * weyl.contour().r_max())?;
    let (rec_r, _) = reconstruct(&weyl.restricted(contour, &index)?, a, config)?;
    let r_change = q.l1_distance(&rec_r.q)?;

    Ok(DiscretizationEstimate { x_grid: x_change, contour_nodes: k_change, radius: r_change })
}

/// L1 distance between `coarse` and `fine` on the nodes of `coarse`, which must be
/// a sub-grid of `fine`.
pub fn l1_change_on(coarse: &PotentialGrid, fine: &PotentialGrid) -> Result<f64> {
    let cg = coarse.grid();
    let fg = fine.grid();
    let ratio = (fg.len() - 1) / (cg.len() - 1);
    if ratio * (cg.len() - 1) != fg.len() - 1 || (cg.x_max() - fg.x_max()).abs() > 1e-12 {
        return Err(Error::invalid("grids are not nested"));
    }
    let values = (0..cg.len()).map(|i| fine.at(i * ratio).clone()).collect();
    coarse.l1_distance(&PotentialGrid::new(cg, values)?)
}
