//! Reconstruction of `(Q, A, h)` from Weyl-matrix samples on a contour, using the
//! zero model problem `Q~ = 0`, `h~ = 0` with the recovered projector `A`.

mod extract;
mod lemma;
mod main_equation;
mod model;
mod pipeline;
mod recover;

pub use extract::{extract_a, ExtractedA, PROJECTOR_REJECT_BAND};
pub use lemma::{lemma42_residual, regular_product_integral, LemmaReport};
pub use main_equation::{solve_main_equation, MainEquationSolution, MAIN_COND_LIMIT};
pub use model::{kernel_rtilde, model_d, model_phi, model_weyl};
pub use pipeline::{
    default_probes, invert, l1_change_on, solve_on_grid, DiscretizationEstimate, InvertConfig, ReconstructionResult,
};
pub use recover::{recover_potential, Recovery};

use rayon::prelude::*;

use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::forward::{weyl_matrix, Problem};
use crate::linalg::CMat;
use crate::spectral::SpectralPoint;

/// Weyl-matrix samples at the contour nodes plus large-`|rho|` samples on the
/// imaginary axis used to recover `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylData {
    contour: Contour,
    m_samples: Vec<CMat>,
    tail: Vec<(SpectralPoint, CMat)>,
}

impl WeylData {
    pub fn new(contour: Contour, m_samples: Vec<CMat>, mut tail: Vec<(SpectralPoint, CMat)>) -> Result<Self> {
        if m_samples.len() != contour.len() {
            return Err(Error::invalid(format!(
                "{} Weyl samples for {} contour nodes",
                m_samples.len(),
                contour.len()
            )));
        }
        let n = m_samples.first().map(|m| m.nrows()).unwrap_or(0);
        if n == 0 {
            return Err(Error::invalid("Weyl data is empty"));
        }
        for m in m_samples.iter().chain(tail.iter().map(|(_, m)| m)) {
            crate::linalg::check_square(m, n, "Weyl sample")?;
        }
        tail.sort_by(|a, b| a.0.rho().norm().total_cmp(&b.0.rho().norm()));
        Ok(WeylData { contour, m_samples, tail })
    }

    /// Samples `M` of `problem` at every contour node and at the tail points.
    pub fn from_problem(problem: &Problem, contour: Contour, tail_points: &[SpectralPoint]) -> Result<Self> {
        let m_samples =
            contour.nodes().par_iter().map(|node| weyl_matrix(problem, node.point)).collect::<Result<Vec<_>>>()?;
        let tail =
            tail_points.par_iter().map(|&pt| weyl_matrix(problem, pt).map(|m| (pt, m))).collect::<Result<Vec<_>>>()?;
        WeylData::new(contour, m_samples, tail)
    }

    pub fn dim(&self) -> usize {
        self.m_samples[0].nrows()
    }

    pub fn contour(&self) -> &Contour {
        &self.contour
    }

    pub fn m_samples(&self) -> &[CMat] {
        &self.m_samples
    }

    pub fn tail(&self) -> &[(SpectralPoint, CMat)] {
        &self.tail
    }

    /// The same data on a sub-contour whose nodes are `index` into this one.
    pub fn restricted(&self, contour: Contour, index: &[usize]) -> Result<Self> {
        let m = index.iter().map(|&i| self.m_samples[i].clone()).collect();
        WeylData::new(contour, m, self.tail.clone())
    }
}

/// Default tail ray: `rho = i t` at `count` geometrically spaced `t` in `[50, 400]`.
pub fn default_tail_points(count: usize) -> Vec<SpectralPoint> {
    let count = count.max(3);
    (0..count)
        .map(|k| {
            let t = 50.0 * 8f64.powf(k as f64 / (count - 1) as f64);
            SpectralPoint::imaginary(t).expect("positive imaginary point")
        })
        .collect()
}
