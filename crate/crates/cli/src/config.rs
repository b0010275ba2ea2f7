//! JSON run configuration.
//!
//! Complex numbers are `[re, im]` pairs (a bare number is read as real) and
//! matrices are row-major nested arrays.

use std::path::{Path, PathBuf};

use mweyl::boundary::{delta_condition, from_unitary};
use mweyl::contour::{build_contour, Contour};
use mweyl::inverse::{default_probes, default_tail_points, InvertConfig};
use mweyl::linalg::{self, c, cr, CMat};
use mweyl::{BoundaryCondition, Grid, PotentialGrid, Problem, SpectralPoint};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Forward,
    Invert,
    Roundtrip,
    Zeros,
    ValidateBc,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Forward => "forward",
            Mode::Invert => "invert",
            Mode::Roundtrip => "roundtrip",
            Mode::Zeros => "zeros",
            Mode::ValidateBc => "validate-bc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Pair([f64; 2]),
    Real(f64),
}

impl Number {
    pub fn value(&self) -> Complex64 {
        match *self {
            Number::Pair([re, im]) => c(re, im),
            Number::Real(re) => cr(re),
        }
    }
}

pub type MatrixSpec = Vec<Vec<Number>>;

fn to_matrix(rows: &MatrixSpec, what: &str) -> Result<CMat, CliError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("{what} must be a non-empty square matrix")));
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j].value()))
}

/// Row-major `[re, im]` pairs.
pub fn matrix_spec(m: &CMat) -> MatrixSpec {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| Number::Pair([m[(i, j)].re, m[(i, j)].im])).collect()).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `Q = diag(heights)` on `[0, width]`.
    Box { heights: Vec<f64>, width: f64 },
    /// `Q = amplitude exp(-(x - center)^2 / (2 width^2))` on `[0, cutoff]`.
    Gaussian { amplitude: MatrixSpec, center: f64, width: f64, cutoff: f64 },
    /// Samples on a uniform grid over `[0, x_max]`, one matrix per node.
    Table { x_max: f64, values: Vec<MatrixSpec> },
    /// Seeded random `n x n` coefficient matrix times `sin^2(pi x / x_max)`.
    Random { dim: usize, amplitude: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Projector { a: MatrixSpec, h: MatrixSpec },
    Unitary { u: MatrixSpec },
    Delta { n: usize, a: Number },
}

impl BoundarySpec {
    pub fn build(&self) -> Result<BoundaryCondition, CliError> {
        let bc = match self {
            BoundarySpec::Projector { a, h } => {
                BoundaryCondition::with_tolerance(to_matrix(a, "boundary.a")?, to_matrix(h, "boundary.h")?, 1e-10)
            }
            BoundarySpec::Unitary { u } => from_unitary(&to_matrix(u, "boundary.u")?),
            BoundarySpec::Delta { n, a } => delta_condition(*n, a.value()),
        };
        bc.map_err(|e| CliError::Config(format!("boundary: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub potential: PotentialSpec,
    pub boundary: BoundarySpec,
    /// Support end of the forward grid.
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    /// Node count of the forward grid (odd).
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

fn default_x_max() -> f64 {
    1.0
}

fn default_nodes() -> usize {
    1001
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSpec {
    pub r0: f64,
    pub r_max: f64,
    #[serde(default)]
    pub delta: Option<f64>,
    pub n_circle: usize,
    pub n_cut: usize,
    #[serde(default = "default_tail")]
    pub tail_points: usize,
}

fn default_tail() -> usize {
    8
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec { r0: 2.0, r_max: 200.0, delta: None, n_circle: 34, n_cut: 143, tail_points: default_tail() }
    }
}

impl ContourSpec {
    /// `delta` defaults to `1e-3 r0`.
    pub fn build(&self) -> Result<Contour, CliError> {
        let delta = self.delta.unwrap_or(1e-3 * self.r0);
        build_contour(self.r0, self.r_max, delta, self.n_circle, self.n_cut)
            .map_err(|e| CliError::Config(format!("contour: {e}")))
    }

    pub fn tail(&self) -> Result<Vec<SpectralPoint>, CliError> {
        if self.tail_points < 3 {
            return Err(CliError::Config("contour.tail_points must be at least 3".into()));
        }
        Ok(default_tail_points(self.tail_points))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XGridSpec {
    pub x_max: f64,
    pub panels: usize,
}

impl Default for XGridSpec {
    fn default() -> Self {
        XGridSpec { x_max: 1.0, panels: 200 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertSpec {
    /// Probe values of `rho`; default `i` and `2i`.
    #[serde(default)]
    pub probes: Option<Vec<Number>>,
    #[serde(default)]
    pub estimate_discretization: bool,
    #[serde(default)]
    pub check_zeros: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroSpec {
    /// Scan radius in `|rho|`.
    pub radius: f64,
    pub density: usize,
}

impl Default for ZeroSpec {
    fn default() -> Self {
        ZeroSpec { radius: 10.0, density: 16 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub problem: Option<ProblemSpec>,
    #[serde(default)]
    pub contour: ContourSpec,
    #[serde(default)]
    pub x_grid: XGridSpec,
    #[serde(default)]
    pub invert: InvertSpec,
    #[serde(default)]
    pub zeros: ZeroSpec,
    /// Weyl sample file read by `invert`; relative paths resolve against the
    /// config file's directory.
    #[serde(default)]
    pub weyl_file: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        if let (Some(file), Some(dir)) = (cfg.weyl_file.as_mut(), path.parent()) {
            if file.is_relative() {
                *file = dir.join(&*file);
            }
        }
        Ok(cfg)
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        self.mode.ok_or_else(|| CliError::Config("no mode given".into()))
    }

    /// Checks that the fields the mode needs are present and in range.
    pub fn validate(&self) -> Result<(), CliError> {
        let mode = self.mode()?;
        let needs_problem = matches!(mode, Mode::Forward | Mode::Roundtrip | Mode::Zeros | Mode::ValidateBc);
        if needs_problem && self.problem.is_none() {
            return Err(CliError::Config(format!("mode {} needs a problem", mode.name())));
        }
        if mode == Mode::Invert && self.weyl_file.is_none() {
            return Err(CliError::Config("mode invert needs weyl_file".into()));
        }
        if let Some(p) = &self.problem {
            positive("problem.x_max", p.x_max)?;
        }
        if matches!(mode, Mode::Invert | Mode::Roundtrip) {
            positive("x_grid.x_max", self.x_grid.x_max)?;
            if self.x_grid.panels < 4 || self.x_grid.panels % 2 == 1 {
                return Err(CliError::Config("x_grid.panels must be even and at least 4".into()));
            }
        }
        if mode == Mode::Zeros {
            positive("zeros.radius", self.zeros.radius)?;
            if self.zeros.density == 0 {
                return Err(CliError::Config("zeros.density must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem, CliError> {
        let spec = self.problem.as_ref().ok_or_else(|| CliError::Config("no problem given".into()))?;
        let bc = spec.boundary.build()?;
        let q = self.potential(spec, bc.dim())?;
        Problem::new(q, bc).map_err(|e| CliError::Config(format!("problem: {e}")))
    }

    fn potential(&self, spec: &ProblemSpec, dim: usize) -> Result<PotentialGrid, CliError> {
        let grid = || Grid::new(spec.x_max, spec.nodes).map_err(|e| CliError::Config(format!("problem grid: {e}")));
        let q = match &spec.potential {
            PotentialSpec::Box { heights, width } => PotentialGrid::diagonal_box(heights, *width, grid()?),
            PotentialSpec::Gaussian { amplitude, center, width, cutoff } => {
                positive("potential.width", *width)?;
                let amp = to_matrix(amplitude, "potential.amplitude")?;
                PotentialGrid::from_fn(amp.nrows(), grid()?, |x| {
                    if x > *cutoff {
                        linalg::zeros(amp.nrows())
                    } else {
                        &amp * cr((-(x - center).powi(2) / (2.0 * width * width)).exp())
                    }
                })
            }
            PotentialSpec::Table { x_max, values } => {
                let g =
                    Grid::new(*x_max, values.len()).map_err(|e| CliError::Config(format!("potential table: {e}")))?;
                let mats = values.iter().map(|m| to_matrix(m, "potential.values")).collect::<Result<Vec<_>, _>>()?;
                PotentialGrid::new(g, mats)
            }
            PotentialSpec::Random { dim: n, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed.unwrap_or(0));
                let coef = CMat::from_fn(*n, *n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                let x_max = spec.x_max;
                PotentialGrid::from_fn(*n, grid()?, |x| {
                    let s = (std::f64::consts::PI * x / x_max).sin();
                    &coef * cr(amplitude * s * s)
                })
            }
        }
        .map_err(|e| CliError::Config(format!("potential: {e}")))?;
        if q.dim() != dim {
            return Err(CliError::Config(format!(
                "potential is {0}x{0} but the boundary condition is {1}x{1}",
                q.dim(),
                dim
            )));
        }
        Ok(q)
    }

    pub fn invert_config(&self) -> Result<InvertConfig, CliError> {
        let grid = Grid::new(self.x_grid.x_max, self.x_grid.panels + 1)
            .map_err(|e| CliError::Config(format!("x_grid: {e}")))?;
        let mut cfg = InvertConfig::new(grid);
        if let Some(probes) = &self.invert.probes {
            cfg.probes = probes
                .iter()
                .map(|p| SpectralPoint::new(p.value()).map_err(|e| CliError::Config(format!("invert.probes: {e}"))))
                .collect::<Result<_, _>>()?;
        } else {
            cfg.probes = default_probes();
        }
        cfg.estimate_discretization = self.invert.estimate_discretization;
        cfg.check_zeros = self.invert.check_zeros;
        Ok(cfg)
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}
