//! Batch front end for the `mweyl` library: forward Weyl-matrix sampling,
//! reconstruction, round trips, Jost-zero scans and boundary-condition checks.

pub mod config;
pub mod files;

use std::path::{Path, PathBuf};
use std::time::Instant;

use mweyl::boundary::{check_selfadjoint_pair, null_space_mismatch, projector_condition_matrix, GeneralBoundaryPair};
use mweyl::forward::{scan_jost_zeros, Problem};
use mweyl::inverse::{invert, ReconstructionResult, WeylData};
use mweyl::linalg::{self, CMat};
use mweyl::BoundaryCondition;
use serde::Serialize;
use thiserror::Error;

pub use config::{BoundarySpec, ContourSpec, Mode, PotentialSpec, ProblemSpec, RunConfig};
pub use files::FileEntry;

use config::{matrix_spec, MatrixSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{stage} failed: {message}")]
    Numerical { stage: String, message: String },

    #[error("invalid data file: {0}")]
    Data(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    fn numerical(stage: &str, err: mweyl::Error) -> Self {
        let stage = err.stage().unwrap_or(stage).to_string();
        CliError::Numerical { stage, message: err.to_string() }
    }

    /// 2 for configuration errors, 3 for numerical failures, 4 for I/O and data files.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Data(_) | CliError::Io { .. } => 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ForwardSummary {
    pub contour_nodes: usize,
    pub tail_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscretizationSummary {
    pub x_grid: f64,
    pub contour_nodes: f64,
    pub radius: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InversionSummary {
    pub a: MatrixSpec,
    pub h: MatrixSpec,
    pub extraction_residual: f64,
    pub projection_distance: f64,
    pub max_cond: f64,
    pub main_residual: f64,
    pub offgrid_residual: f64,
    pub weighted_max: f64,
    pub probe_spread: f64,
    pub extrapolated_origin: bool,
    pub discretization: Option<DiscretizationSummary>,
    pub zeros_outside: Option<usize>,
}

impl InversionSummary {
    fn new(r: &ReconstructionResult) -> Self {
        InversionSummary {
            a: matrix_spec(&r.a),
            h: matrix_spec(&r.h),
            extraction_residual: r.extraction.residual,
            projection_distance: r.extraction.projection_distance,
            max_cond: r.max_cond,
            main_residual: r.main_residual,
            offgrid_residual: r.offgrid_residual,
            weighted_max: r.weighted_max,
            probe_spread: r.probe_spread,
            extrapolated_origin: r.extrapolated_origin,
            discretization: r.discretization.map(|d| DiscretizationSummary {
                x_grid: d.x_grid,
                contour_nodes: d.contour_nodes,
                radius: d.radius,
                total: d.total(),
            }),
            zeros_outside: r.zeros_outside,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorNorms {
    /// `|Q_rec - Q|_L1` on the reconstruction grid.
    pub q_l1: f64,
    /// `q_l1 / |Q|_L1`, absent for the zero potential.
    pub q_relative_l1: Option<f64>,
    pub h: f64,
    pub a: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroSummary {
    pub count: usize,
    pub suggested_r0: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundarySummary {
    pub a: MatrixSpec,
    pub h: MatrixSpec,
    pub idempotent: f64,
    pub hermitian: f64,
    pub compression: f64,
    /// Null-space mismatch against the unitary form, for unitary input.
    pub unitary_mismatch: Option<f64>,
    pub selfadjoint: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub mode: Mode,
    pub inputs: RunConfig,
    pub timings: Vec<StageTiming>,
    pub forward: Option<ForwardSummary>,
    pub inversion: Option<InversionSummary>,
    pub errors: Option<ErrorNorms>,
    pub zeros: Option<ZeroSummary>,
    pub boundary: Option<BoundarySummary>,
    /// Every data file written, with a SHA-256 of its contents.
    pub files: Vec<FileEntry>,
}

struct Runner<'a> {
    config: &'a RunConfig,
    out: &'a Path,
    report: RunReport,
}

impl<'a> Runner<'a> {
    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T, CliError>) -> Result<T, CliError> {
        log::info!("{stage}: start");
        let start = Instant::now();
        let out = f();
        let seconds = start.elapsed().as_secs_f64();
        log::info!("{stage}: {seconds:.2} s");
        self.report.timings.push(StageTiming { stage: stage.to_string(), seconds });
        out
    }

    fn write(&mut self, name: &str, data: Vec<u8>) -> Result<(), CliError> {
        let entry = files::write_file(&self.out.join(name), &data)?;
        log::info!("wrote {} ({} bytes)", entry.path.display(), entry.bytes);
        self.report.files.push(entry);
        Ok(())
    }

    fn forward(&mut self, problem: &Problem) -> Result<WeylData, CliError> {
        let contour = self.config.contour.build()?;
        let tail = self.config.contour.tail()?;
        let weyl = self.timed("forward", || {
            WeylData::from_problem(problem, contour, &tail).map_err(|e| CliError::numerical("forward", e))
        })?;
        self.report.forward =
            Some(ForwardSummary { contour_nodes: weyl.contour().len(), tail_points: weyl.tail().len() });
        self.write("weyl.csv", files::weyl_csv(&weyl)?)?;
        Ok(weyl)
    }

    fn invert(&mut self, weyl: &WeylData) -> Result<ReconstructionResult, CliError> {
        let cfg = self.config.invert_config()?;
        let result = self.timed("invert", || invert(weyl, &cfg).map_err(|e| CliError::numerical("invert", e)))?;
        self.report.inversion = Some(InversionSummary::new(&result));
        self.write("potential.csv", files::potential_csv(&result.q)?)?;
        Ok(result)
    }

    fn errors(&mut self, problem: &Problem, result: &ReconstructionResult) -> Result<(), CliError> {
        let truth = problem.potential().resample(result.q.grid());
        let q_l1 = result.q.l1_distance(&truth).map_err(|e| CliError::numerical("error_norms", e))?;
        let norm = truth.l1_norm();
        self.report.errors = Some(ErrorNorms {
            q_l1,
            q_relative_l1: (norm > 0.0).then(|| q_l1 / norm),
            h: linalg::dist(&result.h, problem.bc().h()),
            a: linalg::dist(&result.a, problem.bc().a()),
        });
        Ok(())
    }

    fn zeros(&mut self, problem: &Problem) -> Result<(), CliError> {
        let spec = &self.config.zeros;
        let (radius, density) = (spec.radius, spec.density);
        let scan = self.timed("zeros", || Ok(scan_jost_zeros(problem, radius, density)))?;
        self.report.zeros = Some(ZeroSummary { count: scan.zeros.len(), suggested_r0: scan.r0 });
        self.write("zeros.csv", files::zeros_csv(&scan.zeros)?)
    }

    fn validate_bc(&mut self) -> Result<(), CliError> {
        let spec = self
            .config
            .problem
            .as_ref()
            .map(|p| &p.boundary)
            .ok_or_else(|| CliError::Config("no boundary given".into()))?;
        let bc: BoundaryCondition = spec.build()?;
        let res = bc.residuals();
        let (unitary_mismatch, selfadjoint) = match spec {
            BoundarySpec::Unitary { u } => {
                let u: CMat = CMat::from_fn(u.len(), u.len(), |i, j| u[i][j].value());
                let pair = GeneralBoundaryPair::from_unitary(&u);
                let sa = check_selfadjoint_pair(&pair);
                let mismatch = null_space_mismatch(&pair.condition_matrix(), &projector_condition_matrix(&bc));
                (Some(mismatch), Some(sa.cond_a3 && sa.cond_a4))
            }
            _ => (None, None),
        };
        let summary = BoundarySummary {
            a: matrix_spec(bc.a()),
            h: matrix_spec(bc.h()),
            idempotent: res.idempotent,
            hermitian: res.hermitian,
            compression: res.compression,
            unitary_mismatch,
            selfadjoint,
        };
        let json = serde_json::to_vec_pretty(&summary).expect("serializable");
        self.report.boundary = Some(summary);
        self.write("boundary.json", json)
    }
}

/// Executes the configured mode, writing data files and `report.json` under `out`.
pub fn run(config: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    config.validate()?;
    let mode = config.mode()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let report = RunReport {
        mode,
        inputs: config.clone(),
        timings: Vec::new(),
        forward: None,
        inversion: None,
        errors: None,
        zeros: None,
        boundary: None,
        files: Vec::new(),
    };
    let mut runner = Runner { config, out, report };
    match mode {
        Mode::Forward => {
            let problem = config.problem()?;
            runner.forward(&problem)?;
        }
        Mode::Invert => {
            let path = config.weyl_file.clone().ok_or_else(|| CliError::Config("no weyl_file given".into()))?;
            let weyl = files::read_weyl_csv(&path, config.contour.build()?)?;
            runner.invert(&weyl)?;
        }
        Mode::Roundtrip => {
            let problem = config.problem()?;
            let weyl = runner.forward(&problem)?;
            let result = runner.invert(&weyl)?;
            runner.errors(&problem, &result)?;
        }
        Mode::Zeros => {
            let problem = config.problem()?;
            runner.zeros(&problem)?;
        }
        Mode::ValidateBc => runner.validate_bc()?,
    }
    let report = runner.report;
    let path = out.join("report.json");
    let json = serde_json::to_vec_pretty(&report).expect("serializable");
    std::fs::write(&path, json).map_err(|e| CliError::io(&path, e))?;
    Ok(report)
}
