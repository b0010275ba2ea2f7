use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The Jost-type Volterra solve produced non-finite values.
    #[error("jost solution did not converge (last residual {residual:.3e})")]
    Convergence { residual: f64 },

    /// The Jost matrix is numerically singular at `rho`; `lambda = rho^2` is close to a
    /// singularity of the Weyl matrix.
    #[error("rho = {rho} is too close to a Jost zero (cond J = {cond:.3e})")]
    PoleProximity { rho: Complex64, cond: f64 },

    #[error("main equation at x = {x} is ill-conditioned (cond ~ {cond:.3e}); refine the contour")]
    IllConditioned { x: f64, cond: f64 },

    #[error("data quality: {0}")]
    DataQuality(String),

    #[error("reconstruction failed at x = {x}: {reason}")]
    Reconstruction { x: f64, reason: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// Name of the outermost stage, if the error was labelled with one.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}
