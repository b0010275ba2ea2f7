//! Weyl matrix of the matrix Schrödinger operator `-Y'' + Q(x) Y = lambda Y` on the
//! half-line under the projector-form boundary condition
//! `A (Y'(0) - h Y(0)) - A_perp Y(0) = 0`, and reconstruction of `(Q, A, h)` from
//! Weyl-matrix samples on a contour.

pub mod boundary;
pub mod contour;
pub mod error;
pub mod forward;
pub mod inverse;
pub mod linalg;
pub mod spectral;

pub use error::{Error, Result};
pub use forward::Problem;
pub use linalg::CMat;
pub use spectral::{BoundaryCondition, Grid, MatrixWave, PotentialGrid, Sheet, SpectralPoint};
