//! Domain types and the boundary functionals shared by every solver.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, check_square, cr, CMat, I};

/// Tolerance for algebraic invariants of exactly specified inputs.
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// Which side of the positive real `lambda` axis a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sheet {
    /// `rho > 0` on the positive axis; limit from `Im lambda > 0`.
    Upper,
    /// `rho < 0` on the positive axis; limit from `Im lambda < 0`.
    Lower,
}

/// A point of the closed upper half `rho`-plane with the origin removed.
///
/// `lambda` is always derived as `rho^2`; carrying `rho` resolves the two sides of
/// the cut along the positive `lambda` axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    rho: Complex64,
}

impl SpectralPoint {
    pub fn new(rho: Complex64) -> Result<Self> {
        if !(rho.re.is_finite() && rho.im.is_finite()) {
            return Err(Error::Domain(format!("rho = {rho} is not finite")));
        }
        if rho.im < 0.0 {
            return Err(Error::Domain(format!("rho = {rho} has negative imaginary part")));
        }
        if rho == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("rho = 0 is excluded".into()));
        }
        Ok(SpectralPoint { rho })
    }

    /// Point on the positive imaginary axis, `rho = i t`.
    pub fn imaginary(t: f64) -> Result<Self> {
        Self::new(Complex64::new(0.0, t))
    }

    #[inline]
    pub fn rho(&self) -> Complex64 {
        self.rho
    }

    #[inline]
    pub fn lambda(&self) -> Complex64 {
        self.rho * self.rho
    }

    /// `i rho`
    #[inline]
    pub fn i_rho(&self) -> Complex64 {
        I * self.rho
    }
}

/// Maps `lambda` to the `rho` with `Im rho >= 0`. The sheet only matters on the
/// positive real axis.
pub fn lambda_to_point(lambda: Complex64, sheet: Sheet) -> Result<SpectralPoint> {
    if lambda.norm() == 0.0 {
        return Err(Error::Domain("lambda = 0 has no spectral point".into()));
    }
    if lambda.im == 0.0 {
        let root = lambda.re.abs().sqrt();
        let rho = if lambda.re > 0.0 {
            match sheet {
                Sheet::Upper => cr(root),
                Sheet::Lower => cr(-root),
            }
        } else {
            Complex64::new(0.0, root)
        };
        return SpectralPoint::new(rho);
    }
    let mut rho = lambda.sqrt();
    if rho.im < 0.0 {
        rho = -rho;
    }
    SpectralPoint::new(rho)
}

/// Projector-form boundary data `(A, h)`: `A` an orthogonal projector and
/// `h = A h A`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCondition {
    a: CMat,
    h: CMat,
}

impl BoundaryCondition {
    pub fn new(a: CMat, h: CMat) -> Result<Self> {
        Self::with_tolerance(a, h, ALGEBRAIC_TOL)
    }

    pub fn with_tolerance(a: CMat, h: CMat, tol: f64) -> Result<Self> {
        let n = a.nrows();
        check_square(&a, n, "A")?;
        check_square(&h, n, "h")?;
        if n == 0 {
            return Err(Error::invalid("boundary condition must have dimension >= 1"));
        }
        let bc = BoundaryCondition { a, h };
        let res = bc.residuals();
        if res.idempotent > tol || res.hermitian > tol || res.compression > tol {
            return Err(Error::invalid(format!(
                "not a projector-form condition: |A^2-A| = {:.2e}, |A*-A| = {:.2e}, |AhA-h| = {:.2e}",
                res.idempotent, res.hermitian, res.compression
            )));
        }
        Ok(bc)
    }

    /// Builds `(A, h)` without validation; intended for reporting residuals of
    /// candidate data.
    pub fn unchecked(a: CMat, h: CMat) -> Self {
        BoundaryCondition { a, h }
    }

    pub fn neumann(n: usize) -> Self {
        BoundaryCondition { a: linalg::identity(n), h: linalg::zeros(n) }
    }

    pub fn dirichlet(n: usize) -> Self {
        BoundaryCondition { a: linalg::zeros(n), h: linalg::zeros(n) }
    }

    /// Robin condition `Y'(0) = h Y(0)`.
    pub fn robin(h: CMat) -> Result<Self> {
        let n = h.nrows();
        Self::new(linalg::identity(n), h)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn h(&self) -> &CMat {
        &self.h
    }

    pub fn a_perp(&self) -> CMat {
        linalg::identity(self.dim()) - &self.a
    }

    pub fn residuals(&self) -> ProjectorResiduals {
        let a = &self.a;
        ProjectorResiduals {
            idempotent: linalg::dist(&(a * a), a),
            hermitian: linalg::dist(&a.adjoint(), a),
            compression: linalg::dist(&(a * &self.h * a), &self.h),
        }
    }
}

/// Residuals of the three defining identities of a [`BoundaryCondition`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorResiduals {
    /// `|A^2 - A|`
    pub idempotent: f64,
    /// `|A^dagger - A|`
    pub hermitian: f64,
    /// `|A h A - h|`
    pub compression: f64,
}

impl ProjectorResiduals {
    pub fn max(&self) -> f64 {
        self.idempotent.max(self.hermitian).max(self.compression)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

/// Uniform grid `0 = x_0 < ... < x_{len-1} = x_max` with an odd node count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_max: f64,
    len: usize,
}

impl Grid {
    pub fn new(x_max: f64, len: usize) -> Result<Self> {
        if !(x_max > 0.0 && x_max.is_finite()) {
            return Err(Error::invalid(format!("x_max must be positive, got {x_max}")));
        }
        if len < 3 || len.is_multiple_of(2) {
            return Err(Error::invalid(format!("grid needs an odd node count >= 3, got {len}")));
        }
        Ok(Grid { x_max, len })
    }

    /// Grid on `[0, x_max]` whose step does not exceed `max_step`.
    pub fn with_max_step(x_max: f64, max_step: f64) -> Result<Self> {
        let mut panels = (x_max / max_step).ceil() as usize;
        panels = panels.max(2);
        if panels % 2 == 1 {
            panels += 1;
        }
        Grid::new(x_max, panels + 1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn step(&self) -> f64 {
        self.x_max / (self.len - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.len {
            self.x_max
        } else {
            i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.x(i))
    }

    /// Index of the node at `x`, if `x` is a node within rounding.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let t = x / self.step();
        let i = t.round();
        if (t - i).abs() < 1e-9 && i >= 0.0 && (i as usize) < self.len {
            Some(i as usize)
        } else {
            None
        }
    }
}

/// Sampled `n x n` potential on a uniform grid; zero beyond `x_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrid {
    grid: Grid,
    dim: usize,
    values: Vec<CMat>,
}

impl PotentialGrid {
    pub fn new(grid: Grid, values: Vec<CMat>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "potential has {} samples for {} grid nodes",
                values.len(),
                grid.len()
            )));
        }
        let dim = values[0].nrows();
        if dim == 0 {
            return Err(Error::invalid("potential dimension must be >= 1"));
        }
        for v in &values {
            check_square(v, dim, "potential sample")?;
            if !linalg::is_finite(v) {
                return Err(Error::invalid("potential contains non-finite values"));
            }
        }
        Ok(PotentialGrid { grid, dim, values })
    }

    pub fn from_fn(dim: usize, grid: Grid, f: impl Fn(f64) -> CMat) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        let q = Self::new(grid, values)?;
        if q.dim != dim {
            return Err(Error::invalid(format!("potential samples are {}x{}, expected {dim}", q.dim, q.dim)));
        }
        Ok(q)
    }

    pub fn zero(dim: usize, grid: Grid) -> Self {
        PotentialGrid { grid, dim, values: vec![linalg::zeros(dim); grid.len()] }
    }

    /// Diagonal box potential: entry `k` equals `heights[k]` on `[0, width]`.
    pub fn diagonal_box(heights: &[f64], width: f64, grid: Grid) -> Result<Self> {
        let n = heights.len();
        Self::from_fn(n, grid, |x| if x <= width * (1.0 + 1e-12) { linalg::diag(heights) } else { linalg::zeros(n) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn at(&self, i: usize) -> &CMat {
        &self.values[i]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|z| z.norm() == 0.0))
    }

    /// Trapezoid estimate of `int_0^x_max |Q(x)| dx` in the row-sum norm.
    pub fn l1_norm(&self) -> f64 {
        let h = self.grid.step();
        let n = self.values.len();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
                w * h * linalg::norm(v)
            })
            .sum()
    }

    /// Trapezoid L1 distance to another potential on the same grid.
    pub fn l1_distance(&self, other: &PotentialGrid) -> Result<f64> {
        if self.grid != other.grid || self.dim != other.dim {
            return Err(Error::invalid("potentials live on different grids"));
        }
        let h = self.grid.step();
        let n = self.values.len();
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| {
                let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
                w * h * linalg::dist(a, b)
            })
            .sum())
    }

    /// Samples this potential on another grid by linear interpolation; zero beyond
    /// `x_max`.
    pub fn resample(&self, grid: Grid) -> PotentialGrid {
        let h = self.grid.step();
        let values = grid
            .nodes()
            .map(|x| {
                if x > self.grid.x_max() * (1.0 + 1e-12) {
                    return linalg::zeros(self.dim);
                }
                let t = (x / h).min((self.grid.len() - 1) as f64);
                let i = (t.floor() as usize).min(self.grid.len() - 2);
                let f = t - i as f64;
                if f < 1e-9 {
                    self.values[i].clone()
                } else if f > 1.0 - 1e-9 {
                    self.values[i + 1].clone()
                } else {
                    &self.values[i] * cr(1.0 - f) + &self.values[i + 1] * cr(f)
                }
            })
            .collect();
        PotentialGrid { grid, dim: self.dim, values }
    }
}

/// Matrix solution sampled on a grid together with its x-derivative.
#[derive(Debug, Clone)]
pub struct MatrixWave {
    pub grid: Grid,
    pub at: SpectralPoint,
    pub values: Vec<CMat>,
    pub derivs: Vec<CMat>,
}

impl MatrixWave {
    pub fn new(grid: Grid, at: SpectralPoint, values: Vec<CMat>, derivs: Vec<CMat>) -> Self {
        assert_eq!(values.len(), grid.len());
        assert_eq!(derivs.len(), grid.len());
        MatrixWave { grid, at, values, derivs }
    }

    pub fn value(&self, i: usize) -> &CMat {
        &self.values[i]
    }

    pub fn deriv(&self, i: usize) -> &CMat {
        &self.derivs[i]
    }

    /// Right-multiplies every sample by `m`.
    pub fn mul_right(&self, m: &CMat) -> MatrixWave {
        MatrixWave {
            grid: self.grid,
            at: self.at,
            values: self.values.iter().map(|v| v * m).collect(),
            derivs: self.derivs.iter().map(|v| v * m).collect(),
        }
    }

    /// Left-multiplies every sample by `m`.
    pub fn mul_left(&self, m: &CMat) -> MatrixWave {
        MatrixWave {
            grid: self.grid,
            at: self.at,
            values: self.values.iter().map(|v| m * v).collect(),
            derivs: self.derivs.iter().map(|v| m * v).collect(),
        }
    }
}

/// Wronskian-type bracket `<Z, Y> = Z' Y - Z Y'`.
pub fn bracket(z: &CMat, z_der: &CMat, y: &CMat, y_der: &CMat) -> Result<CMat> {
    let n = z.nrows();
    check_square(z, n, "Z")?;
    check_square(z_der, n, "Z'")?;
    check_square(y, n, "Y")?;
    check_square(y_der, n, "Y'")?;
    Ok(z_der * y - z * y_der)
}

/// `T(Y) = A (Y'(0) - h Y(0)) - A_perp Y(0)`.
pub fn apply_t(bc: &BoundaryCondition, y0: &CMat, y0_der: &CMat) -> Result<CMat> {
    let n = bc.dim();
    check_square(y0, n, "Y(0)")?;
    check_square(y0_der, n, "Y'(0)")?;
    Ok(bc.a() * (y0_der - bc.h() * y0) - bc.a_perp() * y0)
}

/// `T*(Z) = (Z'(0) - Z(0) h) A - Z(0) A_perp`.
pub fn apply_t_star(bc: &BoundaryCondition, z0: &CMat, z0_der: &CMat) -> Result<CMat> {
    let n = bc.dim();
    check_square(z0, n, "Z(0)")?;
    check_square(z0_der, n, "Z'(0)")?;
    Ok((z0_der - z0 * bc.h()) * bc.a() - z0 * bc.a_perp())
}

/// `J_0(rho) = i rho A - A_perp`, the Jost matrix of the free problem with `h = 0`.
pub fn free_jost(a: &CMat, pt: SpectralPoint) -> CMat {
    let n = a.nrows();
    a * pt.i_rho() - (linalg::identity(n) - a)
}

/// `(i rho A - A_perp)^{-1} = A / (i rho) - A_perp` for an orthogonal projector `A`.
pub fn free_jost_inverse(a: &CMat, pt: SpectralPoint) -> CMat {
    let n = a.nrows();
    a / pt.i_rho() - (linalg::identity(n) - a)
}
