//! The contour `gamma`: a circle of radius `r0` around the origin in the
//! `lambda` plane joined to the two-sided cut `[r0, R]` along the positive axis.
//!
//! Orientation follows the Cauchy representation `f(lambda) = (1/2 pi i) int
//! f(mu) / (lambda - mu) d mu` on the region outside the circle: the circle runs
//! counterclockwise, the upper side of the cut runs inward from `R` to `r0`, and the
//! lower side runs outward. Nodes are stored in that order, so the composite path
//! is traversed without jumps.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, CMat, I};
use crate::spectral::{lambda_to_point, Sheet, SpectralPoint};

pub const MIN_SEGMENT_NODES: usize = 32;
pub const MIN_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Segment {
    Circle,
    UpperCut,
    LowerCut,
}

impl Segment {
    pub fn name(&self) -> &'static str {
        match self {
            Segment::Circle => "circle",
            Segment::UpperCut => "upper_cut",
            Segment::LowerCut => "lower_cut",
        }
    }

    pub fn parse(s: &str) -> Option<Segment> {
        match s {
            "circle" => Some(Segment::Circle),
            "upper_cut" => Some(Segment::UpperCut),
            "lower_cut" => Some(Segment::LowerCut),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourNode {
    pub point: SpectralPoint,
    /// Quadrature weight for `d lambda`, orientation included.
    pub weight: Complex64,
    pub segment: Segment,
}

impl ContourNode {
    pub fn lambda(&self) -> Complex64 {
        self.point.lambda()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    r0: f64,
    r_max: f64,
    delta: f64,
    n_circle: usize,
    n_cut: usize,
    nodes: Vec<ContourNode>,
}

/// Builds the contour with `n_circle` nodes on the circle and `n_cut` nodes on each
/// side of the cut.
///
/// The circle is the arc through `r0 +- i delta` (the full circle of radius `r0` when
/// `delta = 0`), sampled by the midpoint rule in angle so no node sits on the cut.
/// The cut is parametrized by `tau = sqrt(s)`, `s` in `[r0, R]`, with the trapezoid
/// rule uniform in `tau`; this resolves the `sin(tau x)` oscillation of the kernel
/// evenly along the cut. With `delta > 0` the
/// two sides sit at `lambda = s +- i delta`; with `delta = 0` they are the two sheets
/// of the positive axis.
pub fn build_contour(r0: f64, r_max: f64, delta: f64, n_circle: usize, n_cut: usize) -> Result<Contour> {
    if !(r0 > 0.0 && r0.is_finite() && r_max.is_finite() && r0 < r_max) {
        return Err(Error::invalid(format!("contour needs 0 < r0 < R, got r0 = {r0}, R = {r_max}")));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("delta must be >= 0, got {delta}")));
    }
    if delta >= 0.5 * r0 {
        return Err(Error::invalid(format!("delta = {delta} is not small compared to r0 = {r0}")));
    }
    if n_circle < MIN_SEGMENT_NODES || n_cut < MIN_SEGMENT_NODES {
        return Err(Error::invalid(format!(
            "need at least {MIN_SEGMENT_NODES} nodes per segment, got circle {n_circle}, cut {n_cut}"
        )));
    }

    let mut nodes = Vec::with_capacity(n_circle + 2 * n_cut);
    let cut = cut_rule(r0, r_max, n_cut);
    for &(tau, w) in cut.iter().rev() {
        nodes.push(cut_node(tau, delta, -w, Segment::UpperCut)?);
    }
    // The arc meets the cut sides at r0 +- i delta.
    let alpha = delta.atan2(r0);
    let dtheta = (2.0 * PI - 2.0 * alpha) / n_circle as f64;
    let root = r0.hypot(delta).sqrt();
    for k in 0..n_circle {
        let theta = alpha + (k as f64 + 0.5) * dtheta;
        let rho = Complex64::from_polar(root, 0.5 * theta);
        let point = SpectralPoint::new(rho)?;
        nodes.push(ContourNode { point, weight: I * point.lambda() * dtheta, segment: Segment::Circle });
    }
    for &(tau, w) in cut.iter() {
        nodes.push(cut_node(tau, delta, w, Segment::LowerCut)?);
    }
    Ok(Contour { r0, r_max, delta, n_circle, n_cut, nodes })
}

/// `(tau, |d lambda| weight)` pairs for the trapezoid rule in `tau` on `[sqrt r0, sqrt R]`.
fn cut_rule(r0: f64, r_max: f64, n: usize) -> Vec<(f64, f64)> {
    let (a, b) = (r0.sqrt(), r_max.sqrt());
    let dt = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|k| {
            let tau = if k + 1 == n { b } else { a + k as f64 * dt };
            let end = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
            (tau, end * dt * 2.0 * tau)
        })
        .collect()
}

fn cut_node(tau: f64, delta: f64, weight: f64, segment: Segment) -> Result<ContourNode> {
    let s = tau * tau;
    let sheet = if segment == Segment::UpperCut { Sheet::Upper } else { Sheet::Lower };
    let lambda = match segment {
        Segment::UpperCut => c(s, delta),
        _ => c(s, -delta),
    };
    let point = lambda_to_point(lambda, sheet)?;
    Ok(ContourNode { point, weight: cr(weight), segment })
}

impl Contour {
    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n_circle(&self) -> usize {
        self.n_circle
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn nodes(&self) -> &[ContourNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Whether `lambda` lies strictly inside the circle.
    pub fn encloses(&self, lambda: Complex64) -> bool {
        lambda.norm() < self.r0
    }

    /// Index ranges of the three segments within [`Contour::nodes`].
    pub fn segment_range(&self, segment: Segment) -> std::ops::Range<usize> {
        let (nc, nk) = (self.n_circle, self.n_cut);
        match segment {
            Segment::UpperCut => 0..nk,
            Segment::Circle => nk..nk + nc,
            Segment::LowerCut => nk + nc..nc + 2 * nk,
        }
    }

    /// Contour with every other node on each segment and weights adjusted; the
    /// nodes are a subset of this contour's nodes. `n_cut` must be odd.
    pub fn coarsened(&self) -> Result<(Contour, Vec<usize>)> {
        if self.n_cut.is_multiple_of(2) || self.n_circle % 2 == 1 {
            return Err(Error::invalid("coarsening needs an odd cut count and an even circle count"));
        }
        let mut index = Vec::new();
        let mut nodes = Vec::new();
        let upper = self.segment_range(Segment::UpperCut);
        let circle = self.segment_range(Segment::Circle);
        let lower = self.segment_range(Segment::LowerCut);
        // Doubling the step doubles every trapezoid weight, end points included.
        for range in [upper, circle, lower] {
            for (k, i) in range.enumerate() {
                if k % 2 == 0 {
                    index.push(i);
                    nodes.push(ContourNode { weight: self.nodes[i].weight * 2.0, ..self.nodes[i] });
                }
            }
        }
        let coarse = Contour {
            r0: self.r0,
            r_max: self.r_max,
            delta: self.delta,
            n_circle: self.n_circle / 2,
            n_cut: self.n_cut / 2 + 1,
            nodes,
        };
        Ok((coarse, index))
    }

    /// Contour cut back to `|lambda| <= r_new` (at the nearest cut node not beyond
    /// it); the nodes are a subset of this contour's nodes.
    pub fn truncated(&self, r_new: f64) -> Result<(Contour, Vec<usize>)> {
        let (a, b) = (self.r0.sqrt(), self.r_max.sqrt());
        let dt = (b - a) / (self.n_cut - 1) as f64;
        let m = ((r_new.sqrt() - a) / dt + 1e-9).floor() as usize;
        if m < MIN_SEGMENT_NODES - 1 || m >= self.n_cut - 1 {
            return Err(Error::invalid(format!("cannot truncate the contour to R = {r_new}")));
        }
        let n_cut = m + 1;
        let tau_end = a + m as f64 * dt;
        let fix = |k: usize, w: Complex64| if k == m { w * 0.5 } else { w };
        let mut index = Vec::new();
        let mut nodes = Vec::new();
        let upper = self.segment_range(Segment::UpperCut);
        // Upper nodes are stored from R inward: position k from the end is tau index k.
        for i in upper.clone().rev().take(n_cut).rev() {
            let k = self.n_cut - 1 - (i - upper.start);
            index.push(i);
            nodes.push(ContourNode { weight: fix(k, self.nodes[i].weight), ..self.nodes[i] });
        }
        for i in self.segment_range(Segment::Circle) {
            index.push(i);
            nodes.push(self.nodes[i]);
        }
        for (k, i) in self.segment_range(Segment::LowerCut).take(n_cut).enumerate() {
            index.push(i);
            nodes.push(ContourNode { weight: fix(k, self.nodes[i].weight), ..self.nodes[i] });
        }
        let coarse =
            Contour { r0: self.r0, r_max: tau_end * tau_end, delta: self.delta, n_circle: self.n_circle, n_cut, nodes };
        Ok((coarse, index))
    }
}

/// `sum_k samples_k w_k`, divided by `2 pi i` when `cauchy` is set.
pub fn integrate(contour: &Contour, samples: &[CMat], cauchy: bool) -> Result<CMat> {
    if samples.len() != contour.len() {
        return Err(Error::invalid(format!("{} samples for a contour with {} nodes", samples.len(), contour.len())));
    }
    let (rows, cols) = samples.first().map(|m| m.shape()).unwrap_or((0, 0));
    let mut acc = CMat::zeros(rows, cols);
    for (node, s) in contour.nodes.iter().zip(samples) {
        if s.shape() != (rows, cols) {
            return Err(Error::invalid("contour samples differ in shape"));
        }
        linalg::axpy(&mut acc, node.weight, s);
    }
    if cauchy {
        acc /= c(0.0, 2.0 * PI);
    }
    Ok(acc)
}

/// Scalar version of [`integrate`].
pub fn integrate_scalar(contour: &Contour, f: impl Fn(&ContourNode) -> Complex64, cauchy: bool) -> Complex64 {
    let s: Complex64 = contour.nodes.iter().map(|n| f(n) * n.weight).sum();
    if cauchy {
        s / c(0.0, 2.0 * PI)
    } else {
        s
    }
}
