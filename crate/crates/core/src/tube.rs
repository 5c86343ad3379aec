//! Tube domains `X + iY ⊂ C²`, the line–tube separation radius, and the
//! curvature side of tube hypersurfaces over planar curves.

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{ComplexLinearForm, LinalgError, C2};
use crate::planar::geom::{self, Point};
use crate::planar::{CurveSamples, Piece, PlanarRegion, RegionError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TubeError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("the line meets X + i·0 near x = ({}, {}); no positive radius", .witness[0], .witness[1])]
    NoPositiveRadius { witness: Point },
    #[error("flat point at sample {index}: |α| = {alpha:e} ≤ τ = {tolerance:e}")]
    FlatPoint { index: usize, alpha: f64, tolerance: f64 },
}

fn default_center() -> Point {
    [0.0, 0.0]
}

/// A convex fiber `Y ⊂ R²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum FiberRegion {
    Ball {
        #[serde(default = "default_center")]
        center: Point,
        radius: f64,
    },
    /// `{c + R(v) diag(a, b) u : |u| < 1}` with `R(v)` the rotation by `angle`.
    Ellipse {
        #[serde(default = "default_center")]
        center: Point,
        semi_axes: [f64; 2],
        #[serde(default)]
        angle: f64,
    },
    /// `factor · base`, scaled about the origin.
    ScaledCopy { base: Box<FiberRegion>, factor: f64 },
}

impl FiberRegion {
    pub fn ball(radius: f64) -> Self {
        FiberRegion::Ball { center: [0.0, 0.0], radius }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        FiberRegion::ScaledCopy { base: Box::new(self.clone()), factor }
    }

    pub fn validate(&self) -> Result<(), TubeError> {
        let bad = |m: &str| Err(TubeError::InvalidParameter(m.into()));
        match self {
            FiberRegion::Ball { radius, center } => {
                if !(*radius > 0.0 && radius.is_finite()) || !center.iter().all(|c| c.is_finite()) {
                    return bad("ball radius must be positive");
                }
            }
            FiberRegion::Ellipse { semi_axes, .. } => {
                if !semi_axes.iter().all(|a| *a > 0.0 && a.is_finite()) {
                    return bad("ellipse semi-axes must be positive");
                }
            }
            FiberRegion::ScaledCopy { base, factor } => {
                if !(*factor > 0.0 && factor.is_finite()) {
                    return bad("scaling factor must be positive");
                }
                base.validate()?;
            }
        }
        Ok(())
    }

    /// The shape with all scalings applied.
    pub fn flattened(&self) -> FiberRegion {
        match self {
            FiberRegion::ScaledCopy { base, factor } => match base.flattened() {
                FiberRegion::Ball { center, radius } => FiberRegion::Ball {
                    center: geom::scale(center, *factor),
                    radius: radius * factor,
                },
                FiberRegion::Ellipse { center, semi_axes, angle } => FiberRegion::Ellipse {
                    center: geom::scale(center, *factor),
                    semi_axes: [semi_axes[0] * factor, semi_axes[1] * factor],
                    angle,
                },
                FiberRegion::ScaledCopy { .. } => unreachable!("flattened shapes are not scaled copies"),
            },
            other => other.clone(),
        }
    }

    /// Gauge value: `< 1` inside, `= 1` on the boundary.
    fn gauge(&self, y: Point) -> f64 {
        match self.flattened() {
            FiberRegion::Ball { center, radius } => geom::dist(y, center) / radius,
            FiberRegion::Ellipse { center, semi_axes, angle } => {
                let d = geom::sub(y, center);
                let (s, c) = angle.sin_cos();
                let u = [c * d[0] + s * d[1], -s * d[0] + c * d[1]];
                (u[0] / semi_axes[0]).hypot(u[1] / semi_axes[1])
            }
            FiberRegion::ScaledCopy { .. } => unreachable!(),
        }
    }

    pub fn contains(&self, y: Point) -> bool {
        self.gauge(y) < 1.0
    }

    pub fn contains_closed(&self, y: Point) -> bool {
        self.gauge(y) <= 1.0
    }

    /// Boundary point at parameter `t ∈ [0, 2π)`, counterclockwise.
    pub fn boundary_point(&self, t: f64) -> Point {
        match self.flattened() {
            FiberRegion::Ball { center, radius } => geom::add(center, geom::polar(radius, t)),
            FiberRegion::Ellipse { center, semi_axes, angle } => {
                let u = [semi_axes[0] * t.cos(), semi_axes[1] * t.sin()];
                let (s, c) = angle.sin_cos();
                geom::add(center, [c * u[0] - s * u[1], s * u[0] + c * u[1]])
            }
            FiberRegion::ScaledCopy { .. } => unreachable!(),
        }
    }

    /// `min_{y ∈ ∂Y} |y − q|`, exact for balls and refined numerically for
    /// ellipses.
    pub fn min_dist_to_boundary(&self, q: Point) -> f64 {
        match self.flattened() {
            FiberRegion::Ball { center, radius } => (geom::dist(q, center) - radius).abs(),
            flat => {
                let f = |t: f64| geom::dist(flat.boundary_point(t), q);
                let n = 720;
                let h = 2.0 * std::f64::consts::PI / n as f64;
                let k = (0..n)
                    .min_by(|&a, &b| f(a as f64 * h).total_cmp(&f(b as f64 * h)))
                    .unwrap_or(0);
                let t0 = k as f64 * h;
                golden_min(&f, t0 - h, t0 + h, 1e-13).1
            }
        }
    }

    /// `max_{y ∈ Ȳ} |y|`.
    pub fn outer_radius(&self) -> f64 {
        match self.flattened() {
            FiberRegion::Ball { center, radius } => geom::norm(center) + radius,
            FiberRegion::Ellipse { center, semi_axes, .. } => geom::norm(center) + semi_axes[0].max(semi_axes[1]),
            FiberRegion::ScaledCopy { .. } => unreachable!(),
        }
    }
}

/// `D = X + iY`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TubeDomain {
    pub base: PlanarRegion,
    pub fiber: FiberRegion,
}

impl TubeDomain {
    pub fn new(base: PlanarRegion, fiber: FiberRegion) -> Result<Self, TubeError> {
        fiber.validate()?;
        Ok(TubeDomain { base, fiber })
    }

    pub fn contains(&self, z: &C2) -> bool {
        self.base.contains(z.x()).inside && self.fiber.contains(z.y())
    }
}

pub fn tube_contains(t: &TubeDomain, z: &C2) -> bool {
    t.contains(z)
}

/// Parameters `(r₁, r₂, r₃)` of `{r₁ < |x| < r₂} + iB_{r₃}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl ModelParams {
    pub fn new(r1: f64, r2: f64, r3: f64) -> Result<Self, TubeError> {
        let p = ModelParams { r1, r2, r3 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), TubeError> {
        if !(0.0 <= self.r1 && self.r1 < self.r2 && self.r2.is_finite() && self.r3 > 0.0 && self.r3.is_finite()) {
            return Err(TubeError::InvalidParameter(format!(
                "model domain needs 0 ≤ r1 < r2 and r3 > 0; got ({}, {}, {})",
                self.r1, self.r2, self.r3
            )));
        }
        Ok(())
    }
}

/// Membership in `{r₁ < |x| < r₂} + iB_{r₃}`.
pub fn model_domain_contains(p: &ModelParams, z: &C2) -> Result<bool, TubeError> {
    p.validate()?;
    let rx = geom::norm(z.x());
    Ok(p.r1 < rx && rx < p.r2 && geom::norm(z.y()) < p.r3)
}

/// The real 2×2 matrix `T` with `L = {x + iTx}`, or `None` when `L` is not
/// transverse to `R²_x`.
pub fn line_fiber_map(form: &ComplexLinearForm) -> Option<Matrix2<f64>> {
    let m = form.restricted_to_real();
    let scale = form.coeff_norm().powi(2);
    if m.determinant().abs() <= 1e-12 * scale {
        return None;
    }
    let j = Matrix2::new(0.0, -1.0, 1.0, 0.0);
    Some(m.try_inverse()? * j * m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationConfig {
    pub seeds: usize,
    pub grid: usize,
    pub step_tol: f64,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        SeparationConfig { seeds: 32, grid: 1024, step_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub radius: f64,
    /// `x` of a minimizing point `x + iTx ∈ L` with `x ∈ ∂X`.
    pub argmin_x: Point,
    pub argmin_y: Point,
    pub seeds: usize,
    pub grid: usize,
    /// Minimum of `|Tx|` over grid points of `X̄`.
    pub grid_min: f64,
    /// `grid_min ≥ radius(1 − 1e-9)`.
    pub certified: bool,
    /// Lower bound from grid points near `X̄` and the Lipschitz constant `‖T‖`.
    pub lipschitz_lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeparationRadius {
    Finite(SeparationReport),
    /// The x-projection of `L` misses `X̄`.
    Infinite { reason: String },
}

impl SeparationRadius {
    pub fn value(&self) -> f64 {
        match self {
            SeparationRadius::Finite(r) => r.radius,
            SeparationRadius::Infinite { .. } => f64::INFINITY,
        }
    }
}

/// Golden-section minimization of `f` on `[a, b]`.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// Minimizes `h` over the union of boundary pieces: coarse samples, the
/// `seeds` best local minima, then golden-section refinement.
fn minimize_on_pieces<H: Fn(Point) -> f64>(pieces: &[Piece], h: H, seeds: usize, tol: f64) -> (f64, Point) {
    // (value, piece, sample parameter, bracket)
    let mut candidates: Vec<(f64, usize, f64, f64, f64)> = Vec::new();
    for (pi, piece) in pieces.iter().enumerate() {
        let n = match piece {
            Piece::Polyline { points } => points.len().max(2) * 4,
            Piece::Polar { theta0, theta1, .. } => ((theta1 - theta0).abs() * 64.0).ceil().max(512.0) as usize,
            _ => 512,
        };
        let vals: Vec<f64> = (0..=n).map(|k| h(piece.eval(k as f64 / n as f64))).collect();
        for k in 0..=n {
            let left = if k > 0 { vals[k - 1] } else { f64::INFINITY };
            let right = if k < n { vals[k + 1] } else { f64::INFINITY };
            if vals[k] <= left && vals[k] <= right {
                let lo = k.saturating_sub(1) as f64 / n as f64;
                let hi = (k + 1).min(n) as f64 / n as f64;
                candidates.push((vals[k], pi, k as f64 / n as f64, lo, hi));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    candidates.truncate(seeds.max(1));
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for (v0, pi, t0, lo, hi) in candidates {
        let piece = &pieces[pi];
        let f = |t: f64| h(piece.eval(t.clamp(0.0, 1.0)));
        let (t, v) = golden_min(&f, lo, hi, tol);
        let (t, v) = if v0 < v { (t0, v0) } else { (t, v) };
        if v < best.0 {
            best = (v, piece.eval(t.clamp(0.0, 1.0)));
        }
    }
    best
}

/// `R = inf{|y| : x + iy ∈ L, x ∈ X̄}`.
///
/// `R` is the largest `r` with `L ∩ (X + iB_r) = ∅`.
pub fn separation_radius(
    form: &ComplexLinearForm,
    region: &PlanarRegion,
    config: &SeparationConfig,
) -> Result<SeparationRadius, TubeError> {
    let pieces = region.closure_pieces()?;
    if region.sdf([0.0, 0.0]) >= 0.0 {
        return Err(TubeError::NoPositiveRadius { witness: [0.0, 0.0] });
    }
    let Some(t) = line_fiber_map(form) else {
        // x-projection of L is ker M, and over it L contains real points
        let m = form.restricted_to_real();
        let row = if m.row(0).norm() >= m.row(1).norm() { m.row(0) } else { m.row(1) };
        let n = geom::normalize([row[0], row[1]]).unwrap_or([1.0, 0.0]);
        let (d, x) = minimize_on_pieces(&pieces, |x| geom::dot(n, x).abs(), config.seeds, config.step_tol);
        if d <= 1e-12 * (1.0 + geom::norm(x)) {
            return Err(TubeError::NoPositiveRadius { witness: x });
        }
        return Ok(SeparationRadius::Infinite {
            reason: format!("x-projection of the line misses the closure by {d:e}"),
        });
    };
    let apply = |x: Point| [t[(0, 0)] * x[0] + t[(0, 1)] * x[1], t[(1, 0)] * x[0] + t[(1, 1)] * x[1]];
    let h = |x: Point| geom::norm(apply(x));
    let (radius, argmin_x) = minimize_on_pieces(&pieces, h, config.seeds, config.step_tol);
    if !(radius > 0.0) {
        return Err(TubeError::NoPositiveRadius { witness: argmin_x });
    }

    let bbox = region.bounding_box();
    let n = config.grid.max(2);
    let hx = bbox.width() / (n - 1) as f64;
    let hy = bbox.height() / (n - 1) as f64;
    let reach = 0.5 * hx.hypot(hy);
    let lip = t.norm();
    let (grid_min, near_min) = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut inside = f64::INFINITY;
            let mut near = f64::INFINITY;
            for i in 0..n {
                let x = [bbox.min[0] + i as f64 * hx, bbox.min[1] + j as f64 * hy];
                let s = region.sdf(x);
                if s >= -reach {
                    let v = h(x);
                    near = near.min(v);
                    if s >= 0.0 {
                        inside = inside.min(v);
                    }
                }
            }
            (inside, near)
        })
        .reduce(|| (f64::INFINITY, f64::INFINITY), |a, b| (a.0.min(b.0), a.1.min(b.1)));
    Ok(SeparationRadius::Finite(SeparationReport {
        radius,
        argmin_x,
        argmin_y: apply(argmin_x),
        seeds: config.seeds,
        grid: n,
        grid_min,
        certified: grid_min >= radius * (1.0 - 1e-9),
        lipschitz_lower_bound: (near_min - lip * reach).max(0.0),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSide {
    /// Unit normal toward the center of curvature.
    pub pseudoconvex_side_normal: Point,
    pub strict: bool,
    pub alpha: f64,
}

/// Side of the tube hypersurface `(curve) + iB_r` facing the center of
/// curvature at sample `index`. Germs extend across it from the opposite side.
pub fn curvature_side(curve: &CurveSamples, index: usize) -> Result<CurvatureSide, TubeError> {
    let n = curve.turning.len();
    if index >= n {
        return Err(TubeError::InvalidParameter(format!("sample index {index} out of range 0..{n}")));
    }
    let alpha = curve.turning[index];
    let tolerance = curve.default_tolerance();
    if alpha.abs() <= tolerance {
        return Err(TubeError::FlatPoint { index, alpha, tolerance });
    }
    let left = geom::perp(curve.tangents[index]);
    let normal = if alpha > 0.0 { left } else { geom::scale(left, -1.0) };
    Ok(CurvatureSide { pseudoconvex_side_normal: normal, strict: true, alpha })
}

#[cfg(test)]
mod tests;
