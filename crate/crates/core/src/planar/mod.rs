//! Planar base domains `X ⊂ R²`: annuli, cut annuli, spiral strips, pinched
//! spiral neighborhoods, bridged annuli and boolean composites.
//!
//! Every region exposes a signed distance estimate (positive inside), an
//! explicit oriented boundary made of analytic pieces, and a bounding box.

pub mod contour;
pub mod curve;
pub mod geom;
pub mod pieces;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curve::{is_convex, is_strictly_convex, turning_form, ConvexityReport, CurveSamples};
pub use geom::{Bbox, Point};
pub use pieces::{Component, Piece, PolarCurve};

use geom::{angle_0_2pi, dist, dist_point_segment, norm, polar, sub};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("argument out of range: {0}")]
    Domain(String),
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("curve is not simple: edges {first} and {second} meet")]
    NonSimple { first: usize, second: usize },
    #[error("unbounded boundary component; supply an explicit θ cutoff ({0})")]
    Unbounded(String),
}

/// Default channel width for cut and bridged annuli.
pub const DEFAULT_CHANNEL_WIDTH: f64 = 0.05;
/// Default corner-rounding radius.
pub const DEFAULT_ROUNDING: f64 = 0.01;

/// Beyond this angle `e^{−θ}` is below `2e-22` and spiral arms coincide with
/// the unit circle in double precision.
const SPIRAL_NUMERIC_END: f64 = 50.0;

fn default_channel_width() -> f64 {
    DEFAULT_CHANNEL_WIDTH
}

fn default_rounding() -> f64 {
    DEFAULT_ROUNDING
}

fn default_through() -> Point {
    [1.5, 0.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusSpec {
    #[serde(default)]
    pub center: Point,
    pub r_in: f64,
    pub r_out: f64,
}

/// A curved channel `{R − w ≤ |x − c| ≤ R}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub center: Point,
    pub radius: f64,
    #[serde(default = "default_channel_width")]
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositeOp {
    Union,
    Intersection,
    /// First operand minus all others.
    Difference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Disc {
        #[serde(default)]
        center: Point,
        radius: f64,
    },
    Annulus {
        #[serde(default)]
        center: Point,
        r_in: f64,
        r_out: f64,
    },
    /// An annulus with the component through `through` of the band
    /// `{R − η ≤ |x − c| ≤ R}` removed.
    CutAnnulus {
        annulus: AnnulusSpec,
        cut_center: Point,
        cut_radius: f64,
        #[serde(default = "default_channel_width")]
        channel_width: f64,
        #[serde(default = "default_through")]
        through: Point,
        #[serde(default = "default_rounding")]
        rounding: f64,
    },
    /// `φ((s_min, s_max) × (θ_min, θ_max))`; truncated iff `theta_max` is set.
    SpiralStrip {
        s_min: f64,
        s_max: f64,
        #[serde(default)]
        theta_min: f64,
        #[serde(default)]
        theta_max: Option<f64>,
    },
    /// Tubular neighborhood of the pinched spiral `ψ_ε`. At angle θ it spans
    /// the radii between `|ψ_ε(θ − 2πh)|` and `|ψ_ε(θ + 2πh)|`, `h = half_width`.
    PinchedSpiralNbhd {
        epsilon: f64,
        half_width: f64,
        #[serde(default)]
        theta_min: Option<f64>,
        #[serde(default)]
        theta_max: Option<f64>,
    },
    /// `({r_in < |x| < r_out} ∪ ({|x₁| < h} ∩ B_{r_out})) \ (channel ∩ B̄_{r_in})`.
    BridgedAnnulus {
        r_in: f64,
        r_out: f64,
        bridge_half_width: f64,
        channel: ChannelSpec,
        #[serde(default = "default_rounding")]
        rounding: f64,
    },
    Composite {
        op: CompositeOp,
        operands: Vec<PlanarRegion>,
    },
}

/// A validated planar region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Shape", into = "Shape")]
pub struct PlanarRegion {
    shape: Shape,
}

impl TryFrom<Shape> for PlanarRegion {
    type Error = RegionError;
    fn try_from(shape: Shape) -> Result<Self, Self::Error> {
        PlanarRegion::new(shape)
    }
}

impl From<PlanarRegion> for Shape {
    fn from(r: PlanarRegion) -> Self {
        r.shape
    }
}

/// Membership with a signed margin (approximate signed distance to the
/// boundary, negative outside).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub inside: bool,
    pub margin: f64,
}

/// `φ(s, θ) = (1 + s e^{−θ})(cos θ, sin θ)` on `[1/2, 1] × [0, ∞)`.
pub fn spiral_point(s: f64, theta: f64) -> Result<Point, RegionError> {
    if !(0.5..=1.0).contains(&s) || !(theta >= 0.0) || !theta.is_finite() {
        return Err(RegionError::Domain(format!("spiral chart needs s ∈ [1/2, 1], θ ≥ 0; got ({s}, {theta})")));
    }
    Ok(polar(1.0 + s * (-theta).exp(), theta))
}

/// The inverse of `φ`: the unique `(s, θ) ∈ [1/2, 1] × [0, ∞)` with
/// `φ(s, θ) = x`, if any. Uniqueness uses `e^{−2π} < 1/2`.
pub fn spiral_chart_inverse(x: Point) -> Option<(f64, f64)> {
    let r = norm(x);
    if !(r > 1.0) || !r.is_finite() {
        return None;
    }
    let a = angle_0_2pi(x);
    let lo = (0.5 / (r - 1.0)).ln();
    let k = ((lo - a) / (2.0 * PI)).ceil().max(0.0);
    let theta = a + 2.0 * PI * k;
    let s = (r - 1.0) * theta.exp();
    (s <= 1.0 + 1e-12 && s >= 0.5 - 1e-12).then_some((s.clamp(0.5, 1.0), theta))
}

fn pinched_radius(epsilon: f64, theta: f64) -> f64 {
    1.0 + epsilon * (0.5 + theta.atan() / PI)
}

/// `ψ_ε(θ) = (1 + ε(1/2 + arctan θ / π))(cos θ, sin θ)`.
pub fn pinched_spiral_point(epsilon: f64, theta: f64) -> Result<Point, RegionError> {
    if !(epsilon > 0.0) || !epsilon.is_finite() || !theta.is_finite() {
        return Err(RegionError::Domain(format!("pinched spiral needs ε > 0; got {epsilon}")));
    }
    Ok(polar(pinched_radius(epsilon, theta), theta))
}

/// Round intersection of two inside-positive distance fields.
fn round_min(a: f64, b: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return a.min(b);
    }
    let u = (r - a).max(0.0);
    let v = (r - b).max(0.0);
    r.max(a.min(b)) - u.hypot(v)
}

/// Round union of two inside-positive distance fields.
fn round_max(a: f64, b: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return a.max(b);
    }
    let u = (r + a).max(0.0);
    let v = (r + b).max(0.0);
    (-r).min(a.max(b)) + u.hypot(v)
}

fn finite(x: f64) -> bool {
    x.is_finite()
}

impl PlanarRegion {
    pub fn new(shape: Shape) -> Result<Self, RegionError> {
        validate(&shape)?;
        Ok(PlanarRegion { shape })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn disc(center: Point, radius: f64) -> Result<Self, RegionError> {
        Self::new(Shape::Disc { center, radius })
    }

    pub fn annulus(center: Point, r_in: f64, r_out: f64) -> Result<Self, RegionError> {
        Self::new(Shape::Annulus { center, r_in, r_out })
    }

    /// The annulus `{1 < |x| < 2}` cut along the circle `|x − (3/2, −2)| = 2`.
    pub fn standard_cut_annulus() -> Self {
        Self::new(Shape::CutAnnulus {
            annulus: AnnulusSpec { center: [0.0, 0.0], r_in: 1.0, r_out: 2.0 },
            cut_center: [1.5, -2.0],
            cut_radius: 2.0,
            channel_width: DEFAULT_CHANNEL_WIDTH,
            through: [1.5, 0.0],
            rounding: DEFAULT_ROUNDING,
        })
        .expect("standard cut annulus is valid")
    }

    /// `{2 < |x| < 3}` with the bridge `{|x₁| < 1/2}` interrupted by a bent
    /// channel passing just above the origin.
    pub fn standard_bridged_annulus() -> Self {
        Self::new(Shape::BridgedAnnulus {
            r_in: 2.0,
            r_out: 3.0,
            bridge_half_width: 0.5,
            channel: ChannelSpec { center: [0.0, -1.9], radius: 2.0, width: DEFAULT_CHANNEL_WIDTH },
            rounding: DEFAULT_ROUNDING,
        })
        .expect("standard bridged annulus is valid")
    }

    pub fn spiral_strip(s_min: f64, s_max: f64, theta_min: f64, theta_max: Option<f64>) -> Result<Self, RegionError> {
        Self::new(Shape::SpiralStrip { s_min, s_max, theta_min, theta_max })
    }

    /// The truncated spiral `φ((1/2, 1) × (0, 2(k + 1)π))`.
    pub fn truncated_spiral(k: u32) -> Self {
        Self::spiral_strip(0.5, 1.0, 0.0, Some(2.0 * PI * (k as f64 + 1.0))).expect("valid spiral")
    }

    pub fn pinched_spiral(
        epsilon: f64,
        half_width: f64,
        theta_min: Option<f64>,
        theta_max: Option<f64>,
    ) -> Result<Self, RegionError> {
        Self::new(Shape::PinchedSpiralNbhd { epsilon, half_width, theta_min, theta_max })
    }

    pub fn composite(op: CompositeOp, operands: Vec<PlanarRegion>) -> Result<Self, RegionError> {
        Self::new(Shape::Composite { op, operands })
    }

    /// Inside-positive signed distance estimate.
    pub fn sdf(&self, x: Point) -> f64 {
        match &self.shape {
            Shape::Disc { center, radius } => radius - dist(x, *center),
            Shape::Annulus { center, r_in, r_out } => {
                let d = dist(x, *center);
                (d - r_in).min(r_out - d)
            }
            Shape::CutAnnulus { annulus, cut_center, cut_radius, channel_width, through, rounding } => {
                let d = dist(x, annulus.center);
                let a = (d - annulus.r_in).min(annulus.r_out - d);
                let dc = dist(x, *cut_center);
                let band = (dc - (cut_radius - channel_width)).min(cut_radius - dc);
                let axis = sub(*cut_center, annulus.center);
                let side = geom::cross(axis, sub(*through, annulus.center)).signum();
                let axis_n = geom::normalize(axis).unwrap_or([1.0, 0.0]);
                let half_plane = side * geom::cross(axis_n, sub(x, annulus.center));
                let outside_removed = (-band).max(-half_plane);
                round_min(a, outside_removed, *rounding)
            }
            Shape::SpiralStrip { s_min, s_max, theta_min, theta_max } => {
                spiral_strip_sdf(*s_min, *s_max, *theta_min, *theta_max, x)
            }
            Shape::PinchedSpiralNbhd { epsilon, half_width, theta_min, theta_max } => {
                pinched_sdf(*epsilon, *half_width, *theta_min, *theta_max, x)
            }
            Shape::BridgedAnnulus { r_in, r_out, bridge_half_width, channel, rounding } => {
                let d = norm(x);
                let joined = round_max(d - r_in, bridge_half_width - x[0].abs(), *rounding).min(r_out - d);
                let dc = dist(x, channel.center);
                let band = (dc - (channel.radius - channel.width)).min(channel.radius - dc);
                let outside_removed = (-band).max(d - r_in);
                round_min(joined, outside_removed, *rounding)
            }
            Shape::Composite { op, operands } => {
                let mut it = operands.iter().map(|o| o.sdf(x));
                let first = it.next().unwrap_or(f64::NEG_INFINITY);
                match op {
                    CompositeOp::Union => it.fold(first, f64::max),
                    CompositeOp::Intersection => it.fold(first, f64::min),
                    CompositeOp::Difference => it.fold(first, |m, v| m.min(-v)),
                }
            }
        }
    }

    /// Membership in the open region.
    pub fn contains(&self, x: Point) -> Membership {
        let margin = self.sdf(x);
        Membership { inside: margin > 0.0, margin }
    }

    pub fn bounding_box(&self) -> Bbox {
        match &self.shape {
            Shape::Disc { center, radius } => Bbox::around(*center, *radius),
            Shape::Annulus { center, r_out, .. } => Bbox::around(*center, *r_out),
            Shape::CutAnnulus { annulus, .. } => Bbox::around(annulus.center, annulus.r_out),
            Shape::SpiralStrip { s_max, theta_min, .. } => {
                Bbox::around([0.0, 0.0], 1.0 + s_max * (-theta_min).exp())
            }
            Shape::PinchedSpiralNbhd { epsilon, .. } => Bbox::around([0.0, 0.0], 1.0 + epsilon),
            Shape::BridgedAnnulus { r_out, .. } => Bbox::around([0.0, 0.0], *r_out),
            Shape::Composite { op, operands } => {
                let mut it = operands.iter().map(PlanarRegion::bounding_box);
                let first = it.next().expect("validated non-empty");
                match op {
                    CompositeOp::Union => it.fold(first, |b, o| b.union(&o)),
                    CompositeOp::Intersection => it.fold(first, |b, o| b.intersection(&o)),
                    CompositeOp::Difference => first,
                }
            }
        }
    }

    /// `true` when the boundary can be traced without a θ cutoff.
    pub fn is_bounded_description(&self) -> bool {
        match &self.shape {
            Shape::SpiralStrip { theta_max, .. } => theta_max.is_some(),
            Shape::PinchedSpiralNbhd { theta_min, theta_max, .. } => theta_min.is_some() && theta_max.is_some(),
            Shape::Composite { operands, .. } => operands.iter().all(|o| o.is_bounded_description()),
            _ => true,
        }
    }

    /// Oriented boundary components (region on the left), outer first.
    ///
    /// Spirals without a finite θ range need `truncation`, which caps `|θ|`.
    pub fn boundary_components(&self, truncation: Option<f64>) -> Result<Vec<Component>, RegionError> {
        match &self.shape {
            Shape::Disc { center, radius } => Ok(vec![Component::new(vec![Piece::Arc {
                center: *center,
                radius: *radius,
                start: 0.0,
                end: 2.0 * PI,
            }])]),
            Shape::Annulus { center, r_in, r_out } => {
                let mut out = vec![Component::new(vec![Piece::Arc {
                    center: *center,
                    radius: *r_out,
                    start: 0.0,
                    end: 2.0 * PI,
                }])];
                if *r_in > 0.0 {
                    out.push(Component::new(vec![Piece::Arc {
                        center: *center,
                        radius: *r_in,
                        start: 2.0 * PI,
                        end: 0.0,
                    }]));
                }
                Ok(out)
            }
            Shape::CutAnnulus { annulus, cut_center, cut_radius, channel_width, through, .. } => {
                cut_annulus_boundary(annulus, *cut_center, *cut_radius, *channel_width, *through).map(|c| vec![c])
            }
            Shape::SpiralStrip { s_min, s_max, theta_min, theta_max } => {
                let hi = match (theta_max, truncation) {
                    (Some(t), Some(c)) => t.min(c),
                    (Some(t), None) => *t,
                    (None, Some(c)) => c,
                    (None, None) => {
                        return Err(RegionError::Unbounded("spiral strip has no θ_max".into()));
                    }
                };
                if !(hi > *theta_min) {
                    return Err(RegionError::Domain(format!("θ cutoff {hi} below θ_min {theta_min}")));
                }
                let (lo, s0, s1) = (*theta_min, *s_min, *s_max);
                Ok(vec![Component::new(vec![
                    Piece::Polar { curve: PolarCurve::Spiral { s: s1 }, theta0: lo, theta1: hi },
                    Piece::Segment { a: polar(1.0 + s1 * (-hi).exp(), hi), b: polar(1.0 + s0 * (-hi).exp(), hi) },
                    Piece::Polar { curve: PolarCurve::Spiral { s: s0 }, theta0: hi, theta1: lo },
                    Piece::Segment { a: polar(1.0 + s0 * (-lo).exp(), lo), b: polar(1.0 + s1 * (-lo).exp(), lo) },
                ])])
            }
            Shape::PinchedSpiralNbhd { epsilon, half_width, theta_min, theta_max } => {
                let cap = |v: Option<f64>, sign: f64| -> Result<f64, RegionError> {
                    match (v, truncation) {
                        (Some(t), Some(c)) => Ok(if sign > 0.0 { t.min(c) } else { t.max(-c) }),
                        (Some(t), None) => Ok(t),
                        (None, Some(c)) => Ok(sign * c),
                        (None, None) => Err(RegionError::Unbounded("pinched spiral has an infinite θ end".into())),
                    }
                };
                let lo = cap(*theta_min, -1.0)?;
                let hi = cap(*theta_max, 1.0)?;
                if !(hi > lo) {
                    return Err(RegionError::Domain(format!("empty θ window [{lo}, {hi}]")));
                }
                let w = 2.0 * PI * half_width;
                let outer = PolarCurve::Pinched { epsilon: *epsilon, shift: w };
                let inner = PolarCurve::Pinched { epsilon: *epsilon, shift: -w };
                Ok(vec![Component::new(vec![
                    Piece::Polar { curve: outer, theta0: lo, theta1: hi },
                    Piece::Segment { a: outer.point(hi), b: inner.point(hi) },
                    Piece::Polar { curve: inner, theta0: hi, theta1: lo },
                    Piece::Segment { a: inner.point(lo), b: outer.point(lo) },
                ])])
            }
            Shape::BridgedAnnulus { r_in, r_out, bridge_half_width, channel, .. } => Ok(vec![
                Component::new(vec![Piece::Arc { center: [0.0, 0.0], radius: *r_out, start: 0.0, end: 2.0 * PI }]),
                bridged_hole_boundary(*r_in, *bridge_half_width, channel).reversed(),
            ]),
            Shape::Composite { op, operands } => self.composite_boundary(*op, operands, truncation),
        }
    }

    fn composite_boundary(
        &self,
        op: CompositeOp,
        operands: &[PlanarRegion],
        truncation: Option<f64>,
    ) -> Result<Vec<Component>, RegionError> {
        if op == CompositeOp::Difference {
            if let Some(components) = self.difference_with_interior_holes(operands, truncation)? {
                return Ok(components);
            }
        }
        if !self.is_bounded_description() && truncation.is_none() {
            return Err(RegionError::Unbounded("composite with an unbounded operand".into()));
        }
        let bbox = self.bounding_box().inflate(0.05 * self.bounding_box().width().max(self.bounding_box().height()));
        if bbox.is_empty() {
            return Ok(Vec::new());
        }
        let n = 600;
        let loops = contour::level_loops(|p| self.sdf(p), &bbox, n, n);
        Ok(loops
            .into_iter()
            .map(|mut pts| {
                pts.push(pts[0]);
                Component::new(vec![Piece::Polyline { points: pts }])
            })
            .collect())
    }

    /// Boundary of `A \ (B₁ ∪ … ∪ B_m)` when every `B̄_j` lies inside `A`
    /// and the `B̄_j` are pairwise disjoint; `None` otherwise.
    fn difference_with_interior_holes(
        &self,
        operands: &[PlanarRegion],
        truncation: Option<f64>,
    ) -> Result<Option<Vec<Component>>, RegionError> {
        let base = &operands[0];
        let mut components = base.boundary_components(truncation)?;
        for (j, hole) in operands[1..].iter().enumerate() {
            let hc = hole.boundary_components(truncation)?;
            if hc.len() != 1 {
                return Ok(None);
            }
            let samples = hc[0].sample(64.0);
            let inside_base = samples.iter().all(|&p| base.sdf(p) > 0.0);
            let disjoint = operands[1..]
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .all(|(_, o)| samples.iter().all(|&p| o.sdf(p) < 0.0));
            if !(inside_base && disjoint) {
                return Ok(None);
            }
            components.push(hc[0].reversed());
        }
        Ok(Some(components))
    }

    /// Boundary pieces of the closure, including limit circles of infinite
    /// spirals; used for distance minimization.
    pub fn closure_pieces(&self) -> Result<Vec<Piece>, RegionError> {
        match &self.shape {
            Shape::SpiralStrip { theta_max: None, theta_min, .. } => {
                let cut = SPIRAL_NUMERIC_END.max(theta_min + 1.0);
                let mut pieces: Vec<Piece> = self
                    .boundary_components(Some(cut))?
                    .into_iter()
                    .flat_map(|c| c.pieces)
                    .collect();
                pieces.push(Piece::Arc { center: [0.0, 0.0], radius: 1.0, start: 0.0, end: 2.0 * PI });
                Ok(pieces)
            }
            _ => Ok(self.boundary_components(None)?.into_iter().flat_map(|c| c.pieces).collect()),
        }
    }

    /// The holes (bounded complementary components) of the region.
    pub fn holes(&self) -> Result<Vec<Hole>, RegionError> {
        match &self.shape {
            Shape::Annulus { center, r_in, .. } if *r_in > 0.0 => Ok(vec![Hole::Disc { center: *center, radius: *r_in }]),
            Shape::Composite { op: CompositeOp::Difference, operands } => {
                if self.difference_with_interior_holes(operands, None)?.is_some() {
                    let mut holes = operands[0].holes()?;
                    for o in &operands[1..] {
                        match o.shape {
                            Shape::Disc { center, radius } => holes.push(Hole::Disc { center, radius }),
                            _ => holes.push(Hole::Curve(component_samples(&o.boundary_components(None)?[0])?)),
                        }
                    }
                    Ok(holes)
                } else {
                    self.sampled_holes()
                }
            }
            Shape::Disc { .. } | Shape::Annulus { .. } => Ok(Vec::new()),
            _ => self.sampled_holes(),
        }
    }

    fn sampled_holes(&self) -> Result<Vec<Hole>, RegionError> {
        self.boundary_components(None)?
            .iter()
            .skip(1)
            .map(|c| component_samples(&c.reversed()).map(Hole::Curve))
            .collect()
    }
}

/// A hole of a region: the closure of a bounded complementary component.
#[derive(Debug, Clone, PartialEq)]
pub enum Hole {
    Disc { center: Point, radius: f64 },
    /// Counterclockwise samples of the hole's boundary.
    Curve(CurveSamples),
}

impl Hole {
    /// Membership in the closed hole.
    pub fn contains_closed(&self, x: Point) -> bool {
        match self {
            Hole::Disc { center, radius } => dist(x, *center) <= *radius,
            Hole::Curve(c) => point_in_polygon(x, c.distinct()),
        }
    }
}

/// Even-odd point-in-polygon test; boundary points count as inside.
pub fn point_in_polygon(x: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if dist_point_segment(x, a, b) == 0.0 {
            return true;
        }
        if (a[1] > x[1]) != (b[1] > x[1]) {
            let t = (x[1] - a[1]) / (b[1] - a[1]);
            if x[0] < a[0] + t * (b[0] - a[0]) {
                inside = !inside;
            }
        }
    }
    inside
}

fn component_samples(c: &Component) -> Result<CurveSamples, RegionError> {
    let density = (1024.0 / c.length()).max(64.0);
    CurveSamples::new(c.sample(density))
}

fn validate(shape: &Shape) -> Result<(), RegionError> {
    let bad = |m: &str| Err(RegionError::InvalidRegion(m.to_string()));
    match shape {
        Shape::Disc { center, radius } => {
            if !(radius > &0.0 && finite(*radius) && center.iter().all(|c| c.is_finite())) {
                return bad("disc needs a finite radius > 0");
            }
        }
        Shape::Annulus { center, r_in, r_out } => {
            if !(0.0 <= *r_in && r_in < r_out && finite(*r_out) && center.iter().all(|c| c.is_finite())) {
                return bad("annulus needs 0 ≤ r_in < r_out");
            }
        }
        Shape::CutAnnulus { annulus, cut_center, cut_radius, channel_width, through, rounding } => {
            validate(&Shape::Annulus { center: annulus.center, r_in: annulus.r_in, r_out: annulus.r_out })?;
            if !(annulus.r_in > 0.0) {
                return bad("cut annulus needs r_in > 0");
            }
            if !(*channel_width > 0.0 && channel_width < cut_radius && *rounding >= 0.0) {
                return bad("cut annulus needs 0 < η < cut radius and rounding ≥ 0");
            }
            if (dist(*through, *cut_center) - cut_radius).abs() > 1e-9 * cut_radius {
                return bad("`through` must lie on the cutting circle");
            }
            let axis = sub(*cut_center, annulus.center);
            if geom::cross(axis, sub(*through, annulus.center)).abs() < 1e-12 {
                return bad("`through` lies on the axis of the cut");
            }
            cut_annulus_boundary(annulus, *cut_center, *cut_radius, *channel_width, *through)?;
        }
        Shape::SpiralStrip { s_min, s_max, theta_min, theta_max } => {
            if !(0.5 <= *s_min && s_min < s_max && *s_max <= 1.0) {
                return bad("spiral strip needs 1/2 ≤ s_min < s_max ≤ 1");
            }
            if !(*theta_min >= 0.0 && finite(*theta_min)) {
                return bad("spiral strip needs θ_min ≥ 0");
            }
            if let Some(t) = theta_max {
                if !(t > theta_min && finite(*t)) {
                    return bad("spiral strip needs θ_max > θ_min");
                }
            }
        }
        Shape::PinchedSpiralNbhd { epsilon, half_width, theta_min, theta_max } => {
            if !(*epsilon > 0.0 && finite(*epsilon)) {
                return bad("pinched spiral needs ε > 0");
            }
            // turns of the tube stay disjoint, and inside A_ε, iff h < 1/2
            if !(*half_width > 0.0 && *half_width < 0.5) {
                return bad("pinched spiral needs 0 < half_width < 1/2");
            }
            if let (Some(a), Some(b)) = (theta_min, theta_max) {
                if !(a < b) {
                    return bad("pinched spiral needs θ_min < θ_max");
                }
            }
            if theta_min.is_some_and(|t| !finite(t)) || theta_max.is_some_and(|t| !finite(t)) {
                return bad("θ bounds must be finite when given");
            }
        }
        Shape::BridgedAnnulus { r_in, r_out, bridge_half_width: h, channel, rounding } => {
            if !(0.0 < *r_in && r_in < r_out && finite(*r_out)) {
                return bad("bridged annulus needs 0 < r_in < r_out");
            }
            if !(*h > 0.0 && h < r_in) || !(*rounding >= 0.0) {
                return bad("bridge half-width must lie in (0, r_in)");
            }
            if !(channel.width > 0.0 && channel.width < channel.radius) {
                return bad("channel needs 0 < width < radius");
            }
            let top = (r_in * r_in - h * h).sqrt();
            for r in [channel.radius, channel.radius - channel.width] {
                for xs in [-h, *h] {
                    let dx = xs - channel.center[0];
                    if r <= dx.abs() {
                        return bad("channel does not span the bridge");
                    }
                    let y = channel.center[1] + (r * r - dx * dx).sqrt();
                    if !(y > -top && y < top) {
                        return bad("channel must cross the bridge inside the hole");
                    }
                }
            }
        }
        Shape::Composite { op, operands } => {
            let min = if *op == CompositeOp::Difference { 2 } else { 1 };
            if operands.len() < min {
                return bad("composite has too few operands");
            }
        }
    }
    Ok(())
}

fn spiral_strip_sdf(s_min: f64, s_max: f64, theta_min: f64, theta_max: Option<f64>, x: Point) -> f64 {
    let r = norm(x);
    let a = angle_0_2pi(x);
    let hi = theta_max.unwrap_or(f64::INFINITY);
    let end = |t: f64| dist_point_segment(x, polar(1.0 + s_min * (-t).exp(), t), polar(1.0 + s_max * (-t).exp(), t));
    let mut d_ends = end(theta_min);
    if hi.is_finite() {
        d_ends = d_ends.min(end(hi));
    }
    let mut outside = d_ends;
    let mut k = ((theta_min - a) / (2.0 * PI)).ceil();
    loop {
        let theta = a + 2.0 * PI * k;
        if theta > hi || theta > SPIRAL_NUMERIC_END + 2.0 * PI {
            break;
        }
        k += 1.0;
        if theta < theta_min {
            continue;
        }
        let e = (-theta).exp();
        let (r_lo, r_hi) = (1.0 + s_min * e, 1.0 + s_max * e);
        // project radial gaps onto the spiral normal
        let c_lo = 1.0 / (1.0 + (s_min * e / r_lo).powi(2)).sqrt();
        let c_hi = 1.0 / (1.0 + (s_max * e / r_hi).powi(2)).sqrt();
        if r > r_lo && r < r_hi && theta > theta_min && theta < hi {
            return ((r - r_lo) * c_lo).min((r_hi - r) * c_hi).min(d_ends);
        }
        let gap = if r <= r_lo { (r_lo - r) * c_lo } else { (r - r_hi) * c_hi };
        outside = outside.min(gap);
    }
    -outside
}

fn pinched_sdf(epsilon: f64, half_width: f64, theta_min: Option<f64>, theta_max: Option<f64>, x: Point) -> f64 {
    let r = norm(x);
    let a = angle_0_2pi(x);
    let w = 2.0 * PI * half_width;
    let lo = theta_min.unwrap_or(f64::NEG_INFINITY);
    let hi = theta_max.unwrap_or(f64::INFINITY);
    let inner = |t: f64| pinched_radius(epsilon, t - w);
    let outer = |t: f64| pinched_radius(epsilon, t + w);
    let end = |t: f64| dist_point_segment(x, polar(inner(t), t), polar(outer(t), t));
    let mut d_ends = f64::INFINITY;
    if lo.is_finite() {
        d_ends = d_ends.min(end(lo));
    }
    if hi.is_finite() {
        d_ends = d_ends.min(end(hi));
    }
    const FAR: f64 = 1e12;
    let mut target = if r <= 1.0 {
        -FAR
    } else if r >= 1.0 + epsilon {
        FAR
    } else {
        (PI * ((r - 1.0) / epsilon - 0.5)).tan()
    };
    target = target.clamp(lo.max(-FAR) - 2.0 * PI, hi.min(FAR) + 2.0 * PI);
    let k0 = ((target - a) / (2.0 * PI)).round();
    let mut outside = d_ends;
    for dk in -2..=2 {
        let theta = a + 2.0 * PI * (k0 + dk as f64);
        if theta < lo || theta > hi {
            continue;
        }
        let (r_in, r_out) = (inner(theta), outer(theta));
        if r > r_in && r < r_out && theta > lo && theta < hi {
            return (r - r_in).min(r_out - r).min(d_ends);
        }
        let gap = if r <= r_in { r_in - r } else { r - r_out };
        outside = outside.min(gap);
    }
    -outside
}

fn cut_annulus_boundary(
    annulus: &AnnulusSpec,
    cut_center: Point,
    cut_radius: f64,
    width: f64,
    through: Point,
) -> Result<Component, RegionError> {
    let c0 = annulus.center;
    let axis = sub(cut_center, c0);
    let side = geom::cross(axis, sub(through, c0)).signum();
    let pick = |r_ann: f64, r_cut: f64| -> Result<Point, RegionError> {
        let pts = geom::circle_circle(c0, r_ann, cut_center, r_cut)
            .ok_or_else(|| RegionError::InvalidRegion("cutting circle misses an annulus boundary circle".into()))?;
        pts.into_iter()
            .find(|p| geom::cross(axis, sub(*p, c0)).signum() == side)
            .ok_or_else(|| RegionError::InvalidRegion("cut does not cross on the side of `through`".into()))
    };
    // edge 0: the cutting circle; edge 1: its inner parallel
    let radii = [cut_radius, cut_radius - width];
    let outs = [pick(annulus.r_out, radii[0])?, pick(annulus.r_out, radii[1])?];
    let ins = [pick(annulus.r_in, radii[0])?, pick(annulus.r_in, radii[1])?];
    let ang = |p: Point, c: Point| {
        let v = sub(p, c);
        v[1].atan2(v[0])
    };
    // the removed arc on the outer circle runs counterclockwise from e1 to e2
    let (e1, e2) = if geom::wrap_pi(ang(outs[1], c0) - ang(outs[0], c0)) > 0.0 { (0, 1) } else { (1, 0) };
    let a1 = ang(outs[e1], c0);
    let a2 = ang(outs[e2], c0);
    let outer_sweep = (a1 - a2).rem_euclid(2.0 * PI);
    let b1 = ang(ins[e1], c0);
    let b2 = ang(ins[e2], c0);
    let inner_sweep = (b1 - b2).rem_euclid(2.0 * PI);
    if outer_sweep <= PI || inner_sweep <= PI {
        return Err(RegionError::InvalidRegion("cut is too wide for the annulus".into()));
    }
    let edge_arc = |e: usize, from: Point, to: Point| {
        let s = ang(from, cut_center);
        let t = ang(to, cut_center);
        Piece::Arc { center: cut_center, radius: radii[e], start: s, end: s + geom::wrap_pi(t - s) }
    };
    Ok(Component::new(vec![
        Piece::Arc { center: c0, radius: annulus.r_out, start: a2, end: a2 + outer_sweep },
        edge_arc(e1, outs[e1], ins[e1]),
        Piece::Arc { center: c0, radius: annulus.r_in, start: b1, end: b1 - inner_sweep },
        edge_arc(e2, ins[e2], outs[e2]),
    ]))
}

/// Counterclockwise boundary of the hole of a bridged annulus.
fn bridged_hole_boundary(r_in: f64, h: f64, channel: &ChannelSpec) -> Component {
    let s = (r_in * r_in - h * h).sqrt();
    let (cx, cy) = (channel.center[0], channel.center[1]);
    let edge_y = |r: f64, x: f64| cy + (r * r - (x - cx).powi(2)).sqrt();
    let r_up = channel.radius;
    let r_lo = channel.radius - channel.width;
    let t_r = [h, s];
    let t_l = [-h, s];
    let b_r = [h, -s];
    let b_l = [-h, -s];
    let u_r = [h, edge_y(r_up, h)];
    let u_l = [-h, edge_y(r_up, -h)];
    let d_r = [h, edge_y(r_lo, h)];
    let d_l = [-h, edge_y(r_lo, -h)];
    let ang = |p: Point, c: Point| {
        let v = sub(p, c);
        v[1].atan2(v[0])
    };
    let ccw = |c: Point, r: f64, from: Point, to: Point| {
        let s0 = ang(from, c);
        Piece::Arc { center: c, radius: r, start: s0, end: s0 + (ang(to, c) - s0).rem_euclid(2.0 * PI) }
    };
    let cw = |c: Point, r: f64, from: Point, to: Point| {
        let s0 = ang(from, c);
        Piece::Arc { center: c, radius: r, start: s0, end: s0 - (s0 - ang(to, c)).rem_euclid(2.0 * PI) }
    };
    let o = [0.0, 0.0];
    Component::new(vec![
        ccw(o, r_in, b_r, t_r),
        Piece::Segment { a: t_r, b: u_r },
        ccw(channel.center, r_up, u_r, u_l),
        Piece::Segment { a: u_l, b: t_l },
        ccw(o, r_in, t_l, b_l),
        Piece::Segment { a: b_l, b: d_l },
        cw(channel.center, r_lo, d_l, d_r),
        Piece::Segment { a: d_r, b: b_r },
    ])
}

/// Boundary samples of a region, one closed curve per component.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySamples {
    pub components: Vec<CurveSamples>,
    /// Set when an unbounded spiral was cut at this `|θ|`.
    pub truncated_at: Option<f64>,
}

/// Samples each boundary component at `density` points per unit length.
pub fn boundary_sample(
    region: &PlanarRegion,
    density: f64,
    truncation: Option<f64>,
) -> Result<BoundarySamples, RegionError> {
    if !(density > 0.0) {
        return Err(RegionError::Domain("density must be positive".into()));
    }
    let components = region.boundary_components(truncation)?;
    let samples = components
        .iter()
        .map(|c| {
            let min_density = 16.0 / c.length();
            CurveSamples::new(c.sample(density.max(min_density)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let truncated_at = if region.is_bounded_description() { None } else { truncation };
    Ok(BoundarySamples { components: samples, truncated_at })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HoleVerdict {
    /// Convex outer boundary with finitely many strictly convex holes.
    Eligible,
    NotEligible,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentCheck {
    pub index: usize,
    pub role: String,
    pub passed: bool,
    pub min_abs_turning: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleClassification {
    pub verdict: HoleVerdict,
    pub components: Vec<ComponentCheck>,
    pub reason: String,
}

/// Decides whether the region is a convex domain with finitely many
/// strictly convex holes.
pub fn classify_holes(region: &PlanarRegion) -> HoleClassification {
    let inconclusive = |reason: String| HoleClassification {
        verdict: HoleVerdict::Inconclusive,
        components: Vec::new(),
        reason,
    };
    let components = match region.boundary_components(None) {
        Ok(c) if !c.is_empty() => c,
        Ok(_) => return inconclusive("no boundary components".into()),
        Err(e) => return inconclusive(e.to_string()),
    };
    let mut checks = Vec::new();
    for (index, comp) in components.iter().enumerate() {
        let samples = match component_samples(comp) {
            Ok(s) => s,
            Err(e) => return inconclusive(format!("component {index}: {e}")),
        };
        let tol = samples.default_tolerance();
        let check = if index == 0 {
            let simple = curve::first_self_intersection(samples.distinct()).is_none();
            let convex = simple && samples.signed_area() > 0.0 && is_convex(&samples, tol);
            ComponentCheck {
                index,
                role: "outer".into(),
                passed: convex,
                min_abs_turning: samples.turning.iter().fold(f64::INFINITY, |m, a| m.min(a.abs())),
                reason: if convex { "convex".into() } else { "outer boundary is not convex".into() },
            }
        } else {
            match is_strictly_convex(&samples) {
                Ok(rep) => ComponentCheck {
                    index,
                    role: "hole".into(),
                    passed: rep.strictly_convex,
                    min_abs_turning: rep.min_abs_turning,
                    reason: if rep.strictly_convex {
                        "strictly convex".into()
                    } else {
                        "turning form vanishes or changes sign".into()
                    },
                },
                Err(e) => return inconclusive(format!("component {index}: {e}")),
            }
        };
        checks.push(check);
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| format!("{} {}: {}", c.role, c.index, c.reason)).collect();
    HoleClassification {
        verdict: if failed.is_empty() { HoleVerdict::Eligible } else { HoleVerdict::NotEligible },
        reason: if failed.is_empty() { "all components pass".into() } else { failed.join("; ") },
        components: checks,
    }
}

#[cfg(test)]
mod tests;
