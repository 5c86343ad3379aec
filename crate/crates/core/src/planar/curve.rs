//! Sampled closed curves: tangents, the turning form α, simplicity and
//! strict convexity.

use std::cmp::Ordering;
use std::f64::consts::PI;

use robust::{orient2d, Coord};
use serde::{Deserialize, Serialize};

use super::geom::{self, Point};
use super::RegionError;

/// Samples of a closed planar curve, parametrized over `[0, 2π)` with equal
/// parameter steps between consecutive samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSamples {
    /// Closed: the first point is repeated at the end.
    pub points: Vec<Point>,
    /// Unit tangent at each distinct sample.
    pub tangents: Vec<Point>,
    /// α at each distinct sample, in radians per parameter unit.
    pub turning: Vec<f64>,
}

impl CurveSamples {
    /// Builds samples from an ordered point list; the list may or may not
    /// repeat its first point.
    pub fn new(mut points: Vec<Point>) -> Result<Self, RegionError> {
        if points.len() >= 2 && points.first() == points.last() {
            points.pop();
        }
        let turning = turning_form(&points)?;
        let n = points.len();
        let tangents = (0..n)
            .map(|i| {
                let t = geom::sub(points[(i + 1) % n], points[(i + n - 1) % n]);
                geom::normalize(t).unwrap_or([0.0, 0.0])
            })
            .collect();
        points.push(points[0]);
        Ok(CurveSamples {
            points,
            tangents,
            turning,
        })
    }

    /// The distinct samples (without the closing repeat).
    pub fn distinct(&self) -> &[Point] {
        &self.points[..self.points.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameter step between consecutive samples.
    pub fn step(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    /// `∫ α dθ / 2π`, rounded.
    pub fn turning_number(&self) -> i64 {
        (self.turning.iter().sum::<f64>() * self.step() / (2.0 * PI)).round() as i64
    }

    pub fn signed_area(&self) -> f64 {
        geom::signed_area(self.distinct())
    }

    /// Default strict-convexity tolerance `1e-6 · max|α|`.
    pub fn default_tolerance(&self) -> f64 {
        1e-6 * self.turning.iter().fold(0.0_f64, |m, a| m.max(a.abs()))
    }
}

/// Sampled turning form of a closed curve.
///
/// With tangent directions `φ_i` estimated by central differences and
/// increments `d_i = φ_i − φ_{i−1}` wrapped into `(−π, π]`, the value at
/// sample `i` is `(d_i + d_{i+1}) / 2Δ`, `Δ = 2π/N`. The sum over all samples
/// times `Δ` is exactly the total tangent rotation.
pub fn turning_form(points: &[Point]) -> Result<Vec<f64>, RegionError> {
    let mut pts = points;
    if pts.len() >= 2 && pts.first() == pts.last() {
        pts = &pts[..pts.len() - 1];
    }
    let n = pts.len();
    if n < 16 {
        return Err(RegionError::DegenerateCurve(format!(
            "need at least 16 samples, got {n}"
        )));
    }
    for i in 0..n {
        if pts[i] == pts[(i + 1) % n] {
            return Err(RegionError::DegenerateCurve(format!("repeated point at sample {i}")));
        }
    }
    let phi: Vec<f64> = (0..n)
        .map(|i| {
            let t = geom::sub(pts[(i + 1) % n], pts[(i + n - 1) % n]);
            t[1].atan2(t[0])
        })
        .collect();
    let d: Vec<f64> = (0..n).map(|i| geom::wrap_pi(phi[i] - phi[(i + n - 1) % n])).collect();
    let delta = 2.0 * PI / n as f64;
    Ok((0..n).map(|i| (d[i] + d[(i + 1) % n]) / (2.0 * delta)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub strictly_convex: bool,
    /// `+1` if α > 0 throughout, `−1` if α < 0 throughout, `0` otherwise.
    pub sign: i8,
    pub min_abs_turning: f64,
    pub max_abs_turning: f64,
    pub tolerance: f64,
}

/// Strict convexity: α keeps one sign and `min |α| > τ_α`.
pub fn is_strictly_convex(curve: &CurveSamples) -> Result<ConvexityReport, RegionError> {
    is_strictly_convex_with(curve, curve.default_tolerance())
}

pub fn is_strictly_convex_with(
    curve: &CurveSamples,
    tolerance: f64,
) -> Result<ConvexityReport, RegionError> {
    if let Some((i, j)) = first_self_intersection(curve.distinct()) {
        return Err(RegionError::NonSimple { first: i, second: j });
    }
    let min_abs = curve.turning.iter().fold(f64::INFINITY, |m, a| m.min(a.abs()));
    let max_abs = curve.turning.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    let sign = if curve.turning.iter().all(|&a| a > tolerance) {
        1
    } else if curve.turning.iter().all(|&a| a < -tolerance) {
        -1
    } else {
        0
    };
    Ok(ConvexityReport {
        strictly_convex: sign != 0,
        sign,
        min_abs_turning: min_abs,
        max_abs_turning: max_abs,
        tolerance,
    })
}

/// Convexity in the weak sense: α never has the wrong sign beyond `tolerance`
/// relative to the curve's orientation.
pub fn is_convex(curve: &CurveSamples, tolerance: f64) -> bool {
    let orientation = curve.signed_area().signum();
    curve.turning.iter().all(|&a| a * orientation >= -tolerance)
        && curve.turning_number().abs() == 1
}

fn coord(p: Point) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

fn orient(a: Point, b: Point, c: Point) -> i8 {
    let o = orient2d(coord(a), coord(b), coord(c));
    if o > 0.0 {
        1
    } else if o < 0.0 {
        -1
    } else {
        0
    }
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Exact segment intersection test (touching counts as intersecting).
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, c))
        || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a))
        || (o4 == 0 && on_segment(c, d, b))
}

/// First pair of non-adjacent edges of the closed polygon that meet, using a
/// sweep over edge x-extents.
pub fn first_self_intersection(pts: &[Point]) -> Option<(usize, usize)> {
    let n = pts.len();
    if n < 3 {
        return None;
    }
    let edge = |i: usize| (pts[i], pts[(i + 1) % n]);
    // adjacent edges may only share their common vertex
    for i in 0..n {
        let (a, b) = edge(i);
        let (_, c) = edge((i + 1) % n);
        if orient(a, b, c) == 0 && geom::dot(geom::sub(b, a), geom::sub(c, b)) < 0.0 {
            return Some((i, (i + 1) % n));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let lo = |i: usize| {
        let (a, b) = edge(i);
        a[0].min(b[0])
    };
    let hi = |i: usize| {
        let (a, b) = edge(i);
        a[0].max(b[0])
    };
    order.sort_by(|&i, &j| lo(i).partial_cmp(&lo(j)).unwrap_or(Ordering::Equal));
    for (k, &i) in order.iter().enumerate() {
        let (a, b) = edge(i);
        let hi_i = hi(i);
        for &j in &order[k + 1..] {
            if lo(j) > hi_i {
                break;
            }
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent {
                continue;
            }
            let (c, d) = edge(j);
            if a[1].max(b[1]) < c[1].min(d[1]) || c[1].max(d[1]) < a[1].min(b[1]) {
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}
