//! Model envelopes, the solid-torus polynomial hull with two-sided
//! certificates, escape radii, and envelope slices over domains with convex
//! holes.
//!
//! Outer certificates use Gaussian witnesses `f_ζ(z) = exp(Σ(z_k − ζ_k)²)`,
//! with `|f_ζ| = exp(|x − ζ_x|² − |y − ζ_y|²)`; all moduli are handled as
//! logarithms. Inner certificates trace the leaf `{z₁² + z₂² = c}` through
//! the query and check that its boundary in `P = B̄_{r₁} + iB̄_{r₃}` lies on
//! `K`.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::C2;
use crate::planar::geom::{self, Point};
use crate::planar::{classify_holes, Hole, HoleVerdict, PlanarRegion, RegionError};
use crate::tube::{FiberRegion, TubeError};

pub use crate::tube::ModelParams;

/// Relative safety factor on certificate margins.
pub const SAFETY: f64 = 1e-9;
/// Default number of samples on `K`.
pub const DEFAULT_SAMPLES: usize = 10_000;
/// Distance to `K` accepted for leaf boundary samples.
pub const LEAF_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HullError {
    #[error(transparent)]
    Tube(#[from] TubeError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("schedule exhausted: {0}")]
    ScheduleExhausted(String),
}

/// `E(D)` for `D = {r₁ < |x| < r₂} + iB_{r₃}`:
/// `|x| < r₂`, `|y| < r₃`, `|y|² < |x|² − (r₁² − r₃²)`.
pub fn model_envelope_contains(p: &ModelParams, z: &C2) -> Result<bool, HullError> {
    p.validate()?;
    let x2 = geom::dot(z.x(), z.x());
    let y2 = geom::dot(z.y(), z.y());
    Ok(x2 < p.r2 * p.r2 && y2 < p.r3 * p.r3 && y2 < x2 - (p.r1 * p.r1 - p.r3 * p.r3))
}

/// Hull of `B̄_{r₁} + i∂B_{r₃}`: `|x| ≤ r₁`, `|y| ≤ r₃`,
/// `|x|² − |y|² ≤ r₁² − r₃²`.
pub fn torus_hull_contains(r1: f64, r3: f64, z: &C2) -> Result<bool, HullError> {
    check_radii(r1, r3)?;
    let x2 = geom::dot(z.x(), z.x());
    let y2 = geom::dot(z.y(), z.y());
    Ok(x2 <= r1 * r1 && y2 <= r3 * r3 && x2 - y2 <= r1 * r1 - r3 * r3)
}

fn check_radii(r1: f64, r3: f64) -> Result<(), HullError> {
    if !(r1 > 0.0 && r3 > 0.0 && r1.is_finite() && r3.is_finite()) {
        return Err(HullError::InvalidParameter(format!("need r1, r3 > 0; got ({r1}, {r3})")));
    }
    Ok(())
}

/// Distance from `z` to the solid torus `B̄_{r₁} + i∂B_{r₃}` (upper bound,
/// exact when `|x| ≤ r₁`).
fn torus_distance(r1: f64, r3: f64, z: &C2) -> f64 {
    (geom::norm(z.x()) - r1).max(0.0) + (geom::norm(z.y()) - r3).abs()
}

/// A compact convex set `K_x ⊂ R²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConvexSet {
    Disc {
        #[serde(default)]
        center: Point,
        radius: f64,
    },
    /// Counterclockwise vertices of a convex polygon.
    Polygon { vertices: Vec<Point> },
}

impl ConvexSet {
    pub fn disc(center: Point, radius: f64) -> Self {
        ConvexSet::Disc { center, radius }
    }

    pub fn validate(&self) -> Result<(), HullError> {
        match self {
            ConvexSet::Disc { radius, center } => {
                if !(*radius > 0.0 && radius.is_finite() && center.iter().all(|c| c.is_finite())) {
                    return Err(HullError::InvalidParameter("K_x is degenerate: radius must be positive".into()));
                }
            }
            ConvexSet::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 || !(geom::signed_area(vertices) > 0.0) {
                    return Err(HullError::InvalidParameter("K_x polygon must be counterclockwise with area".into()));
                }
                let convex = (0..n).all(|i| {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    geom::cross(geom::sub(b, a), geom::sub(c, b)) >= -1e-12 * geom::dist(a, b) * geom::dist(b, c)
                });
                if !convex {
                    return Err(HullError::InvalidParameter("K_x polygon is not convex".into()));
                }
            }
        }
        Ok(())
    }

    /// The closure of a hole as a convex set.
    pub fn from_hole(hole: &Hole) -> Self {
        match hole {
            Hole::Disc { center, radius } => ConvexSet::Disc { center: *center, radius: *radius },
            Hole::Curve(c) => ConvexSet::Polygon { vertices: c.distinct().to_vec() },
        }
    }

    pub fn center(&self) -> Point {
        match self {
            ConvexSet::Disc { center, .. } => *center,
            ConvexSet::Polygon { vertices } => {
                let s = vertices.iter().fold([0.0, 0.0], |a, &v| geom::add(a, v));
                geom::scale(s, 1.0 / vertices.len() as f64)
            }
        }
    }

    /// `max_{x ∈ K_x} |x − q|²`.
    pub fn max_dist_sq(&self, q: Point) -> f64 {
        match self {
            ConvexSet::Disc { center, radius } => (geom::dist(q, *center) + radius).powi(2),
            ConvexSet::Polygon { vertices } => vertices.iter().map(|&v| geom::dot(geom::sub(v, q), geom::sub(v, q))).fold(0.0, f64::max),
        }
    }

    pub fn contains(&self, q: Point) -> bool {
        match self {
            ConvexSet::Disc { center, radius } => geom::dist(q, *center) <= *radius,
            ConvexSet::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| geom::cross(geom::sub(vertices[(i + 1) % n], vertices[i]), geom::sub(q, vertices[i])) >= 0.0)
            }
        }
    }

    /// Point of `K_x` for `(u₁, u₂) ∈ [0, 1)²`; uniform for discs.
    fn sample(&self, u1: f64, u2: f64) -> Point {
        match self {
            ConvexSet::Disc { center, radius } => geom::add(*center, geom::polar(radius * u1.sqrt(), 2.0 * PI * u2)),
            ConvexSet::Polygon { vertices } => {
                let n = vertices.len();
                let c = self.center();
                let s = u1 * n as f64;
                let k = (s.floor() as usize).min(n - 1);
                let a = s - k as f64;
                let r = u2.sqrt();
                let p = geom::add(
                    geom::scale(vertices[k], r * (1.0 - a)),
                    geom::scale(vertices[(k + 1) % n], r * a),
                );
                geom::add(p, geom::scale(c, 1.0 - r))
            }
        }
    }

    /// Grid of `K_x` including its boundary.
    fn grid(&self, n: usize) -> Vec<Point> {
        let n = n.max(2);
        match self {
            ConvexSet::Disc { center, radius } => {
                let mut out = vec![*center];
                for i in 1..n {
                    let r = radius * i as f64 / (n - 1) as f64;
                    for k in 0..n {
                        out.push(geom::add(*center, geom::polar(r, 2.0 * PI * k as f64 / n as f64)));
                    }
                }
                out
            }
            ConvexSet::Polygon { vertices } => {
                let c = self.center();
                let mut out = vec![c];
                let m = vertices.len();
                for i in 1..n {
                    let t = i as f64 / (n - 1) as f64;
                    for k in 0..n {
                        let s = k as f64 / n as f64 * m as f64;
                        let j = (s.floor() as usize).min(m - 1);
                        let a = s - j as f64;
                        let b = geom::add(geom::scale(vertices[j], 1.0 - a), geom::scale(vertices[(j + 1) % m], a));
                        out.push(geom::add(geom::scale(c, 1.0 - t), geom::scale(b, t)));
                    }
                }
                out
            }
        }
    }

    fn translated(&self, d: Point) -> Self {
        match self {
            ConvexSet::Disc { center, radius } => ConvexSet::Disc { center: geom::add(*center, d), radius: *radius },
            ConvexSet::Polygon { vertices } => ConvexSet::Polygon {
                vertices: vertices.iter().map(|&v| geom::add(v, d)).collect(),
            },
        }
    }
}

/// `K = K_x + i∂Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusK {
    pub kx: ConvexSet,
    pub fiber: FiberRegion,
}

impl TorusK {
    pub fn new(kx: ConvexSet, fiber: FiberRegion) -> Result<Self, HullError> {
        kx.validate()?;
        fiber.validate()?;
        Ok(TorusK { kx, fiber })
    }

    /// The solid torus `B̄_{r₁} + i∂B_{r₃}`.
    pub fn solid_torus(r1: f64, r3: f64) -> Result<Self, HullError> {
        check_radii(r1, r3)?;
        Self::new(ConvexSet::disc([0.0, 0.0], r1), FiberRegion::ball(r3))
    }

    /// `log max_K |f_ζ| = max_{K_x}|x − ζ_x|² − min_{∂Y}|y − ζ_y|²`.
    pub fn log_max_modulus(&self, zeta: &C2) -> f64 {
        let d = self.fiber.min_dist_to_boundary(zeta.y());
        self.kx.max_dist_sq(zeta.x()) - d * d
    }

    /// Sampled `log max_K |f_ζ|` over `n` Halton points.
    pub fn sampled_log_max_modulus(&self, zeta: &C2, n: usize) -> f64 {
        (0..n)
            .map(|i| {
                let k = i as u64 + 1;
                let x = self.kx.sample(halton(k, 2), halton(k, 3));
                let y = self.fiber.boundary_point(2.0 * PI * halton(k, 5));
                log_modulus(zeta, &C2::from_xy(x, y))
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Van der Corput radical inverse of `i` in `base`.
pub fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `log |f_ζ(z)| = |x − ζ_x|² − |y − ζ_y|²`.
pub fn log_modulus(zeta: &C2, z: &C2) -> f64 {
    let dx = geom::sub(z.x(), zeta.x());
    let dy = geom::sub(z.y(), zeta.y());
    geom::dot(dx, dx) - geom::dot(dy, dy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    /// `g(z) = e^{z₁² + z₂²}`, i.e. `ζ = 0`.
    FixedGaussian,
    /// `f_ζ` evaluated at its own center, where it equals 1.
    CenteredGaussian,
    /// `f_ζ` at an arbitrary query.
    ShiftedGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HullVerdict {
    Excluded,
    NotExcluded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullCertificate {
    pub center: C2,
    pub query: C2,
    pub witness_kind: WitnessKind,
    /// Exact `max_K |f_ζ|`.
    pub max_modulus_on_k: f64,
    pub log_max_modulus_on_k: f64,
    /// Cross-check: maximum over low-discrepancy samples of `K`.
    pub sampled_log_max_modulus: f64,
    pub value_at_query: f64,
    pub log_value_at_query: f64,
    /// `value_at_query / max_modulus_on_k − 1`.
    pub relative_margin: f64,
    pub verdict: HullVerdict,
    pub sample_count: usize,
    pub low_confidence: bool,
}

/// Certificate from the witness `f_ζ` for `query`; excluded iff
/// `|f_ζ(query)| > max_K |f_ζ| (1 + SAFETY)`.
pub fn gaussian_certificate(zeta: &C2, query: &C2, k: &TorusK, samples: usize, kind: WitnessKind) -> HullCertificate {
    let log_max = k.log_max_modulus(zeta);
    let sampled = k.sampled_log_max_modulus(zeta, samples);
    let log_value = log_modulus(zeta, query);
    let log_ratio = log_value - log_max;
    let verdict = if log_ratio > SAFETY.ln_1p() { HullVerdict::Excluded } else { HullVerdict::NotExcluded };
    HullCertificate {
        center: *zeta,
        query: *query,
        witness_kind: kind,
        max_modulus_on_k: log_max.exp(),
        log_max_modulus_on_k: log_max,
        sampled_log_max_modulus: sampled,
        value_at_query: log_value.exp(),
        log_value_at_query: log_value,
        relative_margin: log_ratio.exp_m1(),
        verdict,
        sample_count: samples,
        low_confidence: samples < 1000 || sampled > log_max + 1e-9 * (1.0 + log_max.abs()),
    }
}

/// `f_ζ` at its center `ζ`: excluded iff `max_K |f_ζ| < 1` with margin.
pub fn gaussian_exclusion(zeta: &C2, k: &TorusK, samples: usize) -> HullCertificate {
    gaussian_certificate(zeta, zeta, k, samples, WitnessKind::CenteredGaussian)
}

/// The fixed witness `g = e^{z₁² + z₂²}` at `query`.
pub fn fixed_witness(query: &C2, k: &TorusK, samples: usize) -> HullCertificate {
    gaussian_certificate(&C2::ZERO, query, k, samples, WitnessKind::FixedGaussian)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafVerdict {
    Certified,
    Failed,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafCheck {
    pub verdict: LeafVerdict,
    pub c: Complex64,
    pub boundary_samples: usize,
    /// Largest distance from a traced boundary point to `K`.
    pub max_residual: f64,
    pub reason: String,
}

/// Point of the leaf `{z₁² + z₂² = c}` with `z₁ + iz₂ = w`, or on the
/// branch `z₁ + iz₂ = 0` when `c = 0`.
fn leaf_point(c: Complex64, w: Complex64, lower_branch: bool) -> C2 {
    let i = Complex64::i();
    if lower_branch {
        return C2::new(w / 2.0, i * w / 2.0);
    }
    let v = c / w;
    C2::new((w + v) / 2.0, (w - v) / (2.0 * i))
}

/// `≤ 0` exactly on `P = B̄_{r₁} + iB̄_{r₃}`.
fn p_gauge(r1: f64, r3: f64, z: &C2) -> f64 {
    (geom::norm(z.x()) / r1).max(geom::norm(z.y()) / r3) - 1.0
}

/// Inner certificate for `z ∈ K̂` with `K = B̄_{r₁} + i∂B_{r₃}`: the piece
/// of the leaf through `z` inside `P` has its boundary on `K`.
pub fn leaf_boundary_check(r1: f64, r3: f64, z: &C2, samples: usize) -> Result<LeafCheck, HullError> {
    if !torus_hull_contains(r1, r3, z)? {
        return Err(HullError::Precondition("query is not in the torus hull".into()));
    }
    let c = z.z1 * z.z1 + z.z2 * z.z2;
    let d0 = torus_distance(r1, r3, z);
    if d0 <= LEAF_TOL {
        return Ok(LeafCheck {
            verdict: LeafVerdict::Certified,
            c,
            boundary_samples: 1,
            max_residual: d0,
            reason: "query lies on K".into(),
        });
    }
    let n = (samples.max(64) as f64).sqrt().ceil() as usize * 2;
    let boundary = if c.norm() <= 1e-14 * (1.0 + z.norm().powi(2)) {
        trace_linear_leaf(r1, r3, z, n)
    } else {
        trace_leaf(r1, r3, c, z, n)
    };
    let pts = match boundary {
        Ok(p) => p,
        Err(reason) => {
            return Ok(LeafCheck { verdict: LeafVerdict::Inconclusive, c, boundary_samples: 0, max_residual: f64::NAN, reason })
        }
    };
    let max_residual = pts.iter().map(|p| torus_distance(r1, r3, p)).fold(0.0, f64::max);
    let ok = max_residual <= LEAF_TOL;
    Ok(LeafCheck {
        verdict: if ok { LeafVerdict::Certified } else { LeafVerdict::Failed },
        c,
        boundary_samples: pts.len(),
        max_residual,
        reason: if ok { "leaf boundary lies on K".into() } else { "leaf boundary leaves K".into() },
    })
}

/// `c = 0`: the leaf is a complex line through 0, and its piece in `P` is
/// convex, so rays from 0 find the boundary.
fn trace_linear_leaf(r1: f64, r3: f64, z: &C2, n: usize) -> Result<Vec<C2>, String> {
    let i = Complex64::i();
    let u = z.z1 + i * z.z2;
    let lower = u.norm() <= 1e-14 * (1.0 + z.norm());
    let w_max = 2.0 * (r1 * r1 + r3 * r3).sqrt() + 1.0;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let dir = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
        let g = |t: f64| p_gauge(r1, r3, &leaf_point(Complex64::new(0.0, 0.0), dir * t, lower));
        if g(w_max) <= 0.0 {
            return Err("leaf does not leave P".into());
        }
        let (mut a, mut b) = (0.0, w_max);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if g(m) <= 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        out.push(leaf_point(Complex64::new(0.0, 0.0), dir * a, lower));
    }
    Ok(out)
}

/// `c ≠ 0`: flood fill of the component of `{w : z(w) ∈ P}` containing
/// `w_z = z₁ + iz₂` on a log-polar grid, then bisection across every
/// inside/outside grid edge.
fn trace_leaf(r1: f64, r3: f64, c: Complex64, z: &C2, n: usize) -> Result<Vec<C2>, String> {
    let i = Complex64::i();
    let wz = z.z1 + i * z.z2;
    // |w|, |c/w| ≤ |z₁| + |z₂| ≤ √2 |z| on P
    let bound = (2.0 * (r1 * r1 + r3 * r3)).sqrt();
    let lo = (c.norm() / bound).ln() - 0.5;
    let hi = bound.ln() + 0.5;
    let nr = n;
    let nphi = 2 * n;
    let hr = (hi - lo) / nr as f64;
    let hphi = 2.0 * PI / nphi as f64;
    let w_at = |ir: f64, ip: f64| Complex64::from_polar((lo + ir * hr).exp(), ip * hphi);
    let inside = |ir: usize, ip: usize| p_gauge(r1, r3, &leaf_point(c, w_at(ir as f64, ip as f64), false)) < 0.0;

    let mut mask = vec![0u8; (nr + 1) * nphi]; // 0 unknown, 1 inside, 2 outside
    let idx = |ir: usize, ip: usize| ir * nphi + ip;
    let seed_r = ((wz.norm().ln() - lo) / hr).round().clamp(0.0, nr as f64) as usize;
    let seed_p = (wz.arg().rem_euclid(2.0 * PI) / hphi).round() as usize % nphi;
    let mut seed = None;
    'search: for rad in 0..3usize {
        for dr in -(rad as i64)..=(rad as i64) {
            for dp in -(rad as i64)..=(rad as i64) {
                let ir = seed_r as i64 + dr;
                if ir < 0 || ir > nr as i64 {
                    continue;
                }
                let ip = (seed_p as i64 + dp).rem_euclid(nphi as i64) as usize;
                if inside(ir as usize, ip) {
                    seed = Some((ir as usize, ip));
                    break 'search;
                }
            }
        }
    }
    let Some(seed) = seed else {
        return Err("leaf piece through the query is thinner than the tracing grid".into());
    };
    let mut queue = VecDeque::from([seed]);
    mask[idx(seed.0, seed.1)] = 1;
    let mut edges = Vec::new();
    while let Some((ir, ip)) = queue.pop_front() {
        let mut nbrs = vec![(ir, (ip + 1) % nphi), (ir, (ip + nphi - 1) % nphi)];
        if ir > 0 {
            nbrs.push((ir - 1, ip));
        }
        if ir < nr {
            nbrs.push((ir + 1, ip));
        }
        if ir == 0 || ir == nr {
            return Err("leaf piece reaches the edge of the tracing window".into());
        }
        for (jr, jp) in nbrs {
            let k = idx(jr, jp);
            if mask[k] == 0 {
                mask[k] = if inside(jr, jp) { 1 } else { 2 };
                if mask[k] == 1 {
                    queue.push_back((jr, jp));
                }
            }
            if mask[k] == 2 {
                edges.push(((ir, ip), (jr, jp)));
            }
        }
    }
    if edges.is_empty() {
        return Err("no boundary found".into());
    }
    let mut out = Vec::with_capacity(edges.len());
    for ((ar, ap), (br, bp)) in edges {
        // interpolate in (log r, φ), unwrapping φ across the seam
        let (ar, br) = (ar as f64, br as f64);
        let (ap, mut bp) = (ap as f64, bp as f64);
        if (bp - ap).abs() > 1.0 {
            bp = if bp > ap { bp - nphi as f64 } else { bp + nphi as f64 };
        }
        let at = |t: f64| leaf_point(c, w_at(ar + (br - ar) * t, ap + (bp - ap) * t), false);
        let (mut a, mut b) = (0.0, 1.0);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if p_gauge(r1, r3, &at(m)) <= 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        out.push(at(a));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeConfig {
    /// Witness-center grid resolution per planar factor.
    pub grid: usize,
    pub safety: f64,
    pub max_doublings: usize,
    pub bisection_rel_tol: f64,
}

impl Default for EscapeConfig {
    fn default() -> Self {
        EscapeConfig { grid: 64, safety: SAFETY, max_doublings: 60, bisection_rel_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeReport {
    pub r1: f64,
    /// Uniform bound `c = max_ζ max_{K_R} |f_ζ| < 1` at `R = r1`.
    pub margin: f64,
    pub r0: f64,
    /// `(R, log c(R))` for every tested `R`.
    pub schedule: Vec<(f64, f64)>,
    pub witness_centers: usize,
}

/// `log max_ζ max_{K_R}|f_ζ|` over grids of `ζ_x ∈ K_x` and `ζ_y ∈ B̄_{R₀}`;
/// the two planar factors separate.
pub fn escape_log_margin(kx: &ConvexSet, y: &FiberRegion, r0: f64, big_r: f64, grid: usize) -> f64 {
    let a = kx.grid(grid).iter().map(|&q| kx.max_dist_sq(q)).fold(0.0, f64::max);
    let yr = y.scaled(big_r);
    let zy = ConvexSet::Disc { center: [0.0, 0.0], radius: r0.max(f64::MIN_POSITIVE) }.grid(grid);
    let b = zy
        .iter()
        .map(|&q| {
            let d = yr.min_dist_to_boundary(q);
            // ζ_y outside Y_R: ∂Y_R still bounds |y − ζ_y| from below by d
            d * d
        })
        .fold(f64::INFINITY, f64::min);
    a - b
}

/// Smallest `R` on a doubling-then-bisection schedule such that every grid
/// witness `f_ζ`, `ζ ∈ K_x + iB̄_{R₀}`, has `max_{K_R}|f_ζ| < 1 − safety`.
pub fn hull_escape_radius(kx: &ConvexSet, y: &FiberRegion, r0: f64, config: &EscapeConfig) -> Result<EscapeReport, HullError> {
    kx.validate()?;
    y.validate()?;
    if !y.contains([0.0, 0.0]) {
        return Err(HullError::Precondition("the fiber Y must contain 0".into()));
    }
    if !(r0 >= 0.0 && r0.is_finite()) {
        return Err(HullError::InvalidParameter("R0 must be ≥ 0".into()));
    }
    let threshold = (-config.safety).ln_1p();
    let mut schedule = Vec::new();
    let test = |r: f64, schedule: &mut Vec<(f64, f64)>| {
        let v = escape_log_margin(kx, y, r0, r, config.grid);
        schedule.push((r, v));
        v < threshold
    };
    let mut hi = 1.0;
    let mut doublings = 0;
    while !test(hi, &mut schedule) {
        doublings += 1;
        if doublings > config.max_doublings {
            return Err(HullError::ScheduleExhausted(format!("no certified R up to {hi}")));
        }
        hi *= 2.0;
    }
    let mut lo = if doublings == 0 { 0.0 } else { hi / 2.0 };
    while hi - lo > config.bisection_rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if test(mid, &mut schedule) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let margin = escape_log_margin(kx, y, r0, hi, config.grid).exp();
    Ok(EscapeReport {
        r1: hi,
        margin,
        r0,
        schedule,
        witness_centers: config.grid * config.grid * 2,
    })
}

/// An affine 2-plane `origin + u·e_u + v·e_v` in R⁴ ordered `(x₁, x₂, y₁, y₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceSpec {
    #[serde(default)]
    pub origin: [f64; 4],
    pub e_u: [f64; 4],
    pub e_v: [f64; 4],
    /// `[u_min, u_max]`
    pub u_range: [f64; 2],
    pub v_range: [f64; 2],
}

impl SliceSpec {
    /// The plane `{x₂ = 0, y₁ = 0}` with coordinates `(x₁, y₂)`.
    pub fn x1_y2(u_range: [f64; 2], v_range: [f64; 2]) -> Self {
        SliceSpec { origin: [0.0; 4], e_u: [1.0, 0.0, 0.0, 0.0], e_v: [0.0, 0.0, 0.0, 1.0], u_range, v_range }
    }

    pub fn point(&self, u: f64, v: f64) -> C2 {
        let p: Vec<f64> = (0..4).map(|k| self.origin[k] + u * self.e_u[k] + v * self.e_v[k]).collect();
        C2::from_xy([p[0], p[1]], [p[2], p[3]])
    }

    fn validate(&self) -> Result<(), HullError> {
        let n = |a: &[f64; 4]| a.iter().map(|x| x * x).sum::<f64>();
        let d = self.e_u.iter().zip(&self.e_v).map(|(a, b)| a * b).sum::<f64>();
        if !(n(&self.e_u) > 0.0 && n(&self.e_v) > 0.0 && d * d < (1.0 - 1e-12) * n(&self.e_u) * n(&self.e_v)) {
            return Err(HullError::InvalidParameter("slice directions must be independent".into()));
        }
        if !(self.u_range[0] < self.u_range[1] && self.v_range[0] < self.v_range[1]) {
            return Err(HullError::InvalidParameter("slice ranges must be increasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SliceClass {
    InD,
    InEnvelopeAdded,
    InHullCertified,
    UnresolvedGap,
    /// Outside `D′ = (X ∪ holes) + iY`.
    Outside,
}

impl SliceClass {
    pub fn label(&self) -> &'static str {
        match self {
            SliceClass::InD => "in-D",
            SliceClass::InEnvelopeAdded => "in-envelope-added",
            SliceClass::InHullCertified => "in-hull-certified",
            SliceClass::UnresolvedGap => "unresolved-gap",
            SliceClass::Outside => "outside",
        }
    }

    /// In the envelope as assembled from inside.
    pub fn in_envelope(&self) -> bool {
        matches!(self, SliceClass::InD | SliceClass::InEnvelopeAdded)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceCell {
    pub u: f64,
    pub v: f64,
    pub class: SliceClass,
    /// Signed margin of the deciding test (membership margin, certificate
    /// log-ratio, or leaf residual).
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceCounts {
    pub in_d: usize,
    pub in_envelope_added: usize,
    pub in_hull_certified: usize,
    pub unresolved_gap: usize,
    pub outside: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceGrid {
    pub spec: SliceSpec,
    pub nu: usize,
    pub nv: usize,
    /// Row-major in `v`, then `u`.
    pub cells: Vec<SliceCell>,
    pub counts: SliceCounts,
    pub holes: Vec<ConvexSet>,
    /// Points both leaf-certified and excluded by a witness.
    pub contradictions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceConfig {
    pub samples: usize,
    pub leaf_samples: usize,
}

impl Default for SliceConfig {
    fn default() -> Self {
        SliceConfig { samples: 256, leaf_samples: 1024 }
    }
}

/// Classifies a grid on an affine slice of `D′ = (X ∪ holes) + iY`:
/// `E(D) = D′ \ ⋃_μ K̂_μ` with `K_μ = (closure of hole μ) + i∂Y`.
pub fn envelope_slice(
    x: &PlanarRegion,
    y: &FiberRegion,
    slice: &SliceSpec,
    grid: usize,
    config: &SliceConfig,
) -> Result<SliceGrid, HullError> {
    y.validate()?;
    slice.validate()?;
    let verdict = classify_holes(x);
    if verdict.verdict != HoleVerdict::Eligible {
        return Err(HullError::Hypothesis(format!(
            "the base must be convex with finitely many strictly convex holes: {}",
            verdict.reason
        )));
    }
    let holes: Vec<ConvexSet> = x.holes()?.iter().map(ConvexSet::from_hole).collect();
    let ks: Vec<TorusK> = holes
        .iter()
        .map(|h| TorusK::new(h.clone(), y.clone()))
        .collect::<Result<_, _>>()?;
    let n = grid.max(2);
    let cells: Vec<(SliceCell, bool)> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (iu, iv) = (k % n, k / n);
            let u = slice.u_range[0] + (slice.u_range[1] - slice.u_range[0]) * (iu as f64 + 0.5) / n as f64;
            let v = slice.v_range[0] + (slice.v_range[1] - slice.v_range[0]) * (iv as f64 + 0.5) / n as f64;
            let z = slice.point(u, v);
            let (class, margin, contradiction) = classify_point(x, y, &holes, &ks, &z, config);
            (SliceCell { u, v, class, margin }, contradiction)
        })
        .collect();
    let contradictions = cells.iter().filter(|c| c.1).count();
    let cells: Vec<SliceCell> = cells.into_iter().map(|c| c.0).collect();
    let count = |cl: SliceClass| cells.iter().filter(|c| c.class == cl).count();
    Ok(SliceGrid {
        spec: *slice,
        nu: n,
        nv: n,
        counts: SliceCounts {
            in_d: count(SliceClass::InD),
            in_envelope_added: count(SliceClass::InEnvelopeAdded),
            in_hull_certified: count(SliceClass::InHullCertified),
            unresolved_gap: count(SliceClass::UnresolvedGap),
            outside: count(SliceClass::Outside),
        },
        cells,
        holes,
        contradictions,
    })
}

fn classify_point(
    x: &PlanarRegion,
    y: &FiberRegion,
    holes: &[ConvexSet],
    ks: &[TorusK],
    z: &C2,
    config: &SliceConfig,
) -> (SliceClass, f64, bool) {
    if !y.contains(z.y()) {
        return (SliceClass::Outside, -1.0, false);
    }
    let m = x.contains(z.x());
    if m.inside {
        return (SliceClass::InD, m.margin, false);
    }
    let Some(mu) = holes.iter().position(|h| h.contains(z.x())) else {
        return (SliceClass::Outside, m.margin, false);
    };
    let (hole, k) = (&holes[mu], &ks[mu]);
    // outer: witnesses centered over the hole, with ζ_y at the fiber's center
    let centers = [C2::from_xy(hole.center(), [0.0, 0.0]), C2::from_xy(hole.center(), y.boundary_center())];
    let best = centers
        .iter()
        .map(|zeta| gaussian_certificate(zeta, z, k, config.samples, WitnessKind::ShiftedGaussian))
        .max_by(|a, b| {
            (a.log_value_at_query - a.log_max_modulus_on_k).total_cmp(&(b.log_value_at_query - b.log_max_modulus_on_k))
        })
        .expect("non-empty witness list");
    let excluded = best.verdict == HullVerdict::Excluded;
    // inner: leaf certificate when the hole and fiber are round
    let leaf = match (hole, y.flattened()) {
        (ConvexSet::Disc { center, radius }, FiberRegion::Ball { center: yc, radius: r3 }) => {
            let shifted = C2::from_xy(geom::sub(z.x(), *center), geom::sub(z.y(), yc));
            match torus_hull_contains(*radius, r3, &shifted) {
                Ok(true) => leaf_boundary_check(*radius, r3, &shifted, config.leaf_samples).ok(),
                _ => None,
            }
        }
        _ => None,
    };
    let certified = leaf.as_ref().is_some_and(|l| l.verdict == LeafVerdict::Certified);
    let log_ratio = best.log_value_at_query - best.log_max_modulus_on_k;
    match (excluded, certified) {
        (true, true) => (SliceClass::UnresolvedGap, 0.0, true),
        (true, false) => (SliceClass::InEnvelopeAdded, log_ratio, false),
        (false, true) => (SliceClass::InHullCertified, leaf.map_or(0.0, |l| -l.max_residual), false),
        (false, false) => (SliceClass::UnresolvedGap, log_ratio, false),
    }
}

impl FiberRegion {
    fn boundary_center(&self) -> Point {
        match self.flattened() {
            FiberRegion::Ball { center, .. } | FiberRegion::Ellipse { center, .. } => center,
            FiberRegion::ScaledCopy { .. } => unreachable!(),
        }
    }
}

/// Translates `K_x` by `d`; used to test translation equivariance.
pub fn translate_k(k: &TorusK, d: Point) -> TorusK {
    TorusK { kx: k.kx.translated(d), fiber: k.fiber.clone() }
}

#[cfg(test)]
mod tests;
