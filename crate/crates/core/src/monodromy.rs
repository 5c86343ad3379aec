//! Branch tracking for `log ℓ(z − o)` and `√(ℓ(z − o₁) ℓ(z − o₂))` along
//! polygonal paths in C², and sheet counting over spiral domains.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{refine_segment, segment_clearance, winding_number, ComplexLinearForm, LinalgError, PolyPath, TranslatedLine, C2};
use crate::planar::geom::{self, Point};
use crate::planar::{PlanarRegion, PolarCurve, RegionError, Shape};
use crate::tube::{golden_min, line_fiber_map, separation_radius, SeparationConfig, TubeError};

/// Relative tolerance of the germ invariant.
pub const GERM_TOL: f64 = 1e-10;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonodromyError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Tube(#[from] TubeError),
    #[error("path meets the branch locus on segment {segment} (|ℓ| = {value:e})")]
    OnBranchLocus { segment: usize, value: f64 },
    #[error("germ violates its defining relation (relative residual {residual:e})")]
    InvalidGerm { residual: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("continuation and winding disagree: {0}")]
    CrossCheck(String),
}

/// A multivalued function with branch locus a union of translated lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MultiFn {
    /// `log ℓ(z − offset)`
    LogOfForm {
        form: ComplexLinearForm,
        #[serde(default = "zero")]
        offset: C2,
    },
    /// `√(ℓ(z − offset1) · ℓ(z − offset2))`
    SqrtProduct { form: ComplexLinearForm, offset1: C2, offset2: C2 },
}

fn zero() -> C2 {
    C2::ZERO
}

impl MultiFn {
    pub fn log(form: ComplexLinearForm) -> Self {
        MultiFn::LogOfForm { form, offset: C2::ZERO }
    }

    /// `√((z₁ + 1 − iz₂)(z₁ − 1 − iz₂))`, branched along the reference line
    /// through `(±1, 0)`.
    pub fn bridged_sqrt() -> Self {
        MultiFn::SqrtProduct {
            form: ComplexLinearForm::reference(),
            offset1: C2::real(-1.0, 0.0),
            offset2: C2::real(1.0, 0.0),
        }
    }

    fn lines(&self) -> Vec<TranslatedLine<'_>> {
        match self {
            MultiFn::LogOfForm { form, offset } => vec![TranslatedLine { form, offset }],
            MultiFn::SqrtProduct { form, offset1, offset2 } => vec![
                TranslatedLine { form, offset: offset1 },
                TranslatedLine { form, offset: offset2 },
            ],
        }
    }

    /// `ℓ(z − o)` or the product of the two translated forms.
    pub fn argument(&self, z: &C2) -> Complex64 {
        self.lines().iter().map(|l| l.eval(z)).product()
    }

    /// Relative residual of `exp(v) = ℓ(z − o)` or `v² = product`.
    pub fn residual(&self, z: &C2, value: Complex64) -> f64 {
        let w = self.argument(z);
        match self {
            MultiFn::LogOfForm { .. } => (value.exp() - w).norm() / w.norm(),
            MultiFn::SqrtProduct { .. } => (value * value - w).norm() / w.norm(),
        }
    }

    /// The germ with the principal value at `base`.
    pub fn principal_germ(&self, base: C2) -> Result<Germ, MonodromyError> {
        let w = self.argument(&base);
        if !(w.norm() > 0.0) {
            return Err(MonodromyError::OnBranchLocus { segment: 0, value: w.norm() });
        }
        let value = match self {
            MultiFn::LogOfForm { .. } => w.ln(),
            MultiFn::SqrtProduct { .. } => w.sqrt(),
        };
        Germ::new(self.clone(), base, value)
    }

    /// Nearest value over `z` to `approx` among all branches.
    fn snap(&self, z: &C2, approx: Complex64) -> Complex64 {
        let w = self.argument(z);
        match self {
            MultiFn::LogOfForm { .. } => {
                let p = w.ln();
                let k = ((approx.im - p.im) / TWO_PI).round();
                Complex64::new(p.re, p.im + TWO_PI * k)
            }
            MultiFn::SqrtProduct { .. } => {
                let p = w.sqrt();
                if (approx / p).re >= 0.0 {
                    p
                } else {
                    -p
                }
            }
        }
    }
}

/// A function element: base point, value and the function it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Germ {
    pub func: MultiFn,
    pub base: C2,
    pub value: Complex64,
}

impl Germ {
    pub fn new(func: MultiFn, base: C2, value: Complex64) -> Result<Self, MonodromyError> {
        let g = Germ { func, base, value };
        g.check()?;
        Ok(g)
    }

    pub fn residual(&self) -> f64 {
        self.func.residual(&self.base, self.value)
    }

    pub fn check(&self) -> Result<(), MonodromyError> {
        let residual = self.residual();
        if !(residual < GERM_TOL) {
            return Err(MonodromyError::InvalidGerm { residual });
        }
        Ok(())
    }
}

/// Analytic continuation of `start` along `path`.
///
/// Each segment is split until every translated form turns by less than π/2
/// per step; the value is updated by principal logarithms (or square roots)
/// of the step ratios and re-anchored to the exact value at each vertex.
pub fn continue_branch(func: &MultiFn, path: &PolyPath, start: &Germ) -> Result<Germ, MonodromyError> {
    if start.func != *func {
        return Err(MonodromyError::Precondition("start germ belongs to another function".into()));
    }
    start.check()?;
    let first = path.first();
    if (first - start.base).norm() > 1e-12 * (1.0 + first.norm()) {
        return Err(MonodromyError::Precondition("start germ is not based at the first vertex".into()));
    }
    let lines = func.lines();
    let mut value = start.value;
    for (k, (p, q)) in path.segments().enumerate() {
        for line in &lines {
            let (v, ok) = segment_clearance(line, &p, &q);
            if !ok {
                return Err(MonodromyError::OnBranchLocus { segment: k, value: v });
            }
        }
        let ts = refine_segment(&lines, &p, &q);
        for w in ts.windows(2) {
            let a = p.lerp(&q, w[0]);
            let b = p.lerp(&q, w[1]);
            for line in &lines {
                let ratio = line.eval(&b) / line.eval(&a);
                debug_assert!(ratio.arg().abs() < FRAC_PI_2);
                match func {
                    MultiFn::LogOfForm { .. } => value += ratio.ln(),
                    MultiFn::SqrtProduct { .. } => value *= ratio.sqrt(),
                }
            }
        }
        value = func.snap(&q, value);
    }
    Germ::new(func.clone(), path.last(), value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Monodromy {
    /// Logarithm: the value changes by `increment = 2πi·winding`.
    Additive { increment: Complex64, winding: i64 },
    /// Square root: the value is multiplied by `factor = ±1`.
    Multiplicative { factor: i8, windings: [i64; 2] },
}

/// Monodromy of `func` around a closed loop, computed by continuation and
/// cross-checked against the winding numbers of the translated forms.
pub fn loop_monodromy(func: &MultiFn, path: &PolyPath) -> Result<Monodromy, MonodromyError> {
    if !path.is_closed() {
        return Err(MonodromyError::Precondition("loop must be closed".into()));
    }
    let start = func.principal_germ(path.first())?;
    let end = continue_branch(func, path, &start)?;
    match func {
        MultiFn::LogOfForm { form, offset } => {
            let increment = end.value - start.value;
            let winding = winding_number(path, form, offset)?;
            let expected = Complex64::new(0.0, TWO_PI * winding as f64);
            if (increment - expected).norm() > 1e-9 {
                return Err(MonodromyError::CrossCheck(format!("increment {increment} vs winding {winding}")));
            }
            Ok(Monodromy::Additive { increment, winding })
        }
        MultiFn::SqrtProduct { form, offset1, offset2 } => {
            let ratio = end.value / start.value;
            let factor: i8 = if ratio.re > 0.0 { 1 } else { -1 };
            let windings = [winding_number(path, form, offset1)?, winding_number(path, form, offset2)?];
            let parity: i8 = if (windings[0] + windings[1]).rem_euclid(2) == 0 { 1 } else { -1 };
            if factor != parity || (ratio - f64::from(factor)).norm() > 1e-9 {
                return Err(MonodromyError::CrossCheck(format!("ratio {ratio} vs windings {windings:?}")));
            }
            Ok(Monodromy::Multiplicative { factor, windings })
        }
    }
}

/// Outcome of the necessary condition for a Levi-extension hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopCheck {
    pub feasible: bool,
    /// Neither a witness nor a certified lower bound settled the question.
    pub inconclusive: bool,
    /// Minimum over the window curve of the fiber distance to `L_p`.
    pub min_fiber_distance: f64,
    pub lower_bound: f64,
    /// Window point `x` with `x + iT(x − p) ∈ L_p` and `|T(x − p)| < r`.
    pub witness: Option<Point>,
}

impl HopCheck {
    fn undecided() -> Self {
        HopCheck { feasible: false, inconclusive: true, min_fiber_distance: f64::NAN, lower_bound: 0.0, witness: None }
    }
}

/// Default window half-angle: a change of angle by π overall.
pub const DEFAULT_WINDOW_HALF_ANGLE: f64 = FRAC_PI_2;

/// Does `L_p = p + L`, `p = (cos θ, sin θ)`, meet `c((θ − w, θ + w)) + iB_r`?
///
/// Points of `L_p` are `p + ξ + iTξ`; the question is whether
/// `min |T(c(t) − p)| < r` over the window.
pub fn hop_check(curve: &PolarCurve, theta: f64, r: f64, form: &ComplexLinearForm, half_angle: f64) -> HopCheck {
    let failed = HopCheck::undecided();
    if !(r > 0.0 && half_angle > 0.0 && theta.is_finite()) {
        return failed;
    }
    let Some(t) = line_fiber_map(form) else { return failed };
    let p = geom::polar(1.0, theta);
    let lo = theta - half_angle;
    let hi = theta + half_angle;
    let fiber = |s: f64| {
        let d = geom::sub(curve.point(s), p);
        geom::norm([t[(0, 0)] * d[0] + t[(0, 1)] * d[1], t[(1, 0)] * d[0] + t[(1, 1)] * d[1]])
    };
    let n = 2048;
    let h = (hi - lo) / n as f64;
    // open window: interior samples only
    let samples: Vec<(f64, f64)> = (1..n).map(|k| lo + k as f64 * h).map(|s| (s, fiber(s))).collect();
    let &(s0, _) = samples.iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty window");
    let (s_best, v_best) = golden_min(&fiber, (s0 - h).max(lo + 1e-12), (s0 + h).min(hi - 1e-12), 1e-13);
    // |d/ds c(s)| ≤ max radius + max |r'(s)|
    let speed = curve.radius(lo).max(curve.radius(hi)).max(curve.radius(theta)) + speed_bound(curve, lo);
    let sampled_min = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let lower_bound = (sampled_min - t.norm() * speed * h).max(0.0);
    if v_best < r {
        HopCheck {
            feasible: true,
            inconclusive: false,
            min_fiber_distance: v_best,
            lower_bound: lower_bound.min(v_best),
            witness: Some(curve.point(s_best)),
        }
    } else {
        HopCheck {
            feasible: false,
            inconclusive: lower_bound < r,
            min_fiber_distance: v_best,
            lower_bound,
            witness: None,
        }
    }
}

/// Upper bound of `|r'(s)|` on `[lo, ∞)`.
fn speed_bound(curve: &PolarCurve, lo: f64) -> f64 {
    match *curve {
        PolarCurve::Spiral { s } => s * (-lo).exp().max(1.0),
        PolarCurve::Pinched { epsilon, .. } => epsilon / PI,
    }
}

/// [`hop_check`] for the pinched spiral `ψ_ε`.
pub fn hop_feasible(theta: f64, epsilon: f64, r: f64, form: &ComplexLinearForm, half_angle: f64) -> HopCheck {
    if !(epsilon > 0.0) {
        return HopCheck::undecided();
    }
    hop_check(&PolarCurve::Pinched { epsilon, shift: 0.0 }, theta, r, form, half_angle)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetEntry {
    /// Signed turn index `j`; the entry was recorded at `θ₀ + 2πj`.
    pub turn: i64,
    pub theta: f64,
    /// The value transported to the anchor.
    pub value: Complex64,
    pub germ_residual: f64,
    pub hop: HopCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetReport {
    pub anchor: C2,
    pub theta0: f64,
    pub turns: i64,
    pub fiber_radius: f64,
    pub separation_radius: f64,
    pub entries: Vec<SheetEntry>,
    pub distinct_count: usize,
    /// Common difference `v_{j+1} − v_j` when the entries form a progression.
    pub progression_step: Option<Complex64>,
    pub progression_residual: f64,
    pub all_hops_feasible: bool,
    pub hop_assumption_notes: String,
    /// Constants of the universal-cover chart; never computed.
    pub chart_constant_c: Option<f64>,
    pub chart_radius_rho: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheetConfig {
    pub window_half_angle: f64,
    /// Polygon vertices per turn of the central curve.
    pub steps_per_turn: usize,
    pub separation: SeparationConfig,
}

impl Default for SheetConfig {
    fn default() -> Self {
        SheetConfig {
            window_half_angle: DEFAULT_WINDOW_HALF_ANGLE,
            steps_per_turn: 256,
            separation: SeparationConfig::default(),
        }
    }
}

const HOP_NOTE: &str = "Each turn's value is moved to the anchor along a radial segment. This \
segment stands in for a Levi-extension hop, which is assumed and not verified. Only the \
necessary condition (the translated line meets the window tube) and avoidance of the branch \
locus are checked.";

/// Number of clusters of `values` separated by gaps `≥ π` in imaginary part.
pub fn distinct_count(values: &[Complex64]) -> usize {
    let mut ims: Vec<f64> = values.iter().map(|v| v.im).collect();
    ims.sort_by(f64::total_cmp);
    if ims.is_empty() {
        return 0;
    }
    1 + ims.windows(2).filter(|w| w[1] - w[0] >= PI).count()
}

fn central_curve(region: &PlanarRegion) -> Result<(PolarCurve, f64, f64), MonodromyError> {
    match region.shape() {
        Shape::SpiralStrip { s_min, s_max, theta_min, theta_max } => Ok((
            PolarCurve::Spiral { s: 0.5 * (s_min + s_max) },
            *theta_min,
            theta_max.unwrap_or(f64::INFINITY),
        )),
        Shape::PinchedSpiralNbhd { epsilon, theta_min, theta_max, .. } => Ok((
            PolarCurve::Pinched { epsilon: *epsilon, shift: 0.0 },
            theta_min.unwrap_or(f64::NEG_INFINITY),
            theta_max.unwrap_or(f64::INFINITY),
        )),
        _ => Err(MonodromyError::Precondition("sheets need a spiral strip or pinched spiral".into())),
    }
}

fn real_point(p: Point) -> C2 {
    C2::real(p[0], p[1])
}

/// Follows `log ℓ` along the central curve of a spiral for `turns` full
/// turns from `θ₀` (backwards when negative) and records, after every turn,
/// the value transported radially to the anchor `(cos θ₀, sin θ₀)`.
pub fn exhibit_sheets(
    region: &PlanarRegion,
    form: &ComplexLinearForm,
    r: f64,
    theta0: f64,
    turns: i64,
    config: &SheetConfig,
) -> Result<SheetReport, MonodromyError> {
    let (curve, lo, hi) = central_curve(region)?;
    let theta_end = theta0 + TWO_PI * turns as f64;
    if !(theta0.min(theta_end) > lo && theta0.max(theta_end) < hi) {
        return Err(MonodromyError::Precondition(format!(
            "turns from θ₀ = {theta0} to {theta_end} leave the spiral's range ({lo}, {hi})"
        )));
    }
    if !(r > 0.0) {
        return Err(MonodromyError::Precondition("fiber radius must be positive".into()));
    }
    let big_r = separation_radius(form, region, &config.separation)?.value();
    if !(r < big_r) {
        return Err(MonodromyError::Precondition(format!(
            "fiber radius {r} is not below the separation radius {big_r}"
        )));
    }
    let func = MultiFn::log(*form);
    let anchor = real_point(geom::polar(1.0, theta0));
    let dir = turns.signum() as f64;
    let steps = config.steps_per_turn.max(8);

    let mut germ = func.principal_germ(real_point(curve.point(theta0)))?;
    let mut entries = Vec::new();
    for j in 0..=turns.abs() {
        let theta = theta0 + dir * TWO_PI * j as f64;
        if j > 0 {
            let prev = theta - dir * TWO_PI;
            let pts: Vec<C2> = (0..=steps)
                .map(|k| real_point(curve.point(prev + dir * TWO_PI * k as f64 / steps as f64)))
                .collect();
            germ = continue_branch(&func, &PolyPath::open(pts)?, &germ)?;
        }
        let hop_path = PolyPath::open(vec![germ.base, anchor])?;
        let at_anchor = continue_branch(&func, &hop_path, &germ)?;
        entries.push(SheetEntry {
            turn: dir as i64 * j,
            theta,
            value: at_anchor.value,
            germ_residual: at_anchor.residual(),
            hop: hop_check(&curve, theta, r, form, config.window_half_angle),
        });
    }

    let values: Vec<Complex64> = entries.iter().map(|e| e.value).collect();
    let (progression_step, progression_residual) = progression(&values);
    let all_hops_feasible = entries.iter().all(|e| e.hop.feasible);
    Ok(SheetReport {
        anchor,
        theta0,
        turns,
        fiber_radius: r,
        separation_radius: big_r,
        distinct_count: distinct_count(&values),
        progression_step,
        progression_residual,
        all_hops_feasible,
        hop_assumption_notes: HOP_NOTE.to_string(),
        chart_constant_c: None,
        chart_radius_rho: None,
        entries,
    })
}

/// Common difference (rounded to a multiple of 2πi) and the largest
/// deviation from it.
fn progression(values: &[Complex64]) -> (Option<Complex64>, f64) {
    if values.len() < 2 {
        return (None, 0.0);
    }
    let d0 = values[1] - values[0];
    let step = Complex64::new(0.0, TWO_PI * (d0.im / TWO_PI).round());
    let residual = values
        .windows(2)
        .map(|w| (w[1] - w[0] - step).norm())
        .fold(0.0, f64::max);
    (Some(step), residual)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvidenceVerdict {
    Complete,
    EvidenceIncomplete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalCoverReport {
    pub epsilon: f64,
    pub fiber_radius: f64,
    pub turns: i64,
    pub half_width: f64,
    /// Values at the anchor ordered by turn index `−m, …, m`.
    pub values: Vec<(i64, Complex64)>,
    pub distinct_count: usize,
    pub monotone: bool,
    pub hops: Vec<(i64, HopCheck)>,
    pub all_hops_feasible: bool,
    pub verdict: EvidenceVerdict,
    pub hop_assumption_notes: String,
    pub chart_constant_c: Option<f64>,
    pub chart_radius_rho: Option<f64>,
}

/// Anchor angle for universal-cover evidence.
pub const UNIVERSAL_THETA0: f64 = FRAC_PI_2;
/// Tube half-width (in turns) of the pinched spiral neighborhood.
pub const UNIVERSAL_HALF_WIDTH: f64 = 0.25;

/// Sheet values over `(cos θ₀, sin θ₀)` for `m` turns in both directions of
/// the pinched spiral; backwards the spiral accumulates on the unit circle.
pub fn universal_cover_evidence(
    epsilon: f64,
    r: f64,
    form: &ComplexLinearForm,
    turns: u32,
    config: &SheetConfig,
) -> Result<UniversalCoverReport, MonodromyError> {
    let m = i64::from(turns);
    let span = TWO_PI * m as f64 + PI;
    let region = PlanarRegion::pinched_spiral(
        epsilon,
        UNIVERSAL_HALF_WIDTH,
        Some(UNIVERSAL_THETA0 - span),
        Some(UNIVERSAL_THETA0 + span),
    )?;
    let forward = exhibit_sheets(&region, form, r, UNIVERSAL_THETA0, m, config)?;
    let backward = exhibit_sheets(&region, form, r, UNIVERSAL_THETA0, -m, config)?;
    let mut entries: Vec<&SheetEntry> = backward.entries.iter().skip(1).chain(forward.entries.iter()).collect();
    entries.sort_by_key(|e| e.turn);
    let values: Vec<(i64, Complex64)> = entries.iter().map(|e| (e.turn, e.value)).collect();
    let hops: Vec<(i64, HopCheck)> = entries.iter().map(|e| (e.turn, e.hop)).collect();
    let ims: Vec<f64> = values.iter().map(|v| v.1.im).collect();
    let monotone = ims.windows(2).all(|w| w[1] > w[0]) || ims.windows(2).all(|w| w[1] < w[0]);
    let distinct = distinct_count(&values.iter().map(|v| v.1).collect::<Vec<_>>());
    let all_hops_feasible = hops.iter().all(|h| h.1.feasible);
    let complete = all_hops_feasible && monotone && distinct == values.len();
    Ok(UniversalCoverReport {
        epsilon,
        fiber_radius: r,
        turns: m,
        half_width: UNIVERSAL_HALF_WIDTH,
        distinct_count: distinct,
        values,
        monotone,
        hops,
        all_hops_feasible,
        verdict: if complete { EvidenceVerdict::Complete } else { EvidenceVerdict::EvidenceIncomplete },
        hop_assumption_notes: HOP_NOTE.to_string(),
        chart_constant_c: None,
        chart_radius_rho: None,
    })
}

#[cfg(test)]
mod tests;
