//! Scenario dispatch. `run_scenario` is pure; writing files is separate so
//! repeated runs can be compared byte for byte.

use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use tube_envelope_core::hull::{
    self, ConvexSet, EscapeConfig, HullError, HullVerdict, LeafVerdict, SliceConfig, SliceGrid, TorusK, WitnessKind,
};
use tube_envelope_core::linalg::{C2, LinalgError, PolyPath};
use tube_envelope_core::monodromy::{
    exhibit_sheets, loop_monodromy, universal_cover_evidence, EvidenceVerdict, Monodromy, MonodromyError, MultiFn,
    SheetConfig,
};
use tube_envelope_core::planar::{classify_holes, HoleVerdict, RegionError};
use tube_envelope_core::tube::{separation_radius, FiberRegion, SeparationConfig, SeparationRadius, TubeError};

use crate::figure::{self, FigureError};
use crate::report::{AssumptionFlag, RunReport, Status};
use crate::scenario::*;

/// A file produced by a run, named relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }
}

/// Command-line overrides applied on top of the scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, s: &mut Scenario) {
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(g) = self.grid {
            s.tolerances.grid = Some(g);
        }
        if let Some(t) = self.tol {
            s.tolerances.tol = Some(t);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Failure {
    status: Status,
    reason: String,
}

impl Failure {
    fn invalid(reason: impl Into<String>) -> Self {
        Failure { status: Status::InvalidInput, reason: reason.into() }
    }
    fn hypothesis(reason: impl Into<String>) -> Self {
        Failure { status: Status::HypothesisViolation, reason: reason.into() }
    }
    fn inconclusive(reason: impl Into<String>) -> Self {
        Failure { status: Status::Inconclusive, reason: reason.into() }
    }
}

impl From<LinalgError> for Failure {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::OnBranchLocus { .. } | LinalgError::NotTransverse | LinalgError::NoGraph => {
                Failure::hypothesis(e.to_string())
            }
            LinalgError::Numerical(_) => Failure::inconclusive(e.to_string()),
            LinalgError::InvalidInput(_) => Failure::invalid(e.to_string()),
        }
    }
}

impl From<RegionError> for Failure {
    fn from(e: RegionError) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<TubeError> for Failure {
    fn from(e: TubeError) -> Self {
        match e {
            TubeError::Linalg(e) => e.into(),
            TubeError::Region(e) => e.into(),
            TubeError::InvalidParameter(_) => Failure::invalid(e.to_string()),
            TubeError::NoPositiveRadius { .. } | TubeError::FlatPoint { .. } => Failure::hypothesis(e.to_string()),
        }
    }
}

impl From<MonodromyError> for Failure {
    fn from(e: MonodromyError) -> Self {
        match e {
            MonodromyError::Linalg(e) => e.into(),
            MonodromyError::Region(e) => e.into(),
            MonodromyError::Tube(e) => e.into(),
            MonodromyError::OnBranchLocus { .. } | MonodromyError::Precondition(_) => {
                Failure::hypothesis(e.to_string())
            }
            MonodromyError::InvalidGerm { .. } => Failure::invalid(e.to_string()),
            MonodromyError::CrossCheck(_) => Failure::inconclusive(e.to_string()),
        }
    }
}

impl From<HullError> for Failure {
    fn from(e: HullError) -> Self {
        match e {
            HullError::Tube(e) => e.into(),
            HullError::Region(e) => e.into(),
            HullError::InvalidParameter(_) => Failure::invalid(e.to_string()),
            HullError::Precondition(_) | HullError::Hypothesis(_) => Failure::hypothesis(e.to_string()),
            HullError::ScheduleExhausted(_) => Failure::inconclusive(e.to_string()),
        }
    }
}

impl From<FigureError> for Failure {
    fn from(e: FigureError) -> Self {
        match e {
            FigureError::Region(e) => e.into(),
            _ => Failure::invalid(e.to_string()),
        }
    }
}

struct Success {
    status: Status,
    reason: Option<String>,
    results: Value,
    assumptions: Vec<AssumptionFlag>,
    artifacts: Vec<Artifact>,
}

impl Success {
    fn ok(results: impl Serialize) -> Self {
        Success {
            status: Status::Ok,
            reason: None,
            results: to_value(results),
            assumptions: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    fn inconclusive_if(mut self, cond: bool, reason: &str) -> Self {
        if cond {
            self.status = Status::Inconclusive;
            self.reason = Some(reason.into());
        }
        self
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn c2(v: [f64; 4]) -> C2 {
    C2::from_xy([v[0], v[1]], [v[2], v[3]])
}

/// Runs a parsed scenario. Never panics on bad input: every failure becomes
/// a report with a status and reason.
pub fn run_scenario(scenario: &Scenario) -> Outcome {
    let result = scenario.inputs().map_err(|e| Failure::invalid(e.0)).and_then(|inputs| dispatch(scenario, inputs));
    match result {
        Ok(s) => {
            let mut report = RunReport::new(scenario.clone(), s.status);
            report.reason = s.reason;
            report.results = s.results;
            report.assumptions = s.assumptions;
            report.files = s.artifacts.iter().map(|a| a.name.clone()).collect();
            Outcome { report, artifacts: s.artifacts }
        }
        Err(f) => {
            let mut report = RunReport::new(scenario.clone(), f.status);
            report.reason = Some(f.reason);
            Outcome { report, artifacts: Vec::new() }
        }
    }
}

/// Reads, parses and runs a scenario file.
pub fn run_file(path: &Path, overrides: &Overrides) -> Result<Outcome, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut s = Scenario::parse(&text).map_err(|e| e.0)?;
    overrides.apply(&mut s);
    Ok(run_scenario(&s))
}

/// Writes the artifacts and then the report into `dir`.
pub fn write_outcome(outcome: &Outcome, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for a in &outcome.artifacts {
        fs::write(dir.join(&a.name), &a.bytes)?;
    }
    fs::write(dir.join(&outcome.report.scenario.outputs.report), outcome.report.to_bytes())
}

fn dispatch(s: &Scenario, inputs: Inputs) -> Result<Success, Failure> {
    match inputs {
        Inputs::Radius(i) => radius(s, i),
        Inputs::Monodromy(i) => monodromy(s, i),
        Inputs::Sheets(i) => sheets(s, i),
        Inputs::Universal(i) => universal(s, i),
        Inputs::HullPoint(i) => hull_point(s, i),
        Inputs::Escape(i) => escape(s, i),
        Inputs::EnvelopeSlice(i) => envelope_slice(s, i),
        Inputs::Convexity(i) => convexity(i),
        Inputs::Figure(i) => figure(s, i),
    }
}

fn separation_config(t: &Tolerances, default_grid: usize) -> SeparationConfig {
    let d = SeparationConfig::default();
    SeparationConfig {
        seeds: t.seeds.unwrap_or(d.seeds),
        grid: t.grid.unwrap_or(default_grid),
        step_tol: t.tol.unwrap_or(d.step_tol),
    }
}

fn radius(s: &Scenario, i: RadiusInputs) -> Result<Success, Failure> {
    let config = separation_config(&s.tolerances, SeparationConfig::default().grid);
    let r = separation_radius(&i.form, &i.region, &config)?;
    let certified = match &r {
        SeparationRadius::Finite(rep) => rep.certified,
        SeparationRadius::Infinite { .. } => true,
    };
    let mut out = Success::ok(json!({ "separation_radius": r }))
        .inconclusive_if(!certified, "the grid certification found a point below the computed radius");
    if let SeparationRadius::Finite(rep) = &r {
        out.assumptions.push(AssumptionFlag::new(
            "sampling-confidence",
            format!(
                "minimum from {} multistart seeds, checked on a {}x{} grid; Lipschitz lower bound {}",
                rep.seeds, rep.grid, rep.grid, rep.lipschitz_lower_bound
            ),
        ));
    }
    Ok(out)
}

fn multi_fn(f: &FunctionSpec) -> MultiFn {
    match f {
        FunctionSpec::Log { form, offset } => MultiFn::LogOfForm { form: *form, offset: c2(*offset) },
        FunctionSpec::SqrtProduct { form, offset1, offset2 } => MultiFn::SqrtProduct {
            form: *form,
            offset1: c2(*offset1),
            offset2: c2(*offset2),
        },
        FunctionSpec::BridgedSqrt => MultiFn::bridged_sqrt(),
    }
}

#[derive(Serialize)]
struct LoopResult {
    label: String,
    vertices: usize,
    monodromy: Monodromy,
}

fn monodromy(s: &Scenario, i: MonodromyInputs) -> Result<Success, Failure> {
    let func = multi_fn(&i.function);
    let mut results = Vec::new();
    for (k, l) in i.loops.iter().enumerate() {
        let path = match l {
            LoopSpec::RealCircle { center, radius, vertices } => PolyPath::real_circle(*center, *radius, *vertices)?,
            LoopSpec::Polygon { vertices } => PolyPath::closed(vertices.iter().map(|v| c2(*v)).collect())?,
        };
        results.push(LoopResult {
            label: format!("loop-{k}"),
            vertices: path.vertices().len(),
            monodromy: loop_monodromy(&func, &path)?,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut made = 0;
    let mut attempts = 0;
    while made < i.random_loops {
        attempts += 1;
        if attempts > 100 * i.random_loops + 100 {
            return Err(Failure::inconclusive("could not draw random loops avoiding the branch locus"));
        }
        let n = rng.gen_range(3..=12);
        let verts: Vec<C2> = (0..n).map(|_| c2(std::array::from_fn(|_| rng.gen_range(-2.0..2.0)))).collect();
        let Ok(path) = PolyPath::closed(verts) else { continue };
        // loops that graze the locus are redrawn
        let Ok(m) = loop_monodromy(&func, &path) else { continue };
        results.push(LoopResult { label: format!("random-{made}"), vertices: n, monodromy: m });
        made += 1;
    }
    if results.is_empty() {
        return Err(Failure::invalid("no loops given"));
    }
    Ok(Success::ok(json!({ "function": func, "loops": results })))
}

fn sheet_config(t: &Tolerances) -> SheetConfig {
    SheetConfig { separation: separation_config(t, 256), ..SheetConfig::default() }
}

fn sheets(s: &Scenario, i: SheetsInputs) -> Result<Success, Failure> {
    let rep = exhibit_sheets(&i.region, &i.form, i.fiber_radius, i.theta0, i.turns, &sheet_config(&s.tolerances))?;
    let feasible = rep.all_hops_feasible;
    let note = rep.hop_assumption_notes.clone();
    let mut out = Success::ok(rep).inconclusive_if(!feasible, "a hop failed its necessary condition");
    out.assumptions.push(AssumptionFlag::new("levi-hop", note));
    Ok(out)
}

fn universal(s: &Scenario, i: UniversalInputs) -> Result<Success, Failure> {
    let rep = universal_cover_evidence(i.epsilon, i.fiber_radius, &i.form, i.turns, &sheet_config(&s.tolerances))?;
    let incomplete = rep.verdict == EvidenceVerdict::EvidenceIncomplete;
    let note = rep.hop_assumption_notes.clone();
    let mut out = Success::ok(rep).inconclusive_if(incomplete, "evidence-incomplete");
    out.assumptions.push(AssumptionFlag::new("levi-hop", note));
    Ok(out)
}

/// Translation taking a round `K` to the centered solid torus, if round.
fn round_torus(k: &TorusK) -> Option<(f64, f64, C2)> {
    match (&k.kx, k.fiber.flattened()) {
        (ConvexSet::Disc { center, radius }, FiberRegion::Ball { center: yc, radius: r3 }) => {
            Some((*radius, r3, C2::from_xy(*center, yc)))
        }
        _ => None,
    }
}

fn hull_point(s: &Scenario, i: HullPointInputs) -> Result<Success, Failure> {
    let k = TorusK::new(i.kx, i.fiber)?;
    let z = c2(i.point);
    let samples = s.tolerances.samples.unwrap_or(hull::DEFAULT_SAMPLES);
    let mut certs = vec![hull::fixed_witness(&z, &k, samples)];
    for w in &i.witness_centers {
        certs.push(hull::gaussian_certificate(&c2(*w), &z, &k, samples, WitnessKind::ShiftedGaussian));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let ry = k.fiber.outer_radius();
    let c = k.kx.center();
    let reach = k.kx.max_dist_sq(c).sqrt();
    for _ in 0..i.random_witnesses {
        let zx = loop {
            let p = [c[0] + rng.gen_range(-reach..=reach), c[1] + rng.gen_range(-reach..=reach)];
            if k.kx.contains(p) {
                break p;
            }
        };
        let zy = loop {
            let p = [rng.gen_range(-ry..=ry), rng.gen_range(-ry..=ry)];
            if p[0].hypot(p[1]) <= ry {
                break p;
            }
        };
        certs.push(hull::gaussian_certificate(&C2::from_xy(zx, zy), &z, &k, samples, WitnessKind::ShiftedGaussian));
    }
    let excluded = certs.iter().any(|c| c.verdict == HullVerdict::Excluded);
    let low_confidence = certs.iter().any(|c| c.low_confidence);
    let leaf = match round_torus(&k) {
        Some((r1, r3, shift)) => {
            let w = z - shift;
            if hull::torus_hull_contains(r1, r3, &w)? {
                Some(hull::leaf_boundary_check(r1, r3, &w, samples)?)
            } else {
                None
            }
        }
        None => None,
    };
    let certified = leaf.as_ref().is_some_and(|l| l.verdict == LeafVerdict::Certified);
    let verdict = match (excluded, certified) {
        (true, true) => return Err(Failure::inconclusive("a witness excludes a leaf-certified point")),
        (true, false) => "excluded",
        (false, true) => "in-hull-certified",
        (false, false) => "unresolved",
    };
    let mut out = Success::ok(json!({ "verdict": verdict, "certificates": certs, "leaf": leaf }))
        .inconclusive_if(verdict == "unresolved", "no certificate decided the point");
    if low_confidence {
        out.assumptions.push(AssumptionFlag::new(
            "sampling-confidence",
            "a sampled maximum on K disagreed with the analytic maximum or used few samples",
        ));
    }
    Ok(out)
}

fn escape(s: &Scenario, i: EscapeInputs) -> Result<Success, Failure> {
    let config = EscapeConfig { grid: s.tolerances.grid.unwrap_or(64), ..EscapeConfig::default() };
    let rep = hull::hull_escape_radius(&i.kx, &i.fiber, i.r0, &config)?;
    let mut out = Success::ok(rep);
    out.assumptions.push(AssumptionFlag::new(
        "sampling-confidence",
        format!("witness centers range over {}x{} grids in each real factor", config.grid, config.grid),
    ));
    Ok(out)
}

fn slice_grid(s: &Scenario, i: &SliceInputs) -> Result<SliceGrid, Failure> {
    let config = SliceConfig { samples: s.tolerances.samples.unwrap_or(SliceConfig::default().samples), ..SliceConfig::default() };
    Ok(hull::envelope_slice(&i.base, &i.fiber, &i.slice, s.tolerances.grid.unwrap_or(128), &config)?)
}

fn slice_csv(g: &SliceGrid) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["u", "v", "class", "margin"]).expect("in-memory write");
    for c in &g.cells {
        w.write_record([c.u.to_string(), c.v.to_string(), c.class.label().to_string(), c.margin.to_string()])
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn envelope_slice(s: &Scenario, i: SliceInputs) -> Result<Success, Failure> {
    let g = slice_grid(s, &i)?;
    let mut artifacts = Vec::new();
    if let Some(name) = &s.outputs.csv {
        artifacts.push(Artifact { name: name.clone(), bytes: slice_csv(&g) });
    }
    if let Some(name) = &s.outputs.svg {
        artifacts.push(Artifact { name: name.clone(), bytes: figure::envelope_slice(&g)?.into_bytes() });
    }
    let mut out = Success::ok(json!({
        "nu": g.nu,
        "nv": g.nv,
        "counts": g.counts,
        "holes": g.holes,
        "contradictions": g.contradictions,
    }))
    .inconclusive_if(g.contradictions > 0, "a point was both leaf-certified and excluded");
    if g.counts.unresolved_gap > 0 {
        out.assumptions.push(AssumptionFlag::new(
            "sampling-confidence",
            format!("{} cells are unresolved between the two certificates", g.counts.unresolved_gap),
        ));
    }
    out.artifacts = artifacts;
    Ok(out)
}

fn convexity(i: ConvexityInputs) -> Result<Success, Failure> {
    let c = classify_holes(&i.region);
    let inconclusive = c.verdict == HoleVerdict::Inconclusive;
    Ok(Success::ok(c).inconclusive_if(inconclusive, "convexity classification inconclusive"))
}

fn figure(s: &Scenario, i: FigureInputs) -> Result<Success, Failure> {
    let (kind, svg, mut results) = match &i {
        FigureInputs::SpiralCrossSection { region, truncate_at } => {
            let svg = figure::spiral_cross_section(region, *truncate_at)?;
            let turns = figure::path_points(&svg, "centerline").map(|p| figure::tangent_revolutions(&p));
            ("spiral-cross-section", svg, json!({ "centerline_revolutions": turns }))
        }
        FigureInputs::PinchedSpiral { region, truncate_at } => {
            ("pinched-spiral", figure::pinched_spiral(region, *truncate_at)?, json!({}))
        }
        FigureInputs::BridgedAnnulus { region } => ("bridged-annulus", figure::bridged_annulus(region)?, json!({})),
        FigureInputs::EnvelopeSlice(si) => {
            let g = slice_grid(s, si)?;
            ("envelope-slice", figure::envelope_slice(&g)?, json!({ "counts": g.counts }))
        }
    };
    let name = s.outputs.svg.clone().unwrap_or_else(|| format!("{kind}.svg"));
    results["kind"] = json!(kind);
    results["svg"] = json!(name);
    results["svg_bytes"] = json!(svg.len());
    let mut out = Success::ok(results);
    if matches!(i, FigureInputs::SpiralCrossSection { .. } | FigureInputs::PinchedSpiral { .. }) {
        out.assumptions.push(AssumptionFlag::new("truncation", "unbounded spirals are drawn up to the cutoff angle"));
    }
    out.artifacts.push(Artifact { name, bytes: svg.into_bytes() });
    Ok(out)
}
