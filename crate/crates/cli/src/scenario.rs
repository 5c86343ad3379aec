//! Scenario files: `{schema_version, command, inputs, outputs, tolerances, seed}`.
//!
//! The envelope is parsed first with unknown fields rejected; `inputs` is then
//! parsed against the record for `command`, again rejecting unknown fields.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use tube_envelope_core::hull::{ConvexSet, SliceSpec};
use tube_envelope_core::linalg::ComplexLinearForm;
use tube_envelope_core::planar::PlanarRegion;
use tube_envelope_core::tube::FiberRegion;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Radius,
    Monodromy,
    Sheets,
    Universal,
    HullPoint,
    Escape,
    EnvelopeSlice,
    Convexity,
    Figure,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Radius => "radius",
            Command::Monodromy => "monodromy",
            Command::Sheets => "sheets",
            Command::Universal => "universal",
            Command::HullPoint => "hull-point",
            Command::Escape => "escape",
            Command::EnvelopeSlice => "envelope-slice",
            Command::Convexity => "convexity",
            Command::Figure => "figure",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(Value::String(s.to_string())).map_err(|_| format!("unknown command `{s}`"))
    }
}

/// Output file names, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_report")]
    pub report: String,
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub svg: Option<String>,
}

fn default_report() -> String {
    "report.json".into()
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { report: default_report(), csv: None, svg: None }
    }
}

/// Numerical knobs; every field is optional and has a per-command default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Grid resolution (certification grid, slice grid, witness grid).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Step tolerance of one-dimensional refinements.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Samples on `K` for witness cross-checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Multistart seeds for the separation radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub command: Command,
    pub inputs: Value,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError(pub String);

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ScenarioError {}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError(format!("scenario: {e}")))?;
        if s.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                s.schema_version
            )));
        }
        s.inputs()?;
        Ok(s)
    }

    pub fn new(command: Command, inputs: Value) -> Self {
        Scenario {
            schema_version: SCHEMA_VERSION,
            command,
            inputs,
            outputs: Outputs::default(),
            tolerances: Tolerances::default(),
            seed: 0,
        }
    }

    pub fn inputs(&self) -> Result<Inputs, ScenarioError> {
        fn typed<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T, ScenarioError> {
            serde_json::from_value(v.clone()).map_err(|e| ScenarioError(format!("inputs: {e}")))
        }
        let v = &self.inputs;
        Ok(match self.command {
            Command::Radius => Inputs::Radius(typed(v)?),
            Command::Monodromy => Inputs::Monodromy(typed(v)?),
            Command::Sheets => Inputs::Sheets(typed(v)?),
            Command::Universal => Inputs::Universal(typed(v)?),
            Command::HullPoint => Inputs::HullPoint(typed(v)?),
            Command::Escape => Inputs::Escape(typed(v)?),
            Command::EnvelopeSlice => Inputs::EnvelopeSlice(typed(v)?),
            Command::Convexity => Inputs::Convexity(typed(v)?),
            Command::Figure => Inputs::Figure(typed(v)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Inputs {
    Radius(RadiusInputs),
    Monodromy(MonodromyInputs),
    Sheets(SheetsInputs),
    Universal(UniversalInputs),
    HullPoint(HullPointInputs),
    Escape(EscapeInputs),
    EnvelopeSlice(SliceInputs),
    Convexity(ConvexityInputs),
    Figure(FigureInputs),
}

fn reference_form() -> ComplexLinearForm {
    ComplexLinearForm::reference()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiusInputs {
    #[serde(default = "reference_form")]
    pub form: ComplexLinearForm,
    pub region: PlanarRegion,
}

/// A multivalued function on `C² \ L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Log {
        #[serde(default = "reference_form")]
        form: ComplexLinearForm,
        /// `[x₁, x₂, y₁, y₂]`
        #[serde(default)]
        offset: [f64; 4],
    },
    SqrtProduct {
        #[serde(default = "reference_form")]
        form: ComplexLinearForm,
        offset1: [f64; 4],
        offset2: [f64; 4],
    },
    /// `√((z₁ − iz₂ + 1)(z₁ − iz₂ − 1))`
    BridgedSqrt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoopSpec {
    /// Circle in the real plane `R²_x`.
    RealCircle {
        center: [f64; 2],
        radius: f64,
        #[serde(default = "default_circle_vertices")]
        vertices: usize,
    },
    /// Closed polygon with vertices `[x₁, x₂, y₁, y₂]`.
    Polygon { vertices: Vec<[f64; 4]> },
}

fn default_figure_cutoff() -> f64 {
    8.0 * std::f64::consts::PI
}

fn default_circle_vertices() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonodromyInputs {
    pub function: FunctionSpec,
    #[serde(default)]
    pub loops: Vec<LoopSpec>,
    /// Additional seeded random polygonal loops in `[−2, 2]⁴`.
    #[serde(default)]
    pub random_loops: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheetsInputs {
    pub region: PlanarRegion,
    #[serde(default = "reference_form")]
    pub form: ComplexLinearForm,
    pub fiber_radius: f64,
    #[serde(default = "default_theta0")]
    pub theta0: f64,
    pub turns: i64,
}

fn default_theta0() -> f64 {
    std::f64::consts::FRAC_PI_2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniversalInputs {
    pub epsilon: f64,
    pub fiber_radius: f64,
    pub turns: u32,
    #[serde(default = "reference_form")]
    pub form: ComplexLinearForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HullPointInputs {
    pub kx: ConvexSet,
    pub fiber: FiberRegion,
    /// `[x₁, x₂, y₁, y₂]`
    pub point: [f64; 4],
    /// Centers `ζ` of additional witnesses `f_ζ`.
    #[serde(default)]
    pub witness_centers: Vec<[f64; 4]>,
    /// Additional seeded centers drawn from `K_x + iB̄_{outer radius of Y}`.
    #[serde(default)]
    pub random_witnesses: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscapeInputs {
    pub kx: ConvexSet,
    pub fiber: FiberRegion,
    pub r0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceInputs {
    pub base: PlanarRegion,
    pub fiber: FiberRegion,
    pub slice: SliceSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexityInputs {
    pub region: PlanarRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FigureInputs {
    SpiralCrossSection {
        region: PlanarRegion,
        /// `|θ|` cutoff for unbounded spirals.
        #[serde(default = "default_figure_cutoff")]
        truncate_at: f64,
    },
    PinchedSpiral {
        region: PlanarRegion,
        #[serde(default = "default_figure_cutoff")]
        truncate_at: f64,
    },
    BridgedAnnulus { region: PlanarRegion },
    EnvelopeSlice(SliceInputs),
}
