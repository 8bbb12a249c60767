use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulus::OracleMode;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    BuildTree,
    Shrink,
    MetricAudit,
    Modulus,
    Intersect,
    Dichotomy,
    PointSingularity,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::BuildTree => "build-tree",
            ExperimentKind::Shrink => "shrink",
            ExperimentKind::MetricAudit => "metric-audit",
            ExperimentKind::Modulus => "modulus",
            ExperimentKind::Intersect => "intersect",
            ExperimentKind::Dichotomy => "dichotomy",
            ExperimentKind::PointSingularity => "point-singularity",
        }
    }

    /// Experiments whose measure needs `λ < 2^{-1/n}`.
    fn needs_regular_lambda(self) -> bool {
        matches!(self, ExperimentKind::MetricAudit | ExperimentKind::Dichotomy | ExperimentKind::PointSingularity | ExperimentKind::Modulus)
    }
}

/// Where the surface family of a modulus experiment comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySource {
    /// Tori `{x} × fiber` over the annulus `r_in < |x| < r_out`.
    Product { base_res: usize, fiber_res: usize },
    /// Core tori of the copy of `word` in a full complex of the given depth.
    Core { word: String, depth: usize },
    /// A family JSON file; cell volumes may come from a complex dump instead.
    File { path: PathBuf, complex: Option<PathBuf> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulusConfig {
    pub family: FamilySource,
    /// Defaults to the conformal exponent `n/(n-2)`.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub oracle: OracleMode,
    #[serde(default)]
    pub dump_density: bool,
}

fn default_tol() -> f64 {
    1e-11
}
fn default_max_iter() -> usize {
    100_000
}
fn default_dimension() -> usize {
    3
}
fn default_lambda() -> f64 {
    0.4
}
fn default_delta0() -> f64 {
    0.5
}
fn default_mesh() -> f64 {
    0.1
}
fn default_ambient() -> f64 {
    crate::semmes::singular::DEFAULT_AMBIENT_PITCH
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_angular() -> usize {
    12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub kind: ExperimentKind,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Allows `λ ≥ 2^{-1/n}` in measure experiments.
    #[serde(default)]
    pub negative_control: bool,
    /// Tree or complex depth, `k_max` of audits and tables, or `K` of the singular space.
    pub depth: Option<usize>,
    pub epsilon: Option<f64>,
    /// Largest number of doublings a shrink run may enumerate.
    pub depth_cap: Option<usize>,
    #[serde(default)]
    pub targets: Vec<f64>,
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    #[serde(default = "default_mesh")]
    pub mesh_scale: f64,
    #[serde(default = "default_ambient")]
    pub ambient_pitch: f64,
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    pub threads: Option<usize>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_angular")]
    pub obj_angular: usize,
    #[serde(default)]
    pub dump_complex: bool,
    pub modulus: Option<ModulusConfig>,
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::ConfigInvalid { field: field.into(), message: message.into() }
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        serde_json::from_value(serde_json::json!({"schema": SCHEMA_VERSION, "kind": kind})).expect("defaults parse")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| invalid("config", e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn depth_or(&self, d: usize) -> usize {
        self.depth.unwrap_or(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(invalid("schema", format!("version {} is not {SCHEMA_VERSION}", self.schema)));
        }
        if self.dimension != 3 && self.dimension != 4 {
            return Err(invalid("dimension", format!("{} is not 3 or 4", self.dimension)));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(invalid("lambda", format!("{} is not in (0, 1)", self.lambda)));
        }
        let lmax = 2f64.powf(-1.0 / self.dimension as f64);
        if self.kind.needs_regular_lambda() && self.lambda >= lmax && !self.negative_control {
            return Err(invalid("lambda", format!("{} is not below 2^(-1/{}) = {lmax}; set negative_control to allow it", self.lambda, self.dimension)));
        }
        if self.negative_control && self.kind != ExperimentKind::MetricAudit {
            return Err(invalid("negative_control", "only metric-audit runs accept a negative control"));
        }
        for (field, v) in [("delta0", self.delta0), ("mesh_scale", self.mesh_scale), ("ambient_pitch", self.ambient_pitch)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(field, format!("{v} is not positive")));
            }
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0) {
                return Err(invalid("epsilon", format!("{e} is not positive")));
            }
        }
        if self.depth_cap.is_some_and(|d| d > 40) {
            return Err(invalid("depth_cap", "at most 40 doublings"));
        }
        if self.samples == Some(0) {
            return Err(invalid("samples", "must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        if self.obj_angular < 3 {
            return Err(invalid("obj_angular", "must be at least 3"));
        }
        match (&self.modulus, self.kind) {
            (None, ExperimentKind::Modulus) => return Err(invalid("modulus", "a modulus run needs a family")),
            (Some(m), _) => {
                if let Some(p) = m.p {
                    if !(p > 1.0) {
                        return Err(invalid("modulus.p", format!("{p} is not above 1")));
                    }
                }
                if !(m.tol > 0.0) {
                    return Err(invalid("modulus.tol", "must be positive"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}
