//! Run configuration files.
//!
//! A configuration is TOML with six flat sections:
//!
//! ```toml
//! [model]
//! dim = 2
//! kind = "soler"          # soler | free | cubic | quadratic
//!
//! [grid]
//! n = 256
//! half_width = 64.0
//!
//! [data]
//! profile = "gaussian"    # gaussian | bump | polynomial-decay
//! epsilon = 0.05
//!
//! [time]
//! dt = 0.01
//! t_final = 40.0
//!
//! [output]
//! snapshot_stride = 1000
//! diagnostic_stride = 10
//!
//! [diagnostics]
//! delta = 0.05
//! ```
//!
//! `cubic` takes `h` and `f` as row-major lists of `[re, im]` pairs and
//! `quadratic` takes `e` the same way. `[output]` and `[diagnostics]` may be
//! omitted.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clifford::{build_gamma, CliffordRep, Matrix, ModelSpec};
use crate::diagnostics::DEFAULT_DELTA;
use crate::error::{ConfigViolation, Error, Result};
use crate::evolution::SimConfig;
use crate::grid::Grid;
use crate::initial_data::{build_large_datum, effective_radius, DataFamilyParams, Profile, MAX_AUDIT_ORDER};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Soler,
    Free,
    Cubic,
    Quadratic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub dim: usize,
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub profile: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    #[serde(default)]
    pub t0: f64,
    pub t_final: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Defaults to the step count: only the initial and final states.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,
    #[serde(default = "default_diagnostic_stride")]
    pub diagnostic_stride: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { snapshot_stride: None, diagnostic_stride: default_diagnostic_stride() }
    }
}

fn default_diagnostic_stride() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_audit_order")]
    pub audit_order: usize,
    /// Threshold for the small-norm sum of the data audit.
    #[serde(default = "default_epsilon_threshold")]
    pub epsilon_threshold: f64,
    #[serde(default = "default_sobolev")]
    pub sobolev: f64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            delta: default_delta(),
            audit_order: default_audit_order(),
            epsilon_threshold: default_epsilon_threshold(),
            sobolev: default_sobolev(),
        }
    }
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_audit_order() -> usize {
    3
}

fn default_epsilon_threshold() -> f64 {
    1.0
}

fn default_sobolev() -> f64 {
    1.0
}

/// A configuration file as written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub data: DataSection,
    pub time: TimeSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
}

/// A validated configuration with everything needed to start a run.
#[derive(Clone, Debug)]
pub struct ResolvedConfig {
    pub raw: RunConfig,
    pub sim: SimConfig,
    pub data: DataFamilyParams,
    pub rep: CliffordRep,
    pub delta: f64,
    pub audit_order: usize,
    pub epsilon_threshold: f64,
    pub sobolev: f64,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(vec![ConfigViolation::new("parse", e.to_string())]))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Canonical TOML; re-parsing it yields an equal configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical TOML, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        let mut s = String::with_capacity(64);
        for b in digest.iter() {
            write!(s, "{b:02x}").unwrap();
        }
        s
    }

    pub fn profile(&self) -> Result<Profile> {
        match (self.data.profile.as_str(), self.data.rate) {
            ("gaussian", None) => Ok(Profile::Gaussian),
            ("bump", None) => Ok(Profile::Bump),
            ("polynomial-decay", Some(rate)) => Ok(Profile::PolynomialDecay { rate }),
            ("polynomial-decay", None) => Err(Error::Data("polynomial-decay needs a rate".into())),
            ("gaussian" | "bump", Some(_)) => Err(Error::Data(format!("profile {} takes no rate", self.data.profile))),
            (other, _) => Err(Error::Data(format!("unknown profile {other:?}"))),
        }
    }

    pub fn model_spec(&self, rep: &CliffordRep) -> Result<ModelSpec> {
        let m = &self.model;
        let extra = |name: &str, given: bool| {
            if given {
                Err(Error::Model(format!("{name} is not used by model kind {:?}", m.kind)))
            } else {
                Ok(())
            }
        };
        match m.kind {
            ModelKind::Soler | ModelKind::Free => {
                extra("h", m.h.is_some())?;
                extra("f", m.f.is_some())?;
                extra("e", m.e.is_some())?;
                Ok(if m.kind == ModelKind::Soler { ModelSpec::soler(rep) } else { ModelSpec::free(rep) })
            }
            ModelKind::Cubic => {
                extra("e", m.e.is_some())?;
                let h = matrix(m.h.as_deref().ok_or_else(|| Error::Model("cubic model needs h".into()))?)?;
                let f = matrix(m.f.as_deref().ok_or_else(|| Error::Model("cubic model needs f".into()))?)?;
                ModelSpec::cubic(rep, h, f)
            }
            ModelKind::Quadratic => {
                extra("h", m.h.is_some())?;
                extra("f", m.f.is_some())?;
                let e = m.e.as_deref().ok_or_else(|| Error::Model("quadratic model needs e".into()))?;
                ModelSpec::quadratic(rep, complexes(e))
            }
        }
    }

    /// Validates every rule and returns all violations at once.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let mut v = Vec::new();
        let rep = match build_gamma(self.model.dim) {
            Ok(rep) => rep,
            Err(e) => return Err(Error::Config(vec![ConfigViolation::new("d ∈ {2, 3}", e.to_string())])),
        };
        let model = self.model_spec(&rep).map_err(|e| ConfigViolation::new("admissible model", e.to_string()));
        let grid = Grid::new(self.model.dim, self.grid.n, self.grid.half_width)
            .map_err(|e| ConfigViolation::new("grid", e.to_string()));
        let profile = self.profile().map_err(|e| ConfigViolation::new("data profile", e.to_string()));
        let eps = self.data.epsilon;
        if !(eps > 0.0 && eps <= crate::initial_data::MAX_EPSILON) {
            v.push(ConfigViolation::new("ε ∈ (0, 1/2]", format!("ε = {eps}")));
        }
        let delta = self.diagnostics.delta;
        if !(delta > 0.0 && delta < 0.125) {
            v.push(ConfigViolation::new("δ ∈ (0, 1/8)", format!("δ = {delta}")));
        }
        if self.diagnostics.audit_order > MAX_AUDIT_ORDER {
            v.push(ConfigViolation::new(
                "audit order",
                format!("{} exceeds {MAX_AUDIT_ORDER}", self.diagnostics.audit_order),
            ));
        }
        if !(self.diagnostics.epsilon_threshold > 0.0) {
            v.push(ConfigViolation::new(
                "epsilon threshold > 0",
                format!("{}", self.diagnostics.epsilon_threshold),
            ));
        }
        if ![0.0, 1.0, 2.0].contains(&self.diagnostics.sobolev) {
            v.push(ConfigViolation::new("sobolev ∈ {0, 1, 2}", format!("{}", self.diagnostics.sobolev)));
        }
        let (model, grid, profile) = match (model, grid, profile) {
            (Ok(m), Ok(g), Ok(p)) => (m, g, p),
            (m, g, p) => {
                v.extend(m.err());
                v.extend(g.err());
                v.extend(p.err());
                return Err(Error::Config(v));
            }
        };
        let data = DataFamilyParams { profile, epsilon: eps, dim: self.model.dim };
        if let Profile::PolynomialDecay { rate } = profile {
            if !(rate > self.model.dim as f64 / 2.0) {
                v.push(ConfigViolation::new("square-integrable profile", format!("rate {rate} ≤ d/2")));
            }
        }
        let mut sim = SimConfig {
            model,
            grid,
            dt: self.time.dt,
            t0: self.time.t0,
            t_final: self.time.t_final,
            snapshot_stride: 1,
            diagnostic_stride: self.output.diagnostic_stride,
        };
        sim.snapshot_stride = self.output.snapshot_stride.unwrap_or_else(|| sim.num_steps().max(1));
        let support = if v.is_empty() {
            build_large_datum(&data, &grid, &rep).map(|f| effective_radius(&f)).unwrap_or(f64::INFINITY)
        } else {
            0.0
        };
        v.extend(sim.validate(support));
        if !v.is_empty() {
            return Err(Error::Config(v));
        }
        Ok(ResolvedConfig {
            raw: self.clone(),
            sim,
            data,
            rep,
            delta,
            audit_order: self.diagnostics.audit_order,
            epsilon_threshold: self.diagnostics.epsilon_threshold,
            sobolev: self.diagnostics.sobolev,
        })
    }
}

fn complexes(pairs: &[[f64; 2]]) -> Vec<C64> {
    pairs.iter().map(|[re, im]| C64::new(*re, *im)).collect()
}

fn matrix(pairs: &[[f64; 2]]) -> Result<Matrix> {
    Matrix::from_row_major(&complexes(pairs))
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<ResolvedConfig> {
    RunConfig::load(path)?.resolve()
}
