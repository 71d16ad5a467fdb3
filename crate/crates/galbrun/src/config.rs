//! JSON configuration: background models and run settings.
//!
//! A profile may be given inline (any core `RadialProfile`) or as
//! `{"kind": "csv", "path": "rho.csv", "interpolation": "monotone-cubic"}`
//! pointing at a two-column `r,value` file. Lines starting with `#` are
//! comments. Relative paths resolve against the directory of the config.

use std::fs;
use std::path::{Path, PathBuf};

use galbrun_core::background::{BackgroundModel, Interpolation, ModelError, RadialProfile, SamplingSpec};
use galbrun_core::calculus::quadrature::RuleOrder;
use galbrun_core::radial_solver::{AssemblyOptions, Formulation, SourceSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

const PROFILES: [&str; 5] = ["rho", "cs", "p", "phi", "gamma"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("profile `{profile}` from {path}: {reason}")]
    Csv { profile: String, path: PathBuf, reason: String },
    #[error("invalid model: {0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Schema(String),
}

fn read(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse(path: &Path, text: &str) -> Result<Value, ConfigError> {
    serde_json::from_str(text).map_err(|source| ConfigError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a two-column `r,value` table.
pub fn read_profile_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), String> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| e.to_string())?;
    let (mut r, mut v) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != 2 {
            return Err(format!("row {}: expected 2 columns, found {}", i + 1, rec.len()));
        }
        let x: f64 = rec[0].parse().map_err(|_| format!("row {}: bad radius `{}`", i + 1, &rec[0]))?;
        let y: f64 = rec[1].parse().map_err(|_| format!("row {}: bad value `{}`", i + 1, &rec[1]))?;
        r.push(x);
        v.push(y);
    }
    Ok((r, v))
}

fn resolve_profile(name: &str, value: &mut Value, base: &Path) -> Result<(), ConfigError> {
    let Some(obj) = value.as_object() else {
        return Ok(());
    };
    if obj.get("kind").and_then(Value::as_str) != Some("csv") {
        return Ok(());
    }
    let rel = obj
        .get("path")
        .and_then(Value::as_str)
        .ok_or_else(|| ConfigError::Schema(format!("profile `{name}`: csv profile needs a `path`")))?;
    let interpolation: Interpolation = match obj.get("interpolation") {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| ConfigError::Schema(format!("profile `{name}`: {e}")))?,
        None => Interpolation::default(),
    };
    let path = base.join(rel);
    let (r, values) = read_profile_csv(&path).map_err(|reason| ConfigError::Csv {
        profile: name.to_string(),
        path: path.clone(),
        reason,
    })?;
    *value = serde_json::to_value(RadialProfile::Tabulated {
        r,
        values,
        interpolation,
        slopes: Vec::new(),
    })
    .expect("profile serializes");
    Ok(())
}

/// Builds a model from a JSON value, resolving CSV profiles against `base`.
pub fn model_from_value(mut value: Value, base: &Path) -> Result<BackgroundModel, ConfigError> {
    if let Some(obj) = value.as_object_mut() {
        for name in PROFILES {
            if let Some(p) = obj.get_mut(name) {
                resolve_profile(name, p, base)?;
            }
        }
    }
    let model: BackgroundModel = serde_json::from_value(value).map_err(|e| ConfigError::Schema(format!("model: {e}")))?;
    Ok(model.new()?)
}

pub fn load_model(path: &Path) -> Result<BackgroundModel, ConfigError> {
    let v = parse(path, &read(path)?)?;
    model_from_value(v, path.parent().unwrap_or(Path::new(".")))
}

/// Complex number as `[re, im]`.
pub type Pair = [f64; 2];

pub fn complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormsConfig {
    /// Random pairs for the reformulation identity.
    pub pairs: usize,
    /// Random fields for the imaginary-part, flow and coercivity checks.
    pub fields: usize,
    pub rtol: f64,
    pub atol: f64,
    /// Outer integration radius; `2 r3` when absent.
    pub r_out: Option<f64>,
    pub quadrature: RuleOrder,
    pub angle_grid: usize,
    /// Coercivity threshold factor on `min(gamma_min |omega|, cs_min^2)`.
    pub coercivity_factor: f64,
}

impl Default for FormsConfig {
    fn default() -> Self {
        Self {
            pairs: 50,
            fields: 20,
            rtol: galbrun_core::forms::IDENTITY_RTOL,
            atol: galbrun_core::forms::IDENTITY_ATOL,
            r_out: None,
            quadrature: RuleOrder::default(),
            angle_grid: 1000,
            coercivity_factor: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmsConfig {
    pub r_ext: f64,
    pub c0: Pair,
    pub c1: Pair,
    pub kappa: Pair,
    /// `(interior, exterior)` element counts, coarse to fine.
    pub meshes: Vec<[usize; 2]>,
}

impl Default for MmsConfig {
    fn default() -> Self {
        Self {
            r_ext: 3.0,
            c0: [1.0, 0.5],
            c1: [-0.3, 0.2],
            kappa: [0.7, -0.4],
            meshes: vec![[25, 50], [50, 100], [100, 200], [200, 400]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Source,
    Mms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub scenario: Scenario,
    pub formulation: Formulation,
    pub source: SourceSpec,
    /// Truncation radius: `R_ext` for the coupled solver, `R` otherwise.
    pub r_outer: f64,
    /// Target element size.
    pub h: f64,
    pub mms: MmsConfig,
    pub assembly: AssemblyOptions,
}

pub fn default_source() -> SourceSpec {
    SourceSpec::ShellBump {
        re: 1.0,
        im: 0.0,
        inner: 0.2,
        outer: 0.8,
    }
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Source,
            formulation: Formulation::Coupled,
            source: default_source(),
            r_outer: 3.0,
            h: 0.01,
            mms: MmsConfig::default(),
            assembly: AssemblyOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub source: SourceSpec,
    pub h: f64,
    pub radii: Vec<f64>,
    /// Pass threshold on the interior difference at the largest radius.
    pub tolerance: f64,
    pub assembly: AssemblyOptions,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            source: default_source(),
            h: 0.01,
            radii: vec![3.0, 4.0, 5.0, 6.0],
            tolerance: 1e-3,
            assembly: AssemblyOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Slack in `theta + tau < pi/2`; `min(0.1, (pi/2 - theta)/2)` when
    /// absent.
    pub tau: Option<f64>,
    /// Plateau of the Cowling profile; `pi/2 - theta - tau` when absent.
    pub mu_star: Option<f64>,
    /// Peak of the coupled profile at `r2`; `pi/2 - theta - tau` when absent.
    pub mu_r2: Option<f64>,
    /// Plateau of the coupled profile beyond `r3`; `mu_r2 / 2` when absent.
    pub mu_star_coupled: Option<f64>,
    pub mu_samples: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            tau: None,
            mu_star: None,
            mu_r2: None,
            mu_star_coupled: None,
            mu_samples: 10_000,
        }
    }
}

/// Everything a command needs. A config file without a `model` key is read
/// as a bare model with default settings.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub model: BackgroundModel,
    pub seed: u64,
    pub sampling: SamplingSpec,
    pub forms: FormsConfig,
    pub solve: SolveConfig,
    pub compare: CompareConfig,
    pub diagnostics: DiagnosticsConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    model: Value,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    sampling: Option<SamplingSpec>,
    #[serde(default)]
    forms: FormsConfig,
    #[serde(default)]
    solve: SolveConfig,
    #[serde(default)]
    compare: CompareConfig,
    #[serde(default)]
    diagnostics: DiagnosticsConfig,
}

impl RunConfig {
    pub fn with_model(model: BackgroundModel) -> Self {
        Self {
            model,
            seed: 0,
            sampling: SamplingSpec::default(),
            forms: FormsConfig::default(),
            solve: SolveConfig::default(),
            compare: CompareConfig::default(),
            diagnostics: DiagnosticsConfig::default(),
        }
    }

    pub fn from_value(value: Value, base: &Path) -> Result<Self, ConfigError> {
        let is_run = value.as_object().is_some_and(|o| o.contains_key("model"));
        if !is_run {
            return Ok(Self::with_model(model_from_value(value, base)?));
        }
        let raw: RawRun = serde_json::from_value(value).map_err(|e| ConfigError::Schema(format!("run config: {e}")))?;
        let model = match raw.model {
            Value::String(rel) => load_model(&base.join(rel))?,
            v => model_from_value(v, base)?,
        };
        let mut sampling = raw.sampling.unwrap_or_default();
        sampling.seed = raw.seed;
        Ok(Self {
            model,
            seed: raw.seed,
            sampling,
            forms: raw.forms,
            solve: raw.solve,
            compare: raw.compare,
            diagnostics: raw.diagnostics,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let v = parse(path, &read(path)?)?;
        Self::from_value(v, path.parent().unwrap_or(Path::new(".")))
    }

    /// Replaces every seed with `seed`.
    pub fn reseed(&mut self, seed: u64) {
        self.seed = seed;
        self.sampling.seed = seed;
    }
}
