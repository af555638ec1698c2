//! Experiment configuration: TOML with every field optional and defaults
//! pinned to the canonical parameter set (nu = 1, Delta = 1e-4, T = 2,
//! gamma = 0.005), so an empty config reproduces the reference trajectory.

use std::path::PathBuf;

use mpemba_core::model::{BathSpec, VModelParams};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    V,
    Lambda,
    Multibath,
    Classical,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "default_kind")]
    pub kind: ModelKind,
    /// Excited-manifold frequency (energy units; hbar = k_B = 1).
    #[serde(default = "default_nu")]
    pub nu: f64,
    /// Quasi-degenerate splitting, 0 <= delta < nu.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_kind() -> ModelKind {
    ModelKind::V
}
fn default_nu() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    1e-4
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { kind: default_kind(), nu: default_nu(), delta: default_delta() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Ohmic cutoff frequency; omitted = no cutoff.
    #[serde(default)]
    pub omega_c: Option<f64>,
}

fn default_temperature() -> f64 {
    2.0
}
fn default_gamma() -> f64 {
    0.005
}

impl Default for BathSection {
    fn default() -> Self {
        Self { temperature: default_temperature(), gamma: default_gamma(), omega_c: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PreparationKind {
    Ground,
    MaximallyMixed,
    Mpemba,
    PerturbedMpemba,
    ExplicitMatrix,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreparationSection {
    #[serde(default = "default_prep_kind")]
    pub kind: PreparationKind,
    /// Free coherence weight for the Mpemba construction.
    #[serde(default)]
    pub c2: Option<f64>,
    /// Relative perturbation for the near-Mpemba state.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Path to a matrix file ("re im" pairs, one row per line).
    #[serde(default)]
    pub path: Option<PathBuf>,
}

fn default_prep_kind() -> PreparationKind {
    PreparationKind::Ground
}
fn default_epsilon() -> f64 {
    0.001
}

impl Default for PreparationSection {
    fn default() -> Self {
        Self { kind: default_prep_kind(), c2: None, epsilon: default_epsilon(), path: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// First sample time; default 0.1/nu.
    #[serde(default)]
    pub t_min: Option<f64>,
    /// Horizon; default 10*tau1.
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default = "default_ppd")]
    pub points_per_decade: usize,
}

fn default_ppd() -> usize {
    20
}

impl Default for GridSection {
    fn default() -> Self {
        Self { t_min: None, t_max: None, points_per_decade: default_ppd() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSection {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    /// "log" (default) or "linear".
    #[serde(default = "default_scale")]
    pub scale: String,
}

fn default_scale() -> String {
    "log".into()
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub delta: Option<RangeSection>,
    #[serde(default)]
    pub temperature: Option<RangeSection>,
    #[serde(default)]
    pub gamma: Option<RangeSection>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub bath: BathSection,
    /// Extra baths for the multibath model (the `[bath]` section is the
    /// first one).
    #[serde(default)]
    pub baths: Vec<BathSection>,
    #[serde(default)]
    pub preparation: PreparationSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

impl ExperimentConfig {
    pub fn load(path: Option<&std::path::Path>) -> Result<Self, String> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let cfg: Self = toml::from_str(&text)
            .map_err(|e| format!("invalid config {}: {e}", path.display()))?;
        if cfg.grid.points_per_decade == 0 {
            return Err("grid.points_per_decade must be positive".into());
        }
        Ok(cfg)
    }

    /// Validated quantum-model parameters; the error names the violated
    /// constraint. The classical command validates through its own
    /// generator builder (it admits delta = 0).
    pub fn params(&self) -> Result<VModelParams, String> {
        VModelParams::new(self.model.nu, self.model.delta).map_err(|e| e.to_string())
    }

    pub fn bath_spec(&self, section: &BathSection) -> Result<BathSpec, String> {
        match section.omega_c {
            Some(wc) => BathSpec::with_cutoff(section.temperature, section.gamma, wc),
            None => BathSpec::new(section.temperature, section.gamma),
        }
        .map_err(|e| e.to_string())
    }

    /// All configured baths, `[bath]` first.
    pub fn all_baths(&self) -> Result<Vec<BathSpec>, String> {
        let mut out = vec![self.bath_spec(&self.bath)?];
        for b in &self.baths {
            out.push(self.bath_spec(b)?);
        }
        Ok(out)
    }
}

/// Expands a range section into concrete sample values.
pub fn expand_range(r: &RangeSection, what: &str) -> Result<Vec<f64>, String> {
    if r.points == 0 {
        return Err(format!("sweep.{what}.points must be positive"));
    }
    if r.points == 1 {
        return Ok(vec![r.min]);
    }
    if r.max <= r.min {
        return Err(format!("sweep.{what}: max must exceed min"));
    }
    let n = r.points;
    match r.scale.as_str() {
        "log" => {
            if r.min <= 0.0 {
                return Err(format!("sweep.{what}: log scale needs positive min"));
            }
            let (a, b) = (r.min.ln(), r.max.ln());
            Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
        }
        "linear" => {
            Ok((0..n).map(|i| r.min + (r.max - r.min) * i as f64 / (n - 1) as f64).collect())
        }
        other => Err(format!("sweep.{what}.scale = {other:?} (expected \"log\" or \"linear\")")),
    }
}
