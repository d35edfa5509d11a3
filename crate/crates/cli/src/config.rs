//! Run configuration: strict JSON plus dotted-path overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use cphase::evolve::{DissipatorConfig, EvolveOptions, Method, SweepAxis};
use cphase::phonons::{Coupling, DotGeometry, MaterialParams, PhononEnvironment};
use cphase::pulses::DEFAULT_T_CUT;
use cphase::SystemParams;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    #[default]
    Adiabatic,
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseConfig {
    pub kind: GateKind,
    /// Peak drive (adiabatic) or constant drive (dynamic), meV.
    pub omega0_mev: f64,
    pub delta_mev: f64,
    /// Gaussian width; calibrated for a π conditional phase when absent.
    pub tau_ps: Option<f64>,
    pub t_cut: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self { kind: GateKind::Adiabatic, omega0_mev: 1.0, delta_mev: 5.0, tau_ps: None, t_cut: DEFAULT_T_CUT }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DissipatorsConfig {
    /// Spontaneous emission at the rate `system.gamma0`.
    pub radiative: bool,
    /// Phonon bath at `system.temperature_k`.
    pub phonons: bool,
    pub coupling: Coupling,
}

impl Default for DissipatorsConfig {
    fn default() -> Self {
        Self { radiative: true, phonons: true, coupling: Coupling::Deformation }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    #[default]
    Adaptive,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub samples: usize,
    pub method: SolverMethod,
    /// Step count for the fixed-step method.
    pub rk4_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = EvolveOptions::default();
        Self { tol: d.tol, samples: d.samples, method: SolverMethod::Adaptive, rk4_steps: 20_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    Raw,
    Peak,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectraConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    pub normalize: Normalization,
}

impl Default for SpectraConfig {
    fn default() -> Self {
        Self { omega_min: 0.0, omega_max: 15.0, points: 601, normalize: Normalization::Raw }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrateConfig {
    /// Detunings to calibrate (meV); empty means `pulse.delta_mev` only.
    pub deltas_mev: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateConfig {
    /// Detunings to run (meV); empty means `pulse.delta_mev` only.
    pub deltas_mev: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Axis names are dotted config paths, e.g. `pulse.delta_mev`.
    pub axes: Vec<SweepAxis>,
    pub observables: Vec<String>,
    /// Leakage thresholds separating the three `lz_band` classes.
    pub lz_thresholds: [f64; 2],
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { axes: Vec::new(), observables: vec!["purity".into(), "fidelity".into()], lz_thresholds: [0.01, 0.1] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LzConfig {
    pub taus_ps: Vec<f64>,
    pub samples: usize,
}

impl Default for LzConfig {
    fn default() -> Self {
        Self { taus_ps: vec![1.8, 20.0], samples: 401 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), formats: vec![Format::Csv] }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: SystemParams,
    pub material: MaterialParams,
    pub geometry: DotGeometry,
    pub pulse: PulseConfig,
    pub dissipators: DissipatorsConfig,
    pub solver: SolverConfig,
    pub spectra: SpectraConfig,
    pub calibrate: CalibrateConfig,
    pub gate: GateConfig,
    pub sweep: SweepConfig,
    pub lz: LzConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut value: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Copy of this config with one dotted-path field replaced.
    pub fn with_field(&self, path: &str, v: f64) -> Result<Self, CliError> {
        let mut value = serde_json::to_value(self).expect("config serializes");
        set_path(&mut value, path, Value::from(v))?;
        Self::from_value(value)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for w in self.system.validate().map_err(|e| CliError::Usage(e.to_string()))? {
            log::warn!("{w}");
        }
        self.material.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        self.geometry.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        self.evolve_options()?;
        if self.output.formats.is_empty() {
            return Err(CliError::Usage("output.formats is empty".into()));
        }
        Ok(())
    }

    pub fn environment(&self) -> Result<PhononEnvironment, CliError> {
        PhononEnvironment::new(self.material, self.geometry, self.dissipators.coupling)
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn dissipator_config(&self) -> Result<DissipatorConfig, CliError> {
        let d = &self.dissipators;
        Ok(DissipatorConfig {
            radiative: d.radiative.then_some(self.system.gamma0),
            phonons: if d.phonons { Some(self.environment()?) } else { None },
            temperature_k: self.system.temperature_k,
        })
    }

    pub fn evolve_options(&self) -> Result<EvolveOptions, CliError> {
        let s = &self.solver;
        let method = match s.method {
            SolverMethod::Adaptive => Method::Adaptive,
            SolverMethod::Rk4 => Method::FixedRk4 { steps: s.rk4_steps },
        };
        let opts = EvolveOptions { tol: s.tol, samples: s.samples, method, keep_states: false };
        opts.validate().map_err(|e| CliError::Usage(format!("solver: {e}")))?;
        Ok(opts)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

/// Applies `KEY=VALUE`, where VALUE is parsed as JSON and falls back to a
/// plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {assignment:?}")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    set_path(root, key.trim(), value)
}

fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(CliError::Usage(format!("bad config path {path:?}")));
    }
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Usage(format!("{} is not an object", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("path has at least one part")
}
