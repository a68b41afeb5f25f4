//! Scenario configuration: a JSON document validated up front. Unknown keys
//! are rejected everywhere.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use polargate::dynamics::PropagationOptions;
use polargate::{preset, Geometry, MoleculeSpec, Scheme, SchemeParams, System};

use crate::CliError;

/// A preset name or an inline molecule description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MoleculeRef {
    Preset(String),
    Inline(Box<MoleculeSpec>),
}

impl MoleculeRef {
    pub fn resolve(&self) -> Result<MoleculeSpec, CliError> {
        match self {
            MoleculeRef::Preset(name) => Ok(preset(name)?),
            MoleculeRef::Inline(spec) => {
                spec.validate()?;
                Ok((**spec).clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculePair {
    pub a: MoleculeRef,
    /// Defaults to the same species as `a`.
    #[serde(default)]
    pub b: Option<MoleculeRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: Scheme,
    /// rad/s; omit for instantaneous pulses.
    #[serde(default)]
    pub pulse_rabi: Option<f64>,
    #[serde(default = "one")]
    pub rho_e_target: f64,
    /// V/m
    #[serde(default)]
    pub dc_field: f64,
    #[serde(default = "one")]
    pub pulse_area_scale: f64,
    /// Moves the separation so that |V|/Ω equals this (blockade only).
    #[serde(default)]
    pub blockade_ratio: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Tolerance on |χ − π| for the CZ verdict, rad.
    #[serde(default = "default_cz_tol")]
    pub cz_tolerance: f64,
    /// Coherence time used for the operations budget; defaults to the
    /// shorter of the two molecules' values.
    #[serde(default)]
    pub coherence_time: Option<f64>,
}

fn default_cz_tol() -> f64 {
    1e-3
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { cz_tolerance: default_cz_tol(), coherence_time: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub ratios: Vec<f64>,
}

/// Exactly one way of fixing the separation spread must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    /// Absolute spread of r, m.
    #[serde(default)]
    pub sep_sigma: Option<f64>,
    /// Spread of r relative to the nominal separation.
    #[serde(default)]
    pub sep_sigma_rel: Option<f64>,
    /// K; needs `trap_omega`. Uses the mass of molecule A.
    #[serde(default)]
    pub temperature: Option<f64>,
    /// rad/s
    #[serde(default)]
    pub trap_omega: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: u64,
}

fn default_samples() -> u64 {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub molecules: MoleculePair,
    pub geometry: Geometry,
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub propagation: PropagationOptions,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub thermal: Option<ThermalConfig>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
    #[serde(default)]
    pub seed: u64,
}

/// A config that has passed every check, with the physics objects built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub params: SchemeParams,
}

impl ScenarioConfig {
    pub fn from_json(src: &str) -> Result<Self, CliError> {
        serde_json::from_str(src).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&src)
    }

    /// Runs all invariant checks and assembles the scheme parameters.
    pub fn validate(self) -> Result<Scenario, CliError> {
        let a = self.molecules.a.resolve()?;
        let b = match &self.molecules.b {
            Some(b) => b.resolve()?,
            None => a.clone(),
        };
        let system = System::new(a, b, self.geometry)?;
        self.propagation.validate()?;
        let s = &self.scheme;
        let mut params = SchemeParams::new(s.kind, system);
        if let Some(rabi) = s.pulse_rabi {
            params = params.with_rabi(rabi);
        }
        params.rho_e_target = s.rho_e_target;
        params.dc_field = s.dc_field;
        params.pulse_area_scale = s.pulse_area_scale;
        params.validate()?;
        if let Some(ratio) = s.blockade_ratio {
            if s.kind != Scheme::Blockade {
                return Err(CliError::Config("blockade_ratio only applies to the blockade scheme".into()));
            }
            if !(ratio > 0.0) {
                return Err(CliError::Config(format!("blockade_ratio must be > 0, got {ratio}")));
            }
            params = params.with_blockade_ratio(ratio)?;
        }
        if !(self.analysis.cz_tolerance > 0.0) {
            return Err(CliError::Config("cz_tolerance must be > 0".into()));
        }
        if let Some(t) = self.analysis.coherence_time {
            if !(t > 0.0) {
                return Err(CliError::Config("coherence_time must be > 0".into()));
            }
        }
        if let Some(scan) = &self.scan {
            if scan.ratios.is_empty() {
                return Err(CliError::Config("scan.ratios is empty".into()));
            }
            if scan.ratios.iter().any(|r| !(*r > 0.0)) || scan.ratios.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::Config("scan.ratios must be positive and strictly increasing".into()));
            }
        }
        if let Some(th) = &self.thermal {
            let ways = [th.sep_sigma.is_some(), th.sep_sigma_rel.is_some(), th.temperature.is_some()]
                .iter()
                .filter(|&&x| x)
                .count();
            if ways != 1 {
                return Err(CliError::Config(
                    "thermal needs exactly one of sep_sigma, sep_sigma_rel, temperature".into(),
                ));
            }
            if th.temperature.is_some() != th.trap_omega.is_some() {
                return Err(CliError::Config("thermal.temperature and thermal.trap_omega go together".into()));
            }
            if th.samples < polargate::analysis::MIN_THERMAL_SAMPLES {
                return Err(CliError::Config(format!(
                    "thermal.samples must be >= {}",
                    polargate::analysis::MIN_THERMAL_SAMPLES
                )));
            }
        }
        Ok(Scenario { config: self, params })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "molecules": {"a": "CO"},
        "geometry": {"architecture": "lattice", "r": 1e-6, "theta": 0.0},
        "scheme": {"kind": "direct"}
    }"#;

    #[test]
    fn minimal_config() {
        let s = ScenarioConfig::from_json(MINIMAL).unwrap().validate().unwrap();
        assert_eq!(s.params.system.a.name, "13CO");
        assert!(s.params.instantaneous_pulses);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let src = MINIMAL.replace(r#""theta": 0.0"#, r#""theta": 0.0, "thetta": 1.0"#);
        assert!(matches!(ScenarioConfig::from_json(&src), Err(CliError::Config(_))));
        let src = MINIMAL.replace(r#""kind": "direct""#, r#""kind": "direct", "rabi": 3"#);
        assert!(ScenarioConfig::from_json(&src).is_err());
    }

    #[test]
    fn inline_molecule() {
        let src = r#"{
            "molecules": {"a": {"name": "toy", "levels": [
                {"label": "0", "dipole_expectation": 0.0},
                {"label": "1", "dipole_expectation": 0.0},
                {"label": "e", "dipole_expectation": 2.0}
            ], "mass": 1e-25, "coherence_time": 0.5}, "b": "CO"},
            "geometry": {"architecture": "lattice", "r": 1e-6},
            "scheme": {"kind": "direct"}
        }"#;
        let s = ScenarioConfig::from_json(src).unwrap().validate().unwrap();
        assert_eq!(s.params.system.a.name, "toy");
        assert_eq!(s.params.system.b.name, "13CO");
    }

    #[test]
    fn wire_without_height_rejected() {
        let src = MINIMAL.replace("lattice", "wire");
        assert!(ScenarioConfig::from_json(&src).unwrap().validate().is_err());
    }

    #[test]
    fn thermal_needs_one_spread() {
        let src = MINIMAL.replace(
            r#""scheme": {"kind": "direct"}"#,
            r#""scheme": {"kind": "direct"}, "thermal": {"sep_sigma": 1e-9, "sep_sigma_rel": 0.01}"#,
        );
        assert!(ScenarioConfig::from_json(&src).unwrap().validate().is_err());
    }
}
