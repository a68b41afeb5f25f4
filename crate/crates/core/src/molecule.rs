//! Molecule descriptions and the bundled presets.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::units::{self, Geometry};

/// Label of the lower computational level.
pub const GROUND_0: &str = "0";
/// Label of the upper computational level.
pub const GROUND_1: &str = "1";
/// Label of the dipole-switching auxiliary level.
pub const EXCITED: &str = "e";

/// One internal level of a molecule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub label: String,
    /// Lab-frame dipole expectation in the absence of a DC field, Debye.
    pub dipole_expectation: f64,
    /// Radiative lifetime, s. `None` is an infinite lifetime.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotational_n: Option<u32>,
    /// Body-frame dipole, Debye. A DC field mixes `N=0` levels with `N=1` and
    /// turns this into a lab-frame dipole.
    #[serde(default)]
    pub body_dipole: f64,
}

impl LevelSpec {
    pub fn new(label: &str, dipole_expectation: f64) -> Self {
        LevelSpec {
            label: label.to_string(),
            dipole_expectation,
            lifetime: None,
            rotational_n: None,
            body_dipole: 0.0,
        }
    }

    pub fn decay_rate(&self) -> f64 {
        self.lifetime.map_or(0.0, |t| 1.0 / t)
    }
}

/// Transition dipole between two labelled states, symmetric in the labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDipole {
    pub a: String,
    pub b: String,
    pub debye: f64,
}

/// An effective level built as the superposition of two adjacent rotational
/// states. Its dipole is the transition dipole between the components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperpositionSpec {
    /// The simulated level that stands for the superposition.
    pub label: String,
    pub components: [String; 2],
    /// Photon order of the drive coupling `|1⟩` to the superposition.
    pub drive_photons: u32,
    /// Whether the same photon combination also reaches `|0⟩`.
    #[serde(default)]
    pub drive_couples_ground: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeSpec {
    pub name: String,
    pub levels: Vec<LevelSpec>,
    #[serde(default)]
    pub transition_dipoles: Vec<TransitionDipole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub superposition: Option<SuperpositionSpec>,
    /// Rotational constant B, J.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotational_constant: Option<f64>,
    /// kg
    pub mass: f64,
    /// s
    pub coherence_time: f64,
}

impl MoleculeSpec {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for level in &self.levels {
            if !seen.insert(level.label.as_str()) {
                return Err(Error::param(format!(
                    "{}: duplicate level label `{}`",
                    self.name, level.label
                )));
            }
            if !level.dipole_expectation.is_finite() || !level.body_dipole.is_finite() {
                return Err(Error::param(format!("{}: non-finite dipole on `{}`", self.name, level.label)));
            }
            if let Some(t) = level.lifetime {
                if !(t > 0.0) {
                    return Err(Error::param(format!(
                        "{}: lifetime of `{}` must be > 0",
                        self.name, level.label
                    )));
                }
            }
        }
        if self.levels.is_empty() {
            return Err(Error::param(format!("{}: no levels", self.name)));
        }
        for (i, t) in self.transition_dipoles.iter().enumerate() {
            if t.a == t.b || !t.debye.is_finite() {
                return Err(Error::param(format!(
                    "{}: bad transition dipole {}<->{}",
                    self.name, t.a, t.b
                )));
            }
            for u in &self.transition_dipoles[..i] {
                let same = (u.a == t.a && u.b == t.b) || (u.a == t.b && u.b == t.a);
                if same {
                    return Err(Error::param(format!(
                        "{}: transition dipole {}<->{} declared twice",
                        self.name, t.a, t.b
                    )));
                }
            }
        }
        if let Some(sup) = &self.superposition {
            self.level(&sup.label)?;
        }
        if let Some(b) = self.rotational_constant {
            if !(b > 0.0) {
                return Err(Error::param(format!("{}: rotational constant must be > 0", self.name)));
            }
        }
        if !(self.mass > 0.0) {
            return Err(Error::param(format!("{}: mass must be > 0", self.name)));
        }
        if !(self.coherence_time > 0.0) {
            return Err(Error::param(format!("{}: coherence time must be > 0", self.name)));
        }
        Ok(())
    }

    pub fn level_index(&self, label: &str) -> Result<usize> {
        self.levels
            .iter()
            .position(|l| l.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn level(&self, label: &str) -> Result<&LevelSpec> {
        Ok(&self.levels[self.level_index(label)?])
    }

    pub fn labels(&self) -> Vec<String> {
        self.levels.iter().map(|l| l.label.clone()).collect()
    }

    /// Symmetric lookup; `None` when no dipole is declared.
    pub fn transition_dipole(&self, a: &str, b: &str) -> Option<f64> {
        self.transition_dipoles
            .iter()
            .find(|t| (t.a == a && t.b == b) || (t.a == b && t.b == a))
            .map(|t| t.debye)
    }

    /// Lab-frame dipole (Debye) of level `index` while a DC field of
    /// `dc_field` V/m is applied.
    ///
    /// Resolution order: the rotational-superposition level takes the
    /// transition dipole between its components; an `N=0` level with a body
    /// dipole acquires the Stark-mixed dipole when the field is on; anything
    /// else keeps its static expectation value.
    pub fn effective_dipole(&self, index: usize, dc_field: f64) -> f64 {
        let level = &self.levels[index];
        if let Some(sup) = &self.superposition {
            if sup.label == level.label {
                let [c1, c2] = &sup.components;
                return self.transition_dipole(c1, c2).unwrap_or(0.0);
            }
        }
        if dc_field > 0.0 && level.rotational_n == Some(0) && level.body_dipole > 0.0 {
            if let Some(b) = self.rotational_constant {
                return units::stark_mixed_dipole(level.body_dipole, b, dc_field)
                    .unwrap_or(level.dipole_expectation);
            }
        }
        level.dipole_expectation
    }

    /// Returns a copy with the effective dipole of `label` overridden. For
    /// the superposition level the component transition dipole is rewritten.
    pub fn with_dipole(&self, label: &str, debye: f64) -> Result<MoleculeSpec> {
        let mut out = self.clone();
        let idx = out.level_index(label)?;
        if let Some(sup) = &out.superposition {
            if sup.label == label {
                let [c1, c2] = sup.components.clone();
                out.transition_dipoles
                    .retain(|t| !((t.a == c1 && t.b == c2) || (t.a == c2 && t.b == c1)));
                out.transition_dipoles.push(TransitionDipole { a: c1, b: c2, debye });
                return Ok(out);
            }
        }
        out.levels[idx].dipole_expectation = debye;
        Ok(out)
    }
}

/// The two addressed molecules and their geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct System {
    pub a: MoleculeSpec,
    pub b: MoleculeSpec,
    pub geometry: Geometry,
}

impl System {
    pub fn new(a: MoleculeSpec, b: MoleculeSpec, geometry: Geometry) -> Result<Self> {
        a.validate()?;
        b.validate()?;
        geometry.validate()?;
        Ok(System { a, b, geometry })
    }

    /// Both molecules the same species.
    pub fn homonuclear(m: MoleculeSpec, geometry: Geometry) -> Result<Self> {
        System::new(m.clone(), m, geometry)
    }

    pub fn molecule(&self, which: Molecule) -> &MoleculeSpec {
        match which {
            Molecule::A => &self.a,
            Molecule::B => &self.b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Molecule {
    A,
    B,
}

const PRESET_SOURCES: &[(&str, &str)] = &[
    ("CO", include_str!("../presets/co.json")),
    ("NaCl", include_str!("../presets/nacl.json")),
    ("LiCs", include_str!("../presets/lics.json")),
    ("RbCs", include_str!("../presets/rbcs.json")),
];

/// Names accepted by [`preset`].
pub fn preset_names() -> Vec<&'static str> {
    PRESET_SOURCES.iter().map(|(n, _)| *n).collect()
}

/// Looks up a bundled preset by name (case-insensitive).
pub fn preset(name: &str) -> Result<MoleculeSpec> {
    let (_, src) = PRESET_SOURCES
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::param(format!("unknown preset `{name}`")))?;
    let spec: MoleculeSpec = serde_json::from_str(src)
        .map_err(|e| Error::param(format!("preset `{name}` is malformed: {e}")))?;
    spec.validate()?;
    Ok(spec)
}
