//! Physical constants, unit conversions and the closed-form interaction,
//! timing and budget calculators.
//!
//! Everything is SI with `ħ` explicit. The dipole-dipole energy is written
//! `d_A d_B (3cos²θ − 1) / (4πε₀ r³)`; dividing by `ħ` gives an angular
//! frequency in rad/s.
//!
//! Constants are the CODATA-2018 values:
//!
//! | constant | value |
//! |---|---|
//! | ħ | 1.054571817e-34 J·s |
//! | 4πε₀ | 1.11265005545e-10 C²·N⁻¹·m⁻² |
//! | 1 D | 3.335640952e-30 C·m (10⁻²¹/c) |
//! | k_B | 1.380649e-23 J/K |
//! | u | 1.66053906660e-27 kg |
//! | hc·(1 cm⁻¹) | 1.98644586e-23 J |

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// 4πε₀, C²·N⁻¹·m⁻².
pub const FOUR_PI_EPS0: f64 = 1.112_650_055_45e-10;
/// One Debye in C·m.
pub const DEBYE: f64 = 3.335_640_952e-30;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Unified atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Energy of one wavenumber (cm⁻¹), J.
pub const INV_CM: f64 = 1.986_445_86e-23;

/// `|3cos²θ − 1|` below this counts as the magic angle.
const ANGULAR_ZERO: f64 = 1e-12;

/// The constants above bundled as a value, for callers that want to pass
/// them around or print them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub four_pi_eps0: f64,
    pub debye: f64,
    pub boltzmann: f64,
    pub amu: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        hbar: HBAR,
        four_pi_eps0: FOUR_PI_EPS0,
        debye: DEBYE,
        boltzmann: BOLTZMANN,
        amu: AMU,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

pub fn debye_to_si(d: f64) -> f64 {
    d * DEBYE
}

pub fn si_to_debye(d: f64) -> f64 {
    d / DEBYE
}

/// The angle at which `3cos²θ − 1` vanishes, `arccos(1/√3)`.
pub fn magic_angle() -> f64 {
    (1.0 / 3f64.sqrt()).acos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    /// Free-space coupling in an optical lattice, `∝ 1/r³`.
    Lattice,
    /// Coupling conveyed by a superconducting strip wire, `∝ 1/(h² r)`.
    Wire,
}

/// Relative placement of the two addressed molecules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub architecture: Architecture,
    /// Separation, m.
    pub r: f64,
    /// Angle between the dipoles and the separation axis, rad.
    #[serde(default)]
    pub theta: f64,
    /// Height above the wire, m. Only meaningful for [`Architecture::Wire`].
    #[serde(default)]
    pub h: Option<f64>,
}

impl Geometry {
    pub fn lattice(r: f64, theta: f64) -> Self {
        Geometry { architecture: Architecture::Lattice, r, theta, h: None }
    }

    pub fn wire(r: f64, h: f64) -> Self {
        Geometry { architecture: Architecture::Wire, r, theta: 0.0, h: Some(h) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(Error::param(format!("separation r must be > 0, got {}", self.r)));
        }
        if !(0.0..=PI).contains(&self.theta) {
            return Err(Error::param(format!("theta must lie in [0, π], got {}", self.theta)));
        }
        if self.architecture == Architecture::Wire {
            match self.h {
                Some(h) if h.is_finite() && h > 0.0 => {}
                other => {
                    return Err(Error::param(format!("wire geometry needs h > 0, got {other:?}")))
                }
            }
        }
        Ok(())
    }

    /// Geometric factor `G` such that the rate is `d_A d_B G / (4πε₀ ħ)`.
    fn factor(&self) -> f64 {
        match self.architecture {
            Architecture::Lattice => {
                let c = self.theta.cos();
                let angular = 3.0 * c * c - 1.0;
                // round-off at arccos(1/√3) leaves ~1e-16 behind
                let angular = if angular.abs() < ANGULAR_ZERO { 0.0 } else { angular };
                angular / self.r.powi(3)
            }
            Architecture::Wire => {
                let h = self.h.unwrap_or(f64::NAN);
                1.0 / (h * h * self.r)
            }
        }
    }

    /// Returns a copy with the separation chosen so that
    /// `|dipole_dipole_rate(d_a, d_b, self)| == target`.
    pub fn with_rate(&self, d_a: f64, d_b: f64, target: f64) -> Result<Geometry> {
        let current = dipole_dipole_rate(d_a, d_b, self).abs();
        if current == 0.0 {
            return Err(Error::ZeroRate("cannot rescale a vanishing interaction".into()));
        }
        if !(target.is_finite() && target > 0.0) {
            return Err(Error::param(format!("target rate must be > 0, got {target}")));
        }
        let ratio = current / target;
        let r = match self.architecture {
            Architecture::Lattice => self.r * ratio.cbrt(),
            Architecture::Wire => self.r * ratio,
        };
        Ok(Geometry { r, ..*self })
    }
}

/// Signed dipole-dipole interaction rate `V/ħ` in rad/s for dipoles given in
/// Debye.
///
/// The wire geometry carries no angular factor: the trap aligns the dipoles
/// and only the `1/r³ → 1/(h² r)` substitution is applied.
pub fn dipole_dipole_rate(d_a: f64, d_b: f64, geometry: &Geometry) -> f64 {
    debye_to_si(d_a) * debye_to_si(d_b) * geometry.factor() / (FOUR_PI_EPS0 * HBAR)
}

/// Hold time after which a pair interacting at `rate` with excited fraction
/// `rho_e` has accumulated a phase of π: `τ = π / (|rate| ρ_e²)`.
pub fn pi_phase_time(rate: f64, rho_e: f64) -> Result<f64> {
    if !(rho_e > 0.0 && rho_e <= 1.0) {
        return Err(Error::param(format!("rho_e must lie in (0, 1], got {rho_e}")));
    }
    if rate == 0.0 || !rate.is_finite() {
        return Err(Error::ZeroRate(format!("rate = {rate} rad/s")));
    }
    Ok(PI / (rate.abs() * rho_e * rho_e))
}

/// Number of gates that fit into a coherence time (floor division).
pub fn operations_budget(coherence_time: f64, gate_time: f64) -> Result<u64> {
    if !(coherence_time > 0.0 && gate_time > 0.0) {
        return Err(Error::param("coherence and gate time must both be > 0"));
    }
    Ok((coherence_time / gate_time).floor() as u64)
}

/// Dipole expectation (Debye) of the field-dressed rotational ground state.
///
/// Two-level model of `N=0` and `N=1` coupled by `μE/√3`, with `N=1` lying
/// `2B` higher. The lab-frame dipole is `−∂E_ground/∂E`, which evaluates to
/// `(μ²E/3) / √(B² + μ²E²/3)`.
///
/// `mu` is in Debye, `b` (rotational constant) in J, `field` in V/m.
pub fn stark_mixed_dipole(mu: f64, b: f64, field: f64) -> Result<f64> {
    if !(mu > 0.0 && b > 0.0 && field >= 0.0) {
        return Err(Error::param(format!(
            "stark mixing needs mu > 0, B > 0, E >= 0 (got {mu}, {b}, {field})"
        )));
    }
    // work in units of B to keep the numbers O(1)
    let x = debye_to_si(mu) * field / b;
    let d = mu * (x / 3.0) / (1.0 + x * x / 3.0).sqrt();
    Ok(d)
}
