//! Pulse schedules for the four gate schemes.
//!
//! All schemes use the level labels `0`, `1` (computational, zero dipole)
//! and `e` (dipole-switching auxiliary level).
//!
//! | scheme | sequence | ideal phases (00,01,10,11) |
//! |---|---|---|
//! | direct | π on A,B · hold τ · π on A,B | (0, 0, 0, π) |
//! | rotational | as direct, `e` is a rotational superposition | (0, 0, 0, π) |
//! | inverted | π on A,B · DC hold τ · π on A,B · phase step | (0, π, π, π) |
//! | blockade | π on A · 2π on B · π on A | (0, π, π, π) |
//!
//! With drive phase 0, a π pulse maps `|1⟩ → −i|e⟩`; de-excitation pulses of
//! the direct-type schemes use phase π so that `|1⟩` returns with no sign.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::molecule::{Molecule, MoleculeSpec, System, EXCITED, GROUND_0, GROUND_1};
use crate::dynamics::{DCFieldSpec, LevelShift, PulseSpec, Schedule};
use crate::units::{dipole_dipole_rate, pi_phase_time, stark_mixed_dipole};

/// Length of an "instantaneous" pulse as a fraction of the hold time. The
/// interaction phase picked up during such pulses is below 1e-11 rad.
pub const INSTANTANEOUS_PULSE_FRACTION: f64 = 1e-12;

/// Below this `|V|/Ω` the blockade is flagged as unreliable.
pub const BLOCKADE_RATIO_THRESHOLD: f64 = 10.0;

fn below_blockade_threshold(ratio: f64) -> bool {
    ratio < BLOCKADE_RATIO_THRESHOLD * (1.0 - 1e-9)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Direct,
    Inverted,
    Rotational,
    Blockade,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scheme::Direct => "direct",
            Scheme::Inverted => "inverted",
            Scheme::Rotational => "rotational",
            Scheme::Blockade => "blockade",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub scheme: Scheme,
    pub system: System,
    /// Ω of every pulse, rad/s. Ignored with instantaneous pulses.
    pub pulse_rabi: f64,
    pub instantaneous_pulses: bool,
    /// Excited fraction assumed when sizing the hold time.
    pub rho_e_target: f64,
    /// Aligning DC field during the hold of the inverted scheme, V/m.
    pub dc_field: f64,
    /// Multiplies every pulse area; 1 is a perfect π (or 2π) pulse.
    pub pulse_area_scale: f64,
}

impl SchemeParams {
    pub fn new(scheme: Scheme, system: System) -> Self {
        SchemeParams {
            scheme,
            system,
            pulse_rabi: 0.0,
            instantaneous_pulses: true,
            rho_e_target: 1.0,
            dc_field: 0.0,
            pulse_area_scale: 1.0,
        }
    }

    pub fn with_rabi(mut self, rabi: f64) -> Self {
        self.pulse_rabi = rabi;
        self.instantaneous_pulses = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.system.a.validate()?;
        self.system.b.validate()?;
        self.system.geometry.validate()?;
        if !self.instantaneous_pulses && !(self.pulse_rabi > 0.0 && self.pulse_rabi.is_finite()) {
            return Err(Error::param(format!("pulse_rabi must be > 0, got {}", self.pulse_rabi)));
        }
        if !(self.rho_e_target > 0.0 && self.rho_e_target <= 1.0) {
            return Err(Error::param(format!("rho_e_target must lie in (0, 1], got {}", self.rho_e_target)));
        }
        if !(self.dc_field >= 0.0 && self.dc_field.is_finite()) {
            return Err(Error::param(format!("dc_field must be >= 0, got {}", self.dc_field)));
        }
        if !(self.pulse_area_scale > 0.0 && self.pulse_area_scale.is_finite()) {
            return Err(Error::param("pulse_area_scale must be > 0"));
        }
        for m in [&self.system.a, &self.system.b] {
            for l in [GROUND_0, GROUND_1, EXCITED] {
                m.level_index(l)?;
            }
        }
        Ok(())
    }

    /// Static excited-state dipoles of A and B, Debye.
    pub fn excited_dipoles(&self) -> Result<(f64, f64)> {
        let ia = self.system.a.level_index(EXCITED)?;
        let ib = self.system.b.level_index(EXCITED)?;
        Ok((self.system.a.effective_dipole(ia, 0.0), self.system.b.effective_dipole(ib, 0.0)))
    }

    /// `|V|/Ω` for the excited pair.
    pub fn blockade_ratio(&self) -> Result<f64> {
        let (da, db) = self.excited_dipoles()?;
        Ok(dipole_dipole_rate(da, db, &self.system.geometry).abs() / self.pulse_rabi)
    }

    /// Copy with the separation moved so that `|V|/Ω = ratio`.
    pub fn with_blockade_ratio(&self, ratio: f64) -> Result<SchemeParams> {
        if self.instantaneous_pulses || !(self.pulse_rabi > 0.0) {
            return Err(Error::param("a blockade ratio needs a finite pulse_rabi"));
        }
        let (da, db) = self.excited_dipoles()?;
        let geometry = self.system.geometry.with_rate(da, db, ratio * self.pulse_rabi)?;
        let mut out = self.clone();
        out.system.geometry = geometry;
        Ok(out)
    }

    /// Pulse length and (possibly adjusted) hold time.
    ///
    /// Instantaneous pulses get a power-of-two length `q` and the hold is
    /// rounded to a multiple of `q`, so every segment boundary is exactly
    /// representable and no pulse area is lost to cancellation when segment
    /// lengths are recovered from absolute times. The hold moves by at most
    /// `q/2`, i.e. half of [`INSTANTANEOUS_PULSE_FRACTION`] in relative terms.
    fn timing(&self, hold: f64) -> (f64, f64) {
        if self.instantaneous_pulses {
            let q = (INSTANTANEOUS_PULSE_FRACTION * hold).log2().floor().exp2();
            (q, (hold / q).round() * q)
        } else {
            (PI / self.pulse_rabi, hold)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SchemeWarning {
    /// `|V|/Ω` below [`BLOCKADE_RATIO_THRESHOLD`].
    BlockadeRegime { ratio: f64 },
}

impl fmt::Display for SchemeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeWarning::BlockadeRegime { ratio } => write!(
                f,
                "BlockadeRegimeWarning: V/Omega = {ratio} is below {BLOCKADE_RATIO_THRESHOLD}; the blockade is leaky"
            ),
        }
    }
}

/// The pair of dipoles that do the entangling and for how long.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionWindow {
    pub dipole_a: f64,
    pub dipole_b: f64,
    /// Signed rate at the nominal geometry, rad/s.
    pub rate: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltScheme {
    pub scheme: Scheme,
    pub schedule: Schedule,
    pub system: System,
    pub interaction: InteractionWindow,
    pub warnings: Vec<SchemeWarning>,
}

/// Dispatches on `p.scheme`.
pub fn build(p: &SchemeParams) -> Result<BuiltScheme> {
    match p.scheme {
        Scheme::Direct => build_direct(p),
        Scheme::Inverted => build_inverted(p),
        Scheme::Rotational => build_rotational(p),
        Scheme::Blockade => build_blockade(p),
    }
}

fn pulse_pair(area: f64, phase: f64, t_start: f64, duration: f64) -> [PulseSpec; 2] {
    [Molecule::A, Molecule::B]
        .map(|m| PulseSpec::resonant(m, GROUND_1, EXCITED, area, phase, t_start, duration))
}

fn check_dark_ground(m: &MoleculeSpec) -> Result<()> {
    for l in [GROUND_0, GROUND_1] {
        let d = m.effective_dipole(m.level_index(l)?, 0.0);
        if d != 0.0 {
            return Err(Error::param(format!(
                "{}: level `{l}` carries a {d} D dipole; the computational levels must be dipole-free",
                m.name
            )));
        }
    }
    Ok(())
}

/// Excite both `|1⟩ → |e⟩`, hold for a π phase, de-excite.
pub fn build_direct(p: &SchemeParams) -> Result<BuiltScheme> {
    p.validate()?;
    check_dark_ground(&p.system.a)?;
    check_dark_ground(&p.system.b)?;
    let (da, db) = p.excited_dipoles()?;
    let rate = dipole_dipole_rate(da, db, &p.system.geometry);
    let (d, hold) = p.timing(pi_phase_time(rate, p.rho_e_target)?);
    let area = PI * p.pulse_area_scale;
    let mut pulses = Vec::with_capacity(4);
    pulses.extend(pulse_pair(area, 0.0, 0.0, d));
    pulses.extend(pulse_pair(area, PI, d + hold, d));
    Ok(BuiltScheme {
        scheme: p.scheme,
        schedule: Schedule {
            pulses,
            dc_intervals: vec![],
            level_shifts: vec![],
            total_time: 2.0 * d + hold,
        },
        system: p.system.clone(),
        interaction: InteractionWindow { dipole_a: da, dipole_b: db, rate, duration: hold },
        warnings: vec![],
    })
}

/// Checks the structural requirements on a rotational-superposition level:
///
/// 1. the drive into `e` is a two- (or more) photon process that does not
///    reach `|0⟩`;
/// 2. the components `e1`, `e2` share a nonzero transition dipole;
/// 3. neither component has a transition dipole to `|0⟩` or `|1⟩`.
pub fn check_rotational_restrictions(m: &MoleculeSpec) -> Result<()> {
    let sup = m.superposition.as_ref().ok_or_else(|| Error::RestrictionViolation {
        clause: 2,
        reason: format!("{}: no rotational superposition declared for `{EXCITED}`", m.name),
    })?;
    if sup.label != EXCITED {
        return Err(Error::RestrictionViolation {
            clause: 2,
            reason: format!("{}: superposition is declared on `{}`, not `{EXCITED}`", m.name, sup.label),
        });
    }
    if sup.drive_photons < 2 {
        return Err(Error::RestrictionViolation {
            clause: 1,
            reason: format!("{}: `1 <-> e` is a {}-photon coupling", m.name, sup.drive_photons),
        });
    }
    if sup.drive_couples_ground {
        return Err(Error::RestrictionViolation {
            clause: 1,
            reason: format!("{}: the drive photons also couple `0`", m.name),
        });
    }
    let [c1, c2] = &sup.components;
    match m.transition_dipole(c1, c2) {
        Some(d) if d != 0.0 => {}
        _ => {
            return Err(Error::RestrictionViolation {
                clause: 2,
                reason: format!("{}: no dipole-allowed transition between `{c1}` and `{c2}`", m.name),
            })
        }
    }
    for c in [c1, c2, &sup.label] {
        for g in [GROUND_0, GROUND_1] {
            if m.transition_dipole(c, g).is_some_and(|d| d != 0.0) {
                return Err(Error::RestrictionViolation {
                    clause: 3,
                    reason: format!("{}: dipole-allowed transition between `{c}` and `{g}`", m.name),
                });
            }
        }
    }
    for g in [GROUND_0, GROUND_1] {
        if m.level(g)?.rotational_n != Some(0) {
            return Err(Error::param(format!("{}: level `{g}` must be an N=0 state", m.name)));
        }
    }
    Ok(())
}

/// The direct sequence with `e` a superposition of adjacent rotational
/// states, after checking the molecule is allowed to do that.
pub fn build_rotational(p: &SchemeParams) -> Result<BuiltScheme> {
    p.validate()?;
    check_rotational_restrictions(&p.system.a)?;
    check_rotational_restrictions(&p.system.b)?;
    build_direct(p)
}

/// Ground-state interaction switched on by a DC field.
///
/// Both `|1⟩` are parked in the dipole-free `|e⟩`, the field polarizes the
/// remaining `|0⟩` population until `|00⟩` has picked up π, then `|e⟩` is
/// brought back. A final phase step of π on both computational levels of A
/// (a sign on the whole computational manifold) gives the tabulated
/// `(0, π, π, π)`.
pub fn build_inverted(p: &SchemeParams) -> Result<BuiltScheme> {
    p.validate()?;
    if p.dc_field == 0.0 {
        return Err(Error::ZeroRate("no DC field, so no induced ground dipole".into()));
    }
    let induced = |m: &MoleculeSpec| -> Result<f64> {
        let g = m.level(GROUND_0)?;
        let b = m
            .rotational_constant
            .ok_or_else(|| Error::param(format!("{}: inverted scheme needs a rotational constant", m.name)))?;
        if g.body_dipole <= 0.0 || g.rotational_n != Some(0) {
            return Err(Error::ZeroRate(format!("{}: ground level has no body dipole to polarize", m.name)));
        }
        stark_mixed_dipole(g.body_dipole, b, p.dc_field)
    };
    let (ga, gb) = (induced(&p.system.a)?, induced(&p.system.b)?);
    let (ea, eb) = p.excited_dipoles()?;
    if ea.abs() > 0.01 * ga || eb.abs() > 0.01 * gb {
        return Err(Error::param(format!(
            "inverted scheme needs a nearly dipole-free `e` (got {ea} D / {eb} D against induced {ga} D / {gb} D)"
        )));
    }
    let rate = dipole_dipole_rate(ga, gb, &p.system.geometry);
    let (d, hold) = p.timing(pi_phase_time(rate, p.rho_e_target)?);
    let area = PI * p.pulse_area_scale;
    let mut pulses = Vec::with_capacity(4);
    pulses.extend(pulse_pair(area, 0.0, 0.0, d));
    pulses.extend(pulse_pair(area, PI, d + hold, d));
    let step_start = 2.0 * d + hold;
    let level_shifts = [GROUND_0, GROUND_1]
        .map(|l| LevelShift {
            molecule: Molecule::A,
            label: l.to_string(),
            shift: PI / d,
            t_start: step_start,
            duration: d,
        })
        .to_vec();
    Ok(BuiltScheme {
        scheme: p.scheme,
        schedule: Schedule {
            pulses,
            dc_intervals: vec![DCFieldSpec { field: p.dc_field, t_start: d, duration: hold }],
            level_shifts,
            total_time: step_start + d,
        },
        system: p.system.clone(),
        interaction: InteractionWindow { dipole_a: ga, dipole_b: gb, rate, duration: hold },
        warnings: vec![],
    })
}

/// π on A, 2π on B, π on A. B's 2π pulse only completes when A is not
/// sitting in `|e⟩`.
pub fn build_blockade(p: &SchemeParams) -> Result<BuiltScheme> {
    p.validate()?;
    if p.instantaneous_pulses {
        return Err(Error::param("the blockade scheme needs finite pulses (set pulse_rabi)"));
    }
    check_dark_ground(&p.system.a)?;
    check_dark_ground(&p.system.b)?;
    let (da, db) = p.excited_dipoles()?;
    let rate = dipole_dipole_rate(da, db, &p.system.geometry);
    let d = PI / p.pulse_rabi;
    let area = PI * p.pulse_area_scale;
    let pulses = vec![
        PulseSpec::resonant(Molecule::A, GROUND_1, EXCITED, area, PI, 0.0, d),
        PulseSpec::resonant(Molecule::B, GROUND_1, EXCITED, 2.0 * area, 0.0, d, 2.0 * d),
        PulseSpec::resonant(Molecule::A, GROUND_1, EXCITED, area, PI, 3.0 * d, d),
    ];
    let ratio = rate.abs() / p.pulse_rabi;
    let warnings = if below_blockade_threshold(ratio) {
        vec![SchemeWarning::BlockadeRegime { ratio }]
    } else {
        vec![]
    };
    Ok(BuiltScheme {
        scheme: p.scheme,
        schedule: Schedule { pulses, dc_intervals: vec![], level_shifts: vec![], total_time: 4.0 * d },
        system: p.system.clone(),
        interaction: InteractionWindow { dipole_a: da, dipole_b: db, rate, duration: 2.0 * d },
        warnings,
    })
}
