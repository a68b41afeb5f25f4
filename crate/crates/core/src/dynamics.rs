//! Piecewise-constant rotating-frame Hamiltonians and their propagation.
//!
//! A [`Schedule`] is a set of rectangular drives, DC-field windows and level
//! shifts. The union of their start and end times cuts `[0, total_time]`
//! into segments, and inside each segment the generator is constant:
//!
//! ```text
//! H/ħ = Σ_pulses [ −Δ |to⟩⟨to| + (Ω/2)(e^{iφ}|to⟩⟨from| + h.c.) ]_m ⊗ 1
//!     + Σ_shifts δ |l⟩⟨l|_m ⊗ 1
//!     + Σ_{a,b} V(d_a(t), d_b(t)) |ab⟩⟨ab|
//!     − (i/2) Σ Γ_level            (only with decay)
//! ```
//!
//! The interaction is diagonal: only the static dipole shifts are kept and
//! resonant exchange terms are dropped.
//!
//! Hermitian segments are exponentiated through the eigendecomposition of
//! `H`. Segments with decay go through nalgebra's scaling-and-squaring
//! exponential (Padé approximants up to degree 13 with Higham's thresholds).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::molecule::{Molecule, MoleculeSpec, System};
use crate::state::{HermitianOperator, LevelBasis, RegisterState, C64};
use crate::units::dipole_dipole_rate;

/// Relative slack allowed when checking that intervals fit in the schedule.
const TIME_SLACK: f64 = 1e-12;

/// A rectangular resonant (or detuned) drive on one molecule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub molecule: Molecule,
    pub from: String,
    pub to: String,
    /// Rabi frequency Ω, rad/s.
    pub rabi: f64,
    /// Detuning Δ, rad/s.
    pub detuning: f64,
    /// Drive phase φ, rad.
    pub phase: f64,
    pub t_start: f64,
    pub duration: f64,
}

impl PulseSpec {
    /// A resonant pulse with rotation angle `area` (= Ω·duration).
    pub fn resonant(
        molecule: Molecule,
        from: &str,
        to: &str,
        area: f64,
        phase: f64,
        t_start: f64,
        duration: f64,
    ) -> Self {
        PulseSpec {
            molecule,
            from: from.to_string(),
            to: to.to_string(),
            rabi: area / duration,
            detuning: 0.0,
            phase,
            t_start,
            duration,
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.duration
    }

    pub fn area(&self) -> f64 {
        self.rabi * self.duration
    }
}

/// Window during which the aligning DC field is on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DCFieldSpec {
    /// V/m
    pub field: f64,
    pub t_start: f64,
    pub duration: f64,
}

impl DCFieldSpec {
    pub fn t_end(&self) -> f64 {
        self.t_start + self.duration
    }
}

/// Energy shift `δ` (rad/s) of a single level of one molecule. Used for the
/// single-molecule phase steps some protocols need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelShift {
    pub molecule: Molecule,
    pub label: String,
    pub shift: f64,
    pub t_start: f64,
    pub duration: f64,
}

impl LevelShift {
    pub fn t_end(&self) -> f64 {
        self.t_start + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub pulses: Vec<PulseSpec>,
    pub dc_intervals: Vec<DCFieldSpec>,
    #[serde(default)]
    pub level_shifts: Vec<LevelShift>,
    pub total_time: f64,
}

fn active(t_start: f64, t_end: f64, t: f64) -> bool {
    t >= t_start && t < t_end
}

impl Schedule {
    /// Free evolution for `total_time`.
    pub fn idle(total_time: f64) -> Self {
        Schedule { total_time, ..Default::default() }
    }

    fn intervals(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pulses
            .iter()
            .map(|p| (p.t_start, p.duration))
            .chain(self.dc_intervals.iter().map(|d| (d.t_start, d.duration)))
            .chain(self.level_shifts.iter().map(|s| (s.t_start, s.duration)))
    }

    /// Checks every interval against `[0, total_time]` and every label
    /// against the molecules.
    pub fn validate(&self, system: &System) -> Result<()> {
        if !(self.total_time.is_finite() && self.total_time >= 0.0) {
            return Err(Error::param(format!("total time must be >= 0, got {}", self.total_time)));
        }
        let slack = TIME_SLACK * self.total_time.max(f64::MIN_POSITIVE);
        for (start, dur) in self.intervals() {
            if !(dur > 0.0 && dur.is_finite()) {
                return Err(Error::param(format!("interval duration must be > 0, got {dur}")));
            }
            if start < -slack || start + dur > self.total_time + slack {
                return Err(Error::param(format!(
                    "interval [{start}, {}] leaves the schedule [0, {}]",
                    start + dur,
                    self.total_time
                )));
            }
        }
        for p in &self.pulses {
            let m = system.molecule(p.molecule);
            if p.from == p.to {
                return Err(Error::param(format!("pulse couples `{}` to itself", p.from)));
            }
            m.level_index(&p.from)?;
            m.level_index(&p.to)?;
            if !(p.rabi.is_finite() && p.detuning.is_finite() && p.phase.is_finite()) {
                return Err(Error::param("pulse parameters must be finite"));
            }
        }
        for d in &self.dc_intervals {
            if !(d.field >= 0.0 && d.field.is_finite()) {
                return Err(Error::param(format!("DC field must be >= 0, got {}", d.field)));
            }
        }
        for s in &self.level_shifts {
            system.molecule(s.molecule).level_index(&s.label)?;
            if !s.shift.is_finite() {
                return Err(Error::param("level shift must be finite"));
            }
        }
        Ok(())
    }

    /// Sorted, de-duplicated segment boundaries, always including 0 and the
    /// total time.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = vec![0.0, self.total_time];
        for (start, dur) in self.intervals() {
            ts.push(start.clamp(0.0, self.total_time));
            ts.push((start + dur).clamp(0.0, self.total_time));
        }
        ts.sort_by(|a, b| a.total_cmp(b));
        ts.dedup();
        ts
    }

    /// Total DC field (V/m) at `t`.
    pub fn dc_field_at(&self, t: f64) -> f64 {
        self.dc_intervals
            .iter()
            .filter(|d| active(d.t_start, d.t_end(), t))
            .map(|d| d.field)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationOptions {
    #[serde(default)]
    pub include_decay: bool,
    /// Number of uniformly spaced trajectory samples, endpoints included.
    #[serde(default)]
    pub trajectory_samples: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    1e-9
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions { include_decay: false, trajectory_samples: 0, tolerance: default_tolerance() }
    }
}

impl PropagationOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-6) {
            return Err(Error::param(format!("tolerance must lie in (0, 1e-6], got {}", self.tolerance)));
        }
        Ok(())
    }
}

fn single_molecule_terms(
    schedule: &Schedule,
    which: Molecule,
    spec: &MoleculeSpec,
    t: f64,
) -> Result<DMatrix<C64>> {
    let n = spec.levels.len();
    let mut h = DMatrix::<C64>::zeros(n, n);
    for p in schedule.pulses.iter().filter(|p| p.molecule == which) {
        if !active(p.t_start, p.t_end(), t) {
            continue;
        }
        let from = spec.level_index(&p.from)?;
        let to = spec.level_index(&p.to)?;
        let coupling = C64::from_polar(0.5 * p.rabi, p.phase);
        h[(to, to)] -= C64::new(p.detuning, 0.0);
        h[(to, from)] += coupling;
        h[(from, to)] += coupling.conj();
    }
    for s in schedule.level_shifts.iter().filter(|s| s.molecule == which) {
        if active(s.t_start, s.t_end(), t) {
            let l = spec.level_index(&s.label)?;
            h[(l, l)] += C64::new(s.shift, 0.0);
        }
    }
    Ok(h)
}

/// The generator active at time `t`, in rad/s.
///
/// Intervals are half-open `[start, end)`; at `t == total_time` the
/// intervals ending there are still counted so the final instant has a
/// well-defined generator.
pub fn segment_hamiltonian(
    schedule: &Schedule,
    t: f64,
    system: &System,
    include_decay: bool,
) -> Result<HermitianOperator> {
    if !(t >= 0.0 && t <= schedule.total_time) {
        return Err(Error::InvalidTime { t, total: schedule.total_time });
    }
    // nudge the end point back inside the last segment
    let t = if t == schedule.total_time && t > 0.0 {
        let b = schedule.boundaries();
        let prev = b.iter().rev().nth(1).copied().unwrap_or(0.0);
        0.5 * (prev + t)
    } else {
        t
    };
    let (na, nb) = (system.a.levels.len(), system.b.levels.len());
    let dim = na * nb;
    let ha = single_molecule_terms(schedule, Molecule::A, &system.a, t)?;
    let hb = single_molecule_terms(schedule, Molecule::B, &system.b, t)?;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for a in 0..na {
        for a2 in 0..na {
            let v = ha[(a, a2)];
            if v != C64::new(0.0, 0.0) {
                for b in 0..nb {
                    h[(a * nb + b, a2 * nb + b)] += v;
                }
            }
        }
    }
    for b in 0..nb {
        for b2 in 0..nb {
            let v = hb[(b, b2)];
            if v != C64::new(0.0, 0.0) {
                for a in 0..na {
                    h[(a * nb + b, a * nb + b2)] += v;
                }
            }
        }
    }
    let field = schedule.dc_field_at(t);
    let da: Vec<f64> = (0..na).map(|i| system.a.effective_dipole(i, field)).collect();
    let db: Vec<f64> = (0..nb).map(|i| system.b.effective_dipole(i, field)).collect();
    for (a, &dipole_a) in da.iter().enumerate() {
        for (b, &dipole_b) in db.iter().enumerate() {
            if dipole_a != 0.0 && dipole_b != 0.0 {
                h[(a * nb + b, a * nb + b)] +=
                    C64::new(dipole_dipole_rate(dipole_a, dipole_b, &system.geometry), 0.0);
            }
        }
    }
    let decay = if include_decay {
        let d = DVector::from_fn(dim, |i, _| {
            let (a, b) = (i / nb, i % nb);
            0.5 * (system.a.levels[a].decay_rate() + system.b.levels[b].decay_rate())
        });
        Some(d)
    } else {
        None
    };
    Ok(HermitianOperator { hermitian: h, decay })
}

/// Exponentiator for a single constant segment.
enum SegmentPropagator {
    Spectral { values: DVector<f64>, vectors: DMatrix<C64> },
    General { generator: DMatrix<C64> },
}

impl SegmentPropagator {
    fn new(op: &HermitianOperator) -> Self {
        if op.has_decay() {
            SegmentPropagator::General { generator: op.full_matrix() }
        } else {
            // symmetrize against round-off before the eigensolver
            let h = (&op.hermitian + op.hermitian.adjoint()) * C64::new(0.5, 0.0);
            let eig = SymmetricEigen::new(h);
            SegmentPropagator::Spectral { values: eig.eigenvalues, vectors: eig.eigenvectors }
        }
    }

    fn apply(&self, psi: &DVector<C64>, dt: f64) -> DVector<C64> {
        if dt == 0.0 {
            return psi.clone();
        }
        match self {
            SegmentPropagator::Spectral { values, vectors } => {
                let mut c = vectors.ad_mul(psi);
                for (ci, &e) in c.iter_mut().zip(values.iter()) {
                    *ci *= C64::from_polar(1.0, -e * dt);
                }
                vectors * c
            }
            SegmentPropagator::General { generator } => {
                let u = (generator * C64::new(0.0, -dt)).exp();
                u * psi
            }
        }
    }
}

/// `exp(−i H t)` for a constant generator. Exposed for cross-checks.
pub fn evolution_operator(op: &HermitianOperator, t: f64) -> DMatrix<C64> {
    let p = SegmentPropagator::new(op);
    let dim = op.dim();
    let mut u = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut e = DVector::zeros(dim);
        e[j] = C64::new(1.0, 0.0);
        u.set_column(j, &p.apply(&e, t));
    }
    u
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: RegisterState,
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub final_state: RegisterState,
    pub trajectory: Vec<TrajectorySample>,
}

fn check_inputs(state: &RegisterState, schedule: &Schedule, system: &System) -> Result<()> {
    let expected = LevelBasis::new(system.a.labels(), system.b.labels());
    if **state.basis() != expected {
        return Err(Error::BasisMismatch);
    }
    schedule.validate(system)
}

fn sample_times(total: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n)
            .map(|k| if k + 1 == n { total } else { total * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

fn finite(psi: &DVector<C64>) -> Result<()> {
    if psi.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteAmplitude)
    }
}

/// Evolves `state` across `[t0, t1]` of the schedule. Sample times inside
/// the window are recorded into `trajectory`.
fn evolve_window(
    state: &RegisterState,
    schedule: &Schedule,
    system: &System,
    t0: f64,
    t1: f64,
    include_decay: bool,
    samples: &[f64],
    trajectory: &mut Vec<TrajectorySample>,
) -> Result<RegisterState> {
    let mut cuts: Vec<f64> = schedule
        .boundaries()
        .into_iter()
        .filter(|&t| t > t0 && t < t1)
        .collect();
    cuts.insert(0, t0);
    cuts.push(t1);
    let mut psi = state.amplitudes().clone();
    let mut now = t0;
    let mut next_sample = samples.iter().peekable();
    let record = |t: f64, psi: &DVector<C64>, trajectory: &mut Vec<TrajectorySample>| -> Result<()> {
        trajectory.push(TrajectorySample {
            t,
            state: RegisterState::from_amplitudes(state.basis().clone(), psi.clone())?,
        });
        Ok(())
    };
    while let Some(&&ts) = next_sample.peek() {
        if ts > t0 {
            break;
        }
        record(ts, &psi, trajectory)?;
        next_sample.next();
    }
    for w in cuts.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        if s1 <= s0 {
            continue;
        }
        let op = segment_hamiltonian(schedule, 0.5 * (s0 + s1), system, include_decay)?;
        let prop = SegmentPropagator::new(&op);
        while let Some(&&ts) = next_sample.peek() {
            if ts > s1 {
                break;
            }
            psi = prop.apply(&psi, ts - now);
            now = ts;
            finite(&psi)?;
            record(ts, &psi, trajectory)?;
            next_sample.next();
        }
        psi = prop.apply(&psi, s1 - now);
        now = s1;
        finite(&psi)?;
    }
    RegisterState::from_amplitudes(state.basis().clone(), psi)
}

/// Runs the full schedule on `state`.
pub fn propagate(
    state: &RegisterState,
    schedule: &Schedule,
    system: &System,
    opts: &PropagationOptions,
) -> Result<Propagation> {
    opts.validate()?;
    check_inputs(state, schedule, system)?;
    let samples = sample_times(schedule.total_time, opts.trajectory_samples);
    let mut trajectory = Vec::with_capacity(samples.len());
    let final_state = evolve_window(
        state,
        schedule,
        system,
        0.0,
        schedule.total_time,
        opts.include_decay,
        &samples,
        &mut trajectory,
    )?;
    Ok(Propagation { final_state, trajectory })
}

/// Evolves `state` from `t0` to `t1` under the schedule (no sampling).
pub fn propagate_interval(
    state: &RegisterState,
    schedule: &Schedule,
    system: &System,
    t0: f64,
    t1: f64,
    include_decay: bool,
) -> Result<RegisterState> {
    check_inputs(state, schedule, system)?;
    for t in [t0, t1] {
        if !(t >= 0.0 && t <= schedule.total_time) {
            return Err(Error::InvalidTime { t, total: schedule.total_time });
        }
    }
    if t1 < t0 {
        return Err(Error::param("interval end precedes its start"));
    }
    evolve_window(state, schedule, system, t0, t1, include_decay, &[], &mut Vec::new())
}

/// Excited-state fractions of both molecules at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoSample {
    pub t: f64,
    pub rho_a: f64,
    pub rho_b: f64,
}

/// How the pair's excited fractions enter the accumulated phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RhoConvention {
    /// `ρ_A²`
    SquaredA,
    /// `ρ_B²`
    SquaredB,
    /// `ρ_A ρ_B`, natural when the two drives differ.
    Product,
}

impl RhoConvention {
    fn weight(self, s: &RhoSample) -> f64 {
        match self {
            RhoConvention::SquaredA => s.rho_a * s.rho_a,
            RhoConvention::SquaredB => s.rho_b * s.rho_b,
            RhoConvention::Product => s.rho_a * s.rho_b,
        }
    }
}

/// Phase `rate · ∫ ρ_e²(t) dt` by the trapezoid rule over the samples.
pub fn eq1_phase(samples: &[RhoSample], rate: f64, convention: RhoConvention) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    const SLACK: f64 = 1e-9;
    for s in samples {
        for rho in [s.rho_a, s.rho_b] {
            if !(-SLACK..=1.0 + SLACK).contains(&rho) {
                return Err(Error::param(format!("excited fraction {rho} outside [0, 1]")));
            }
        }
    }
    let integral: f64 = samples
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (convention.weight(&w[0]) + convention.weight(&w[1])))
        .sum();
    Ok(rate * integral)
}

/// Reads the excited fractions of `label` off a sampled trajectory.
pub fn rho_samples(trajectory: &[TrajectorySample], label: &str) -> Result<Vec<RhoSample>> {
    trajectory
        .iter()
        .map(|s| {
            Ok(RhoSample {
                t: s.t,
                rho_a: s.state.level_population(Molecule::A, label)?,
                rho_b: s.state.level_population(Molecule::B, label)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eq1Estimate {
    pub phase: f64,
    pub samples: usize,
    pub converged: bool,
}

/// Upper bound on the sample count tried by [`converged_eq1_phase`].
pub const MAX_EQ1_SAMPLES: usize = 1 << 20;

/// Feeds the simulated excited fraction of `label` into [`eq1_phase`],
/// doubling the sampling density until consecutive estimates agree to
/// `opts.tolerance` rad.
pub fn converged_eq1_phase(
    state: &RegisterState,
    schedule: &Schedule,
    system: &System,
    opts: &PropagationOptions,
    label: &str,
    rate: f64,
    convention: RhoConvention,
) -> Result<Eq1Estimate> {
    let mut n = opts.trajectory_samples.max(129);
    let run = |n: usize| -> Result<f64> {
        let o = PropagationOptions { trajectory_samples: n, ..*opts };
        let p = propagate(state, schedule, system, &o)?;
        eq1_phase(&rho_samples(&p.trajectory, label)?, rate, convention)
    };
    let mut prev = run(n)?;
    loop {
        let m = 2 * n - 1;
        let next = run(m)?;
        if (next - prev).abs() < opts.tolerance {
            return Ok(Eq1Estimate { phase: next, samples: m, converged: true });
        }
        if m > MAX_EQ1_SAMPLES {
            return Ok(Eq1Estimate { phase: next, samples: m, converged: false });
        }
        prev = next;
        n = m;
    }
}
