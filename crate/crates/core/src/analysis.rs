//! Gate extraction, fidelities, blockade scans and the thermal Monte Carlo.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::{propagate, PropagationOptions, Schedule};
use crate::error::{Error, Result};
use crate::molecule::{System, GROUND_0, GROUND_1};
use crate::protocols::{build_blockade, BuiltScheme, Scheme, SchemeParams, SchemeWarning};
use crate::state::{product_state, LevelBasis, C64};
use crate::units::{dipole_dipole_rate, Geometry, BOLTZMANN};

/// Computational kets in output order.
pub const COMPUTATIONAL: [(&str, &str, &str); 4] = [
    (GROUND_0, GROUND_0, "00"),
    (GROUND_0, GROUND_1, "01"),
    (GROUND_1, GROUND_0, "10"),
    (GROUND_1, GROUND_1, "11"),
];

/// Coarse grid resolution per local-phase axis of the Bell-fidelity search.
pub const BELL_GRID: usize = 64;
/// The pattern search stops once its step drops below this, rad.
pub const BELL_FINAL_STEP: f64 = 1e-5;

/// Wraps a phase into `[−π/2, 3π/2)`, which keeps the ideal values 0 and π
/// away from the cut.
pub fn wrap_phase(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    (x + PI / 2.0).rem_euclid(two_pi) - PI / 2.0
}

/// Wraps into `(−π, π]`.
pub fn wrap_centered(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// `φ00 − φ01 − φ10 + φ11`, wrapped.
pub fn entangling_phase(phases: &[f64; 4]) -> f64 {
    wrap_phase(phases[0] - phases[1] - phases[2] + phases[3])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    /// Phases of the returning amplitudes of |00⟩, |01⟩, |10⟩, |11⟩.
    pub phases: [f64; 4],
    pub entangling_phase_chi: f64,
    /// Population left outside the computational manifold, per input.
    pub leakage: [f64; 4],
    /// Smallest final norm² over the four inputs (below 1 only with decay).
    pub success_probability: f64,
    /// Bell-state fidelity against CZ after optimizing local Z phases.
    pub bell_fidelity: f64,
    /// Same overlap with no local-phase freedom.
    pub raw_bell_fidelity: f64,
    /// The local Z phases (on |1⟩ of A and B) that maximize the fidelity.
    pub local_phases: [f64; 2],
}

impl GateResult {
    pub fn leakage_max(&self) -> f64 {
        self.leakage.iter().copied().fold(0.0, f64::max)
    }
}

/// Propagates each computational basis state through `schedule` and reads
/// off the diagonal gate.
pub fn extract_gate(schedule: &Schedule, system: &System, opts: &PropagationOptions) -> Result<GateResult> {
    let basis = LevelBasis::from_molecules(&system.a, &system.b);
    let opts = PropagationOptions { trajectory_samples: 0, ..*opts };
    let comp: Vec<usize> = COMPUTATIONAL
        .iter()
        .map(|(a, b, _)| basis.index_of(a, b))
        .collect::<Result<_>>()?;
    let mut phases = [0.0; 4];
    let mut leakage = [0.0; 4];
    let mut success = f64::INFINITY;
    let mut bell = DVector::<C64>::zeros(basis.dim());
    for (k, (a, b, name)) in COMPUTATIONAL.iter().enumerate() {
        let psi = product_state(&basis, a, b)?;
        let out = propagate(&psi, schedule, system, &opts)?.final_state;
        let amps = out.amplitudes();
        let ret = amps[comp[k]];
        if ret.norm() < 0.5 {
            return Err(Error::DegenerateGate { state: name, magnitude: ret.norm() });
        }
        phases[k] = wrap_phase(ret.arg());
        let inside: f64 = comp.iter().map(|&i| amps[i].norm_sqr()).sum();
        let norm = out.norm_sqr();
        leakage[k] = (norm - inside).clamp(0.0, 1.0);
        success = success.min(norm);
        bell += amps * C64::new(0.5, 0.0);
    }
    let sim: [C64; 4] = [bell[comp[0]], bell[comp[1]], bell[comp[2]], bell[comp[3]]];
    let (bell_fidelity, local_phases) = optimize_bell_fidelity(&sim);
    Ok(GateResult {
        phases,
        entangling_phase_chi: entangling_phase(&phases),
        leakage,
        success_probability: success,
        bell_fidelity,
        raw_bell_fidelity: cz_bell_overlap(&sim, 0.0, 0.0),
        local_phases,
    })
}

/// `|⟨Φ_CZ| Z_A(a) Z_B(b) |Φ_sim⟩|²` where `Φ_CZ = (|00⟩+|01⟩+|10⟩−|11⟩)/2`
/// and `sim` holds the computational components of the simulated output.
pub fn cz_bell_overlap(sim: &[C64; 4], a: f64, b: f64) -> f64 {
    let target = [0.5, 0.5, 0.5, -0.5];
    let mut acc = C64::new(0.0, 0.0);
    for (k, (&s, &t)) in sim.iter().zip(target.iter()).enumerate() {
        let (i, j) = ((k >> 1) as f64, (k & 1) as f64);
        acc += s * C64::from_polar(t, a * i + b * j);
    }
    acc.norm_sqr()
}

/// Maximizes [`cz_bell_overlap`] over the two local phases: a
/// `BELL_GRID × BELL_GRID` grid, then a compass search that halves its step
/// down to [`BELL_FINAL_STEP`]. A global phase drops out of the modulus and
/// needs no search.
pub fn optimize_bell_fidelity(sim: &[C64; 4]) -> (f64, [f64; 2]) {
    let h = 2.0 * PI / BELL_GRID as f64;
    let mut best = (f64::NEG_INFINITY, [0.0, 0.0]);
    for i in 0..BELL_GRID {
        for j in 0..BELL_GRID {
            let (a, b) = (i as f64 * h, j as f64 * h);
            let f = cz_bell_overlap(sim, a, b);
            if f > best.0 {
                best = (f, [a, b]);
            }
        }
    }
    let mut step = h;
    while step > BELL_FINAL_STEP {
        let [a, b] = best.1;
        let mut moved = false;
        for (da, db) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let f = cz_bell_overlap(sim, a + da, b + db);
            if f > best.0 {
                best = (f, [a + da, b + db]);
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (best.0.min(1.0), best.1.map(wrap_centered))
}

/// `|χ − π| ≤ tol` on the circle.
pub fn cz_equivalent(result: &GateResult, tol: f64) -> bool {
    wrap_centered(result.entangling_phase_chi - PI).abs() <= tol
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub ratio: f64,
    pub infidelity: f64,
    pub leakage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub warnings: Vec<SchemeWarning>,
}

impl ScanResult {
    /// Least-squares slope of `ln(infidelity)` against `ln(ratio)`.
    pub fn log_log_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.infidelity > 0.0)
            .map(|r| (r.ratio.ln(), r.infidelity.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }
}

/// Blockade gate quality as a function of `|V|/Ω`. Ω stays at
/// `base.pulse_rabi`; the separation is moved to set each ratio.
pub fn blockade_scan(base: &SchemeParams, ratios: &[f64], opts: &PropagationOptions) -> Result<ScanResult> {
    if ratios.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::param("scan ratios must be > 0"));
    }
    if ratios.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("scan ratios must be strictly increasing"));
    }
    let mut base = base.clone();
    base.scheme = Scheme::Blockade;
    let mut rows = Vec::with_capacity(ratios.len());
    let mut warnings = Vec::new();
    for &ratio in ratios {
        let p = base.with_blockade_ratio(ratio)?;
        let built = build_blockade(&p)?;
        warnings.extend(built.warnings.iter().copied());
        let g = extract_gate(&built.schedule, &built.system, opts)?;
        rows.push(ScanRow { ratio, infidelity: (1.0 - g.bell_fidelity).max(0.0), leakage: g.leakage_max() });
    }
    Ok(ScanResult { rows, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub samples: u64,
    pub phase_mean: f64,
    pub phase_std: f64,
    pub relative_spread: f64,
    pub seed: u64,
}

/// Streaming mean and variance (Welford), mergeable across batches with
/// Chan's pairwise update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &RunningStats) -> RunningStats {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        RunningStats { n, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation (n − 1 denominator).
    pub fn std(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0).sqrt()
        }
    }
}

/// Minimum number of Monte Carlo samples.
pub const MIN_THERMAL_SAMPLES: u64 = 100;

fn thermal_batch(window_geometry: &Geometry, built: &BuiltScheme, sep_sigma: f64, samples: u64, seed: u64) -> RunningStats {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let w = &built.interaction;
    let mut stats = RunningStats::default();
    for _ in 0..samples {
        let r = loop {
            let delta: f64 = StandardNormal.sample(&mut rng);
            let r = window_geometry.r + sep_sigma * delta;
            if r > 0.0 {
                break r;
            }
        };
        let g = Geometry { r, ..*window_geometry };
        stats.push(dipole_dipole_rate(w.dipole_a, w.dipole_b, &g) * w.duration);
    }
    stats
}

fn thermal_checks(sep_sigma: f64, samples: u64) -> Result<()> {
    if !(sep_sigma >= 0.0 && sep_sigma.is_finite()) {
        return Err(Error::InvalidSigma(format!("sep_sigma must be >= 0, got {sep_sigma}")));
    }
    if samples < MIN_THERMAL_SAMPLES {
        return Err(Error::param(format!("need at least {MIN_THERMAL_SAMPLES} samples, got {samples}")));
    }
    Ok(())
}

fn finish(stats: RunningStats, seed: u64) -> MonteCarloResult {
    let mean = stats.mean();
    let std = stats.std();
    MonteCarloResult {
        samples: stats.count(),
        phase_mean: mean,
        phase_std: std,
        relative_spread: if mean != 0.0 { std / mean.abs() } else { 0.0 },
        seed,
    }
}

/// Spread of the interaction phase when the separation fluctuates.
///
/// Each sample draws `r' = r + δ` with `δ ~ N(0, sep_sigma²)` (redrawing
/// when `r' ≤ 0`) and recomputes `rate(r') · τ` with the hold time fixed.
/// The position is frozen for the duration of the gate. Samples come from
/// SplitMix64 (increment `0x9e3779b97f4a7c15`, finalizer multipliers
/// `0xbf58476d1ce4e5b9` and `0x94d049bb133111eb`) through the ziggurat
/// standard normal of `rand_distr`.
pub fn thermal_phase_spread(built: &BuiltScheme, sep_sigma: f64, samples: u64, seed: u64) -> Result<MonteCarloResult> {
    thermal_checks(sep_sigma, samples)?;
    let stats = thermal_batch(&built.system.geometry, built, sep_sigma, samples, seed);
    Ok(finish(stats, seed))
}

/// Same estimate split over `batches` independent streams run on the rayon
/// pool. Batch `k` is seeded with `seed + k·0x9e3779b97f4a7c15`; results are
/// merged pairwise. The numbers differ from [`thermal_phase_spread`] but are
/// reproducible for a fixed `batches`.
pub fn thermal_phase_spread_parallel(
    built: &BuiltScheme,
    sep_sigma: f64,
    samples: u64,
    seed: u64,
    batches: u64,
) -> Result<MonteCarloResult> {
    thermal_checks(sep_sigma, samples)?;
    let batches = batches.clamp(1, samples);
    let per = samples / batches;
    let extra = samples % batches;
    let stats = (0..batches)
        .into_par_iter()
        .map(|k| {
            let n = per + u64::from(k < extra);
            let s = seed.wrapping_add(k.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            thermal_batch(&built.system.geometry, built, sep_sigma, n, s)
        })
        .reduce(RunningStats::default, |a, b| a.merge(&b));
    Ok(finish(stats, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalSpread {
    /// `√(k_B T / (m ω²))`, m.
    pub per_molecule: f64,
    /// `√2 ×` the per-molecule spread, m.
    pub separation: f64,
}

/// Harmonic-trap position spread at temperature `t` (K) for `mass` (kg) in
/// a trap of angular frequency `trap_omega` (rad/s).
pub fn thermal_sigma_from_temperature(t: f64, mass: f64, trap_omega: f64) -> Result<ThermalSpread> {
    if !(t >= 0.0 && mass > 0.0 && trap_omega > 0.0) {
        return Err(Error::param("temperature must be >= 0 and mass, trap frequency > 0"));
    }
    let per_molecule = (BOLTZMANN * t / (mass * trap_omega * trap_omega)).sqrt();
    Ok(ThermalSpread { per_molecule, separation: std::f64::consts::SQRT_2 * per_molecule })
}
