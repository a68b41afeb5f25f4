//! Pulse-level simulation of dipolar phase gates between two polar
//! molecules.
//!
//! The crate covers the closed-form estimates (interaction rates, π-phase
//! times, operation budgets, Stark-induced dipoles), a piecewise-constant
//! propagator over the two-molecule level basis, schedule builders for the
//! direct, inverted, rotational and blockade schemes, and gate analysis
//! (phase extraction, Bell fidelity, blockade scans, thermal Monte Carlo).
//!
//! ```
//! use polargate::{build, extract_gate, preset, Geometry, PropagationOptions, Scheme, SchemeParams, System};
//!
//! # fn main() -> polargate::Result<()> {
//! let sys = System::homonuclear(preset("CO")?, Geometry::lattice(1e-6, 0.0))?;
//! let built = build(&SchemeParams::new(Scheme::Direct, sys))?;
//! let gate = extract_gate(&built.schedule, &built.system, &PropagationOptions::default())?;
//! assert!((gate.entangling_phase_chi - std::f64::consts::PI).abs() < 1e-6);
//! # Ok(())
//! # }
//! ```

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod molecule;
pub mod protocols;
pub mod state;
pub mod units;

pub use analysis::{
    blockade_scan, cz_equivalent, extract_gate, thermal_phase_spread, thermal_sigma_from_temperature,
    GateResult, MonteCarloResult, ScanResult, ScanRow, ThermalSpread,
};
pub use dynamics::{
    eq1_phase, propagate, propagate_interval, segment_hamiltonian, DCFieldSpec, PropagationOptions,
    PulseSpec, RhoConvention, RhoSample, Schedule,
};
pub use error::{Error, Result};
pub use molecule::{preset, preset_names, LevelSpec, Molecule, MoleculeSpec, System};
pub use protocols::{build, BuiltScheme, Scheme, SchemeParams, SchemeWarning};
pub use state::{overlap, product_state, superpose, HermitianOperator, LevelBasis, RegisterState, C64};
pub use units::{
    debye_to_si, dipole_dipole_rate, operations_budget, pi_phase_time, stark_mixed_dipole, Architecture,
    Geometry, PhysicalConstants,
};
