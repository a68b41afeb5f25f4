//! Fixtures shared by the criterion benchmarks.

use polargate::{build, preset, BuiltScheme, Geometry, Scheme, SchemeParams, System};

pub fn co_direct() -> BuiltScheme {
    let sys = System::homonuclear(preset("CO").unwrap(), Geometry::lattice(1e-6, 0.0)).unwrap();
    build(&SchemeParams::new(Scheme::Direct, sys)).unwrap()
}

pub fn co_blockade_params() -> SchemeParams {
    let sys = System::homonuclear(preset("CO").unwrap(), Geometry::lattice(1e-6, 0.0)).unwrap();
    SchemeParams::new(Scheme::Blockade, sys).with_rabi(10.0)
}
