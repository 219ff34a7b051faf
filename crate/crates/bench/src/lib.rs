//! Shared fixtures for the criterion benchmarks in `benches/`.

use std::path::PathBuf;

use ranloop_core::io::load_scenario;
use ranloop_core::{Scenario, TwinState};

/// Loads one of the scenarios shipped in the repository's `scenarios/`.
pub fn shipped_scenario(name: &str) -> Scenario {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "scenarios", name].iter().collect();
    load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// A twin for `name` that has already run `warmup` TTIs, so queues and
/// averages are in steady state.
pub fn warm_twin(name: &str, seed: u64, warmup: u64) -> TwinState {
    let mut twin = TwinState::new(shipped_scenario(name).twin_setup(), seed).expect("shipped scenario builds");
    twin.advance(warmup);
    twin
}
