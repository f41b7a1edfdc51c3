//! Browser bindings for the mobility model and the grid simulator.
//!
//! Every export takes and returns plain numbers or number arrays so the page
//! needs no glue beyond the generated module. Invalid input yields an empty
//! array (or `undefined`) instead of throwing.

use wasm_bindgen::prelude::*;

use mobgrid::engine::stream_rng;
use mobgrid::hex::HexCoord;
use mobgrid::mobility::{self, ConfiningAngles, MobilityParams, WalkerState};
use mobgrid::{run_quiet, ScenarioConfig};

/// Six direction probabilities for drift spread `sigma` (degrees), in the
/// order back, right, front-right, front, front-left, left.
#[wasm_bindgen]
pub fn direction_probabilities(sigma: f64) -> Option<Vec<f64>> {
    let params = MobilityParams::new(sigma).ok()?;
    let table = mobility::direction_probabilities(&params, &ConfiningAngles::default());
    Some(table.as_array().to_vec())
}

/// Cells visited by one walker starting at the origin facing heading 0, as
/// a flat `[q0, r0, q1, r1, ...]` list of `steps + 1` cells.
#[wasm_bindgen]
pub fn walk_trace(sigma: f64, steps: u32, seed: u32) -> Vec<i32> {
    let Ok(params) = MobilityParams::new(sigma) else {
        return Vec::new();
    };
    let angles = ConfiningAngles::default();
    let mut rng = stream_rng(seed as u64, 0);
    let mut state = WalkerState::new(HexCoord::new(0, 0), 0).expect("heading 0 is valid");
    let mut cells = Vec::with_capacity(2 * (steps as usize + 1));
    cells.extend([0, 0]);
    for _ in 0..steps {
        let theta = mobility::sample_drift_angle(&mut rng, &params);
        let dir = mobility::classify_angle(theta, &angles).expect("sampled inside range");
        state = mobility::advance(state, dir);
        cells.extend([state.cell.q, state.cell.r]);
    }
    cells
}

/// Number of values returned by [`run_metrics`].
pub const METRIC_COUNT: usize = 6;

/// One simulation with the default scenario at the given population and
/// mobility factor. Returns `[mean exec time (NaN if no job finished),
/// failure rate, location updates, bandwidth utilization, jobs completed,
/// jobs submitted]`.
#[wasm_bindgen]
pub fn run_metrics(population: u32, mobility_factor: f64, seed: u32) -> Vec<f64> {
    let cfg = ScenarioConfig {
        population: population as usize,
        mobility_factor,
        ..ScenarioConfig::default()
    };
    let Ok(out) = run_quiet(&cfg, seed as u64) else {
        return Vec::new();
    };
    let m = out.metrics;
    vec![
        m.mean_task_exec_time.unwrap_or(f64::NAN),
        m.task_failure_rate,
        m.location_updates as f64,
        m.bandwidth_utilization,
        m.jobs_completed as f64,
        m.jobs_submitted as f64,
    ]
}
