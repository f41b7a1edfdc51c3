//! Wireless mobile grid simulator.
//!
//! Mobile stations walk a hexagonal cell lattice under the compact normal-walk
//! model. A Brokering Server splits jobs into sub jobs and places them on
//! stations; stations that cross into another VO or leave coverage have
//! their sub jobs aborted and reallocated. Runs are deterministic per seed.

pub mod config;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod hex;
pub mod metrics;
pub mod mobility;
pub mod services;

pub use config::ScenarioConfig;
pub use engine::{run, run_quiet, EventLog, RunOutput, Simulation};
pub use error::{Error, Result};
pub use metrics::{measure_run, write_metrics_csv, RunMetrics};
