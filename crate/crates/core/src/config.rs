//! Scenario configuration and its flat `key = value` file format.
//!
//! Lines are `key = value`; blank lines and `#` comments are ignored. Every
//! key has a default, unknown keys are rejected, and each key can be
//! overridden from the environment as `MOBGRID_<KEY>` (upper case).

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hex::TopologyMap;
use crate::mobility::{
    confining_angles, direction_probabilities, CellGeometry, DirectionProbabilities, MobilityParams,
};

pub const ENV_PREFIX: &str = "MOBGRID_";

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub vo_count: u32,
    pub aos_per_vo: u32,
    /// Radius of each AO's hex cluster, in cells.
    pub ao_radius: u32,
    pub population: usize,
    /// Sweep bounds on population.
    pub population_min: usize,
    pub population_max: usize,
    /// Per-VO link capacity, megabits per second.
    pub bandwidth_mbps: f64,
    pub mobility_factor: f64,
    pub sigma_deg: f64,
    pub cell_inner_radius: f64,
    pub cell_outer_radius: f64,
    pub seed: u64,
    pub duration_s: f64,
    /// Seconds between walk steps; `inf` disables movement.
    pub step_interval_s: f64,
    pub scan_interval_s: f64,
    /// Stations `0..initiators` each submit one job at t = 0.
    pub initiators: usize,
    pub subjob_count: u32,
    pub job_work_min: u64,
    pub job_work_max: u64,
    pub cpu_rate_min: f64,
    pub cpu_rate_max: f64,
    pub dispatch_payload_bytes: u64,
    pub result_payload_bytes: u64,
    pub control_message_bytes: u64,
    pub exclude_initiator: bool,
    pub stop_on_completion: bool,
    pub replicates: usize,
    pub sweep_populations: Vec<usize>,
    pub sweep_mobility_factors: Vec<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            vo_count: 2,
            aos_per_vo: 2,
            ao_radius: 3,
            population: 60,
            population_min: 30,
            population_max: 90,
            bandwidth_mbps: 40.0,
            mobility_factor: 0.2,
            sigma_deg: 30.0,
            cell_inner_radius: 1.0,
            cell_outer_radius: 2.0 / 3f64.sqrt(),
            seed: 1,
            duration_s: 600.0,
            step_interval_s: 10.0,
            scan_interval_s: 10.0,
            initiators: 8,
            subjob_count: 4,
            job_work_min: 200,
            job_work_max: 1000,
            cpu_rate_min: 5.0,
            cpu_rate_max: 20.0,
            dispatch_payload_bytes: 100_000,
            result_payload_bytes: 50_000,
            control_message_bytes: 1_000,
            exclude_initiator: true,
            stop_on_completion: false,
            replicates: 30,
            sweep_populations: vec![30, 40, 50, 60, 70, 80, 90],
            sweep_mobility_factors: vec![0.1, 0.2, 0.3, 0.4],
        }
    }
}

pub const KEYS: &[&str] = &[
    "vo_count",
    "aos_per_vo",
    "ao_radius",
    "population",
    "population_min",
    "population_max",
    "bandwidth_mbps",
    "mobility_factor",
    "sigma_deg",
    "cell_inner_radius",
    "cell_outer_radius",
    "seed",
    "duration_s",
    "step_interval_s",
    "scan_interval_s",
    "initiators",
    "subjob_count",
    "job_work_min",
    "job_work_max",
    "cpu_rate_min",
    "cpu_rate_max",
    "dispatch_payload_bytes",
    "result_payload_bytes",
    "control_message_bytes",
    "exclude_initiator",
    "stop_on_completion",
    "replicates",
    "sweep_populations",
    "sweep_mobility_factors",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl ScenarioConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "vo_count" => self.vo_count = parse(key, v)?,
            "aos_per_vo" => self.aos_per_vo = parse(key, v)?,
            "ao_radius" => self.ao_radius = parse(key, v)?,
            "population" => self.population = parse(key, v)?,
            "population_min" => self.population_min = parse(key, v)?,
            "population_max" => self.population_max = parse(key, v)?,
            "bandwidth_mbps" => self.bandwidth_mbps = parse(key, v)?,
            "mobility_factor" => self.mobility_factor = parse(key, v)?,
            "sigma_deg" => self.sigma_deg = parse(key, v)?,
            "cell_inner_radius" => self.cell_inner_radius = parse(key, v)?,
            "cell_outer_radius" => self.cell_outer_radius = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "duration_s" => self.duration_s = parse(key, v)?,
            "step_interval_s" => self.step_interval_s = parse(key, v)?,
            "scan_interval_s" => self.scan_interval_s = parse(key, v)?,
            "initiators" => self.initiators = parse(key, v)?,
            "subjob_count" => self.subjob_count = parse(key, v)?,
            "job_work_min" => self.job_work_min = parse(key, v)?,
            "job_work_max" => self.job_work_max = parse(key, v)?,
            "cpu_rate_min" => self.cpu_rate_min = parse(key, v)?,
            "cpu_rate_max" => self.cpu_rate_max = parse(key, v)?,
            "dispatch_payload_bytes" => self.dispatch_payload_bytes = parse(key, v)?,
            "result_payload_bytes" => self.result_payload_bytes = parse(key, v)?,
            "control_message_bytes" => self.control_message_bytes = parse(key, v)?,
            "exclude_initiator" => self.exclude_initiator = parse(key, v)?,
            "stop_on_completion" => self.stop_on_completion = parse(key, v)?,
            "replicates" => self.replicates = parse(key, v)?,
            "sweep_populations" => self.sweep_populations = parse_list(key, v)?,
            "sweep_mobility_factors" => self.sweep_mobility_factors = parse_list(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Current value of every key, in `KEYS` order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let values = [
            self.vo_count.to_string(),
            self.aos_per_vo.to_string(),
            self.ao_radius.to_string(),
            self.population.to_string(),
            self.population_min.to_string(),
            self.population_max.to_string(),
            self.bandwidth_mbps.to_string(),
            self.mobility_factor.to_string(),
            self.sigma_deg.to_string(),
            self.cell_inner_radius.to_string(),
            self.cell_outer_radius.to_string(),
            self.seed.to_string(),
            self.duration_s.to_string(),
            self.step_interval_s.to_string(),
            self.scan_interval_s.to_string(),
            self.initiators.to_string(),
            self.subjob_count.to_string(),
            self.job_work_min.to_string(),
            self.job_work_max.to_string(),
            self.cpu_rate_min.to_string(),
            self.cpu_rate_max.to_string(),
            self.dispatch_payload_bytes.to_string(),
            self.result_payload_bytes.to_string(),
            self.control_message_bytes.to_string(),
            self.exclude_initiator.to_string(),
            self.stop_on_completion.to_string(),
            self.replicates.to_string(),
            join(&self.sweep_populations),
            join(&self.sweep_mobility_factors),
        ];
        KEYS.iter().copied().zip(values).collect()
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Overrides keys from `MOBGRID_*` variables supplied by `vars`.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<()>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        for (name, value) in vars {
            let Some(key) = name.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let key = key.to_ascii_lowercase();
            self.set(&key, &value)
                .map_err(|e| Error::Config(format!("{name}: {e}")))?;
        }
        Ok(())
    }

    /// Snapshot in the same format `from_text` reads.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.vo_count == 0 || self.aos_per_vo == 0 {
            return fail("vo_count and aos_per_vo must be at least 1".into());
        }
        if self.population == 0 {
            return fail("population must be at least 1".into());
        }
        if self.population_min > self.population_max {
            return fail("population_min exceeds population_max".into());
        }
        if !(self.bandwidth_mbps.is_finite() && self.bandwidth_mbps > 0.0) {
            return fail(format!(
                "bandwidth_mbps must be > 0, got {}",
                self.bandwidth_mbps
            ));
        }
        if !(0.0..=1.0).contains(&self.mobility_factor) {
            return fail(format!(
                "mobility_factor {} outside [0, 1]",
                self.mobility_factor
            ));
        }
        MobilityParams::new(self.sigma_deg)?;
        CellGeometry::new(self.cell_inner_radius, self.cell_outer_radius)?;
        if !(self.duration_s.is_finite() && self.duration_s >= 0.0) {
            return fail("duration_s must be finite and >= 0".into());
        }
        if self.step_interval_s.is_nan() || self.step_interval_s <= 0.0 {
            return fail("step_interval_s must be > 0 (inf disables movement)".into());
        }
        if !(self.scan_interval_s.is_finite() && self.scan_interval_s > 0.0) {
            return fail("scan_interval_s must be finite and > 0".into());
        }
        if self.initiators > self.population {
            return fail("initiators exceed population".into());
        }
        if self.subjob_count == 0 {
            return fail("subjob_count must be at least 1".into());
        }
        if self.job_work_min == 0 || self.job_work_min > self.job_work_max {
            return fail("need 0 < job_work_min <= job_work_max".into());
        }
        if !(self.cpu_rate_min > 0.0
            && self.cpu_rate_min <= self.cpu_rate_max
            && self.cpu_rate_max.is_finite())
        {
            return fail("need 0 < cpu_rate_min <= cpu_rate_max".into());
        }
        if self.dispatch_payload_bytes == 0
            || self.result_payload_bytes == 0
            || self.control_message_bytes == 0
        {
            return fail("message sizes must be > 0".into());
        }
        Ok(())
    }

    /// Extra checks for sweep mode: every point inside the configured ranges.
    pub fn validate_sweep(&self) -> Result<()> {
        self.validate()?;
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        for &p in &self.sweep_populations {
            if p < self.population_min || p > self.population_max || p < self.initiators {
                return Err(Error::Config(format!(
                    "sweep population {p} outside [{}, {}]",
                    self.population_min, self.population_max
                )));
            }
        }
        for &mf in &self.sweep_mobility_factors {
            if !(0.0..=1.0).contains(&mf) {
                return Err(Error::Config(format!(
                    "sweep mobility factor {mf} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn mobility_enabled(&self) -> bool {
        self.step_interval_s.is_finite()
    }

    pub fn topology(&self) -> Result<TopologyMap> {
        TopologyMap::build(self.vo_count, self.aos_per_vo, self.ao_radius)
    }

    pub fn direction_table(&self) -> Result<DirectionProbabilities> {
        let params = MobilityParams::new(self.sigma_deg)?;
        let geom = CellGeometry::new(self.cell_inner_radius, self.cell_outer_radius)?;
        Ok(direction_probabilities(&params, &confining_angles(&geom)))
    }
}
