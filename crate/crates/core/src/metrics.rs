//! Per-run performance metrics.
//!
//! [`RunMetrics::from_simulation`] reads the engine's counters directly;
//! [`measure_run`] derives the same numbers by scanning an exported event log.
//! The two paths are kept independent so each can check the other.

use std::collections::BTreeMap;
use std::io;

use crate::engine::link::busy_within;
use crate::engine::{EventLog, Simulation};
use crate::error::{Error, Result};
use crate::services::failure_rate;

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub population: usize,
    pub mobility_factor: f64,
    pub jobs_submitted: usize,
    pub jobs_completed: usize,
    /// Mean submission-to-last-result time over completed jobs; `None` when
    /// no job completed.
    pub mean_task_exec_time: Option<f64>,
    pub task_failure_rate: f64,
    pub dispatches: u64,
    pub aborts: u64,
    /// BSMS database writes: moves, joins, re-registrations and departures.
    pub location_updates: u64,
    pub bandwidth_utilization: f64,
    pub vo_utilization: Vec<f64>,
    pub elapsed: f64,
}

impl RunMetrics {
    pub fn jobs_incomplete(&self) -> usize {
        self.jobs_submitted - self.jobs_completed
    }

    pub fn from_simulation(sim: &Simulation) -> Self {
        let cfg = sim.config();
        let services = sim.services();
        let jadb = services.jadb();
        let elapsed = sim.elapsed();

        let exec_times: Vec<f64> = jadb.jobs().filter_map(|j| j.exec_time()).collect();
        let busy: Vec<f64> = sim.links().iter().map(|l| l.busy_time(elapsed)).collect();
        let (overall, per_vo) = utilization(&busy, elapsed);

        Self {
            population: cfg.population,
            mobility_factor: cfg.mobility_factor,
            jobs_submitted: jadb.jobs().count(),
            jobs_completed: exec_times.len(),
            mean_task_exec_time: mean(&exec_times),
            task_failure_rate: jadb.failure_rate(),
            dispatches: jadb.dispatches(),
            aborts: jadb.aborts(),
            location_updates: services.bsms().total_updates(),
            bandwidth_utilization: overall,
            vo_utilization: per_vo,
            elapsed,
        }
    }

    /// Metrics of a run that processed nothing.
    pub fn empty(population: usize, mobility_factor: f64) -> Self {
        Self {
            population,
            mobility_factor,
            jobs_submitted: 0,
            jobs_completed: 0,
            mean_task_exec_time: None,
            task_failure_rate: 0.0,
            dispatches: 0,
            aborts: 0,
            location_updates: 0,
            bandwidth_utilization: 0.0,
            vo_utilization: Vec::new(),
            elapsed: 0.0,
        }
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn utilization(busy: &[f64], elapsed: f64) -> (f64, Vec<f64>) {
    if elapsed <= 0.0 || busy.is_empty() {
        return (0.0, vec![0.0; busy.len()]);
    }
    let per_vo = busy.iter().map(|b| b / elapsed).collect();
    let overall = busy.iter().sum::<f64>() / (busy.len() as f64 * elapsed);
    (overall, per_vo)
}

/// Column order of `metrics.csv`; one `vo<i>_utilization` column per VO
/// follows these.
pub const METRICS_HEADER: [&str; 13] = [
    "population",
    "mobility_factor",
    "seed",
    "jobs_submitted",
    "jobs_completed",
    "jobs_incomplete",
    "mean_exec_time_s",
    "failure_rate",
    "dispatches",
    "aborts",
    "location_updates",
    "bandwidth_utilization",
    "elapsed_s",
];

/// Writes a header and a single row for one run. An absent exec time is an
/// empty cell.
pub fn write_metrics_csv<W: io::Write>(out: W, seed: u64, m: &RunMetrics) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = METRICS_HEADER.iter().map(|s| s.to_string()).collect();
    header.extend((0..m.vo_utilization.len()).map(|i| format!("vo{i}_utilization")));
    w.write_record(&header)?;

    let mut row = vec![
        m.population.to_string(),
        m.mobility_factor.to_string(),
        seed.to_string(),
        m.jobs_submitted.to_string(),
        m.jobs_completed.to_string(),
        m.jobs_incomplete().to_string(),
        m.mean_task_exec_time
            .map(|t| t.to_string())
            .unwrap_or_default(),
        m.task_failure_rate.to_string(),
        m.dispatches.to_string(),
        m.aborts.to_string(),
        m.location_updates.to_string(),
        m.bandwidth_utilization.to_string(),
        m.elapsed.to_string(),
    ];
    row.extend(m.vo_utilization.iter().map(f64::to_string));
    w.write_record(&row)?;
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

/// Derives run metrics from an event log alone.
pub fn measure_run(log: &EventLog) -> Result<RunMetrics> {
    let mut population = 0usize;
    let mut mobility_factor = 0.0;
    let mut elapsed = 0.0;
    let mut submitted = 0usize;
    let mut exec: BTreeMap<u64, f64> = BTreeMap::new();
    let mut dispatches = 0u64;
    let mut aborts = 0u64;
    let mut updates = 0u64;
    let mut intervals: Vec<Vec<(f64, f64)>> = Vec::new();

    for rec in log.records() {
        let rec = rec?;
        match rec.kind {
            "start" => {
                population = rec.get("population")?;
                mobility_factor = rec.get("mobility_factor")?;
                let vo_count: usize = rec.get("vo_count")?;
                intervals = vec![Vec::new(); vo_count];
            }
            "submit" => submitted += 1,
            "job_done" => {
                exec.insert(rec.get("job")?, rec.get("exec_time")?);
            }
            "dispatch" => dispatches += 1,
            "abort" => aborts += 1,
            "move" | "join" | "handover" => updates += 1,
            "msg" => {
                let vo: usize = rec.get("vo")?;
                let slot = intervals.get_mut(vo).ok_or_else(|| Error::Log {
                    line: rec.line,
                    msg: format!("message on unknown VO {vo}"),
                })?;
                slot.push((rec.get("start")?, rec.get("deliver")?));
            }
            "end" => elapsed = rec.get("elapsed")?,
            _ => {}
        }
    }

    let exec_times: Vec<f64> = exec.into_values().collect();
    let busy: Vec<f64> = intervals
        .iter()
        .map(|iv| busy_within(iv.iter().copied(), elapsed))
        .collect();
    let (overall, per_vo) = utilization(&busy, elapsed);

    Ok(RunMetrics {
        population,
        mobility_factor,
        jobs_submitted: submitted,
        jobs_completed: exec_times.len(),
        mean_task_exec_time: mean(&exec_times),
        task_failure_rate: failure_rate(aborts, dispatches),
        dispatches,
        aborts,
        location_updates: updates,
        bandwidth_utilization: overall,
        vo_utilization: per_vo,
        elapsed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_log_has_no_exec_time() {
        let m = measure_run(&EventLog::new()).unwrap();
        assert_eq!(m.mean_task_exec_time, None);
        assert_eq!(m.location_updates, 0);
        assert_eq!(m.bandwidth_utilization, 0.0);
        assert_eq!(m.task_failure_rate, 0.0);
    }

    #[test]
    fn metrics_row_layout() {
        let mut m = RunMetrics::empty(30, 0.1);
        m.vo_utilization = vec![0.25, 0.5];
        let mut buf = Vec::new();
        write_metrics_csv(&mut buf, 7, &m).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines
            .next()
            .unwrap()
            .ends_with("elapsed_s,vo0_utilization,vo1_utilization"));
        assert_eq!(
            lines.next().unwrap(),
            "30,0.1,7,0,0,0,,0,0,0,0,0,0,0.25,0.5"
        );
    }

    #[test]
    fn utilization_split() {
        let (overall, per_vo) = utilization(&[1.0, 3.0], 10.0);
        assert_eq!(per_vo, vec![0.1, 0.3]);
        assert!((overall - 0.2).abs() < 1e-15);
    }
}
