//! Population and mobility-factor sweeps, their summaries and CSV output.

use std::io;

use crate::config::ScenarioConfig;
use crate::engine::run_quiet;
use crate::error::Result;
use crate::metrics::RunMetrics;

pub const POPULATION_SWEEP_HEADER: [&str; 5] = [
    "population",
    "replicate",
    "seed",
    "mean_exec_time_s",
    "failure_rate",
];

pub const MOBILITY_SWEEP_HEADER: [&str; 7] = [
    "mobility_factor",
    "replicate",
    "seed",
    "mean_exec_time_s",
    "failure_rate",
    "location_updates",
    "bandwidth_utilization",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Population,
    Mobility,
}

impl SweepMode {
    pub fn key(self) -> &'static str {
        match self {
            SweepMode::Population => "population",
            SweepMode::Mobility => "mobility_factor",
        }
    }

    fn metric_names(self) -> &'static [&'static str] {
        match self {
            SweepMode::Population => &POPULATION_SWEEP_HEADER[3..],
            SweepMode::Mobility => &MOBILITY_SWEEP_HEADER[3..],
        }
    }

    pub fn sweep_file(self) -> &'static str {
        match self {
            SweepMode::Population => "population_sweep.csv",
            SweepMode::Mobility => "mobility_sweep.csv",
        }
    }

    pub fn summary_file(self) -> &'static str {
        match self {
            SweepMode::Population => "population_summary.csv",
            SweepMode::Mobility => "mobility_summary.csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub replicate: usize,
    pub seed: u64,
    pub metrics: RunMetrics,
}

impl SweepRow {
    /// Metric values in header order; `None` marks an absent exec time.
    fn metric_values(&self, mode: SweepMode) -> Vec<Option<f64>> {
        let m = &self.metrics;
        let mut v = vec![m.mean_task_exec_time, Some(m.task_failure_rate)];
        if mode == SweepMode::Mobility {
            v.push(Some(m.location_updates as f64));
            v.push(Some(m.bandwidth_utilization));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub mode: SweepMode,
    pub rows: Vec<SweepRow>,
}

/// Seed of replicate `r`. The same list is reused at every sweep point so
/// points differ only in the swept parameter.
pub fn replicate_seed(base: u64, replicate: usize) -> u64 {
    base.wrapping_add(replicate as u64)
}

fn run_grid(
    configs: Vec<(f64, ScenarioConfig)>,
    replicates: usize,
    base_seed: u64,
    mode: SweepMode,
) -> Result<SweepResult> {
    let tasks: Vec<(f64, usize, &ScenarioConfig)> = configs
        .iter()
        .flat_map(|(v, c)| (0..replicates).map(move |r| (*v, r, c)))
        .collect();

    let run_one = |(value, replicate, cfg): &(f64, usize, &ScenarioConfig)| -> Result<SweepRow> {
        let seed = replicate_seed(base_seed, *replicate);
        let out = run_quiet(cfg, seed)?;
        Ok(SweepRow {
            value: *value,
            replicate: *replicate,
            seed,
            metrics: out.metrics,
        })
    };

    #[cfg(feature = "parallel")]
    let rows = {
        use rayon::prelude::*;
        tasks.par_iter().map(run_one).collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let rows = tasks.iter().map(run_one).collect::<Result<Vec<_>>>()?;

    Ok(SweepResult { mode, rows })
}

/// Stationary sweep: no movement and no churn, population varied.
pub fn sweep_population(
    base: &ScenarioConfig,
    points: &[usize],
    replicates: usize,
) -> Result<SweepResult> {
    let mut stationary = base.clone();
    stationary.mobility_factor = 0.0;
    stationary.step_interval_s = f64::INFINITY;
    let configs = points
        .iter()
        .map(|&p| {
            let mut c = stationary.clone();
            c.population = p;
            c.validate()?;
            Ok((p as f64, c))
        })
        .collect::<Result<Vec<_>>>()?;
    run_grid(configs, replicates, base.seed, SweepMode::Population)
}

/// Fixed population, mobility factor varied.
pub fn sweep_mobility(
    base: &ScenarioConfig,
    points: &[f64],
    replicates: usize,
) -> Result<SweepResult> {
    let configs = points
        .iter()
        .map(|&mf| {
            let mut c = base.clone();
            c.mobility_factor = mf;
            c.validate()?;
            Ok((mf, c))
        })
        .collect::<Result<Vec<_>>>()?;
    run_grid(configs, replicates, base.seed, SweepMode::Mobility)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub stddev: f64,
}

pub fn mean_stddev(values: &[f64]) -> Option<Stat> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stddev = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some(Stat { mean, stddev })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub value: f64,
    /// One entry per metric in header order; `None` when every replicate
    /// lacked the value.
    pub stats: Vec<Option<Stat>>,
}

impl SummaryRow {
    pub fn metric(&self, mode: SweepMode, name: &str) -> Option<Stat> {
        let idx = mode.metric_names().iter().position(|n| *n == name)?;
        self.stats[idx]
    }
}

/// Per-point mean and sample standard deviation of every metric, in the
/// order the points first appear.
pub fn summarize(result: &SweepResult) -> Vec<SummaryRow> {
    let mut points: Vec<f64> = Vec::new();
    for row in &result.rows {
        if !points.contains(&row.value) {
            points.push(row.value);
        }
    }
    let n_metrics = result.mode.metric_names().len();
    points
        .into_iter()
        .map(|value| {
            let rows: Vec<_> = result.rows.iter().filter(|r| r.value == value).collect();
            let stats = (0..n_metrics)
                .map(|i| {
                    let vals: Vec<f64> = rows
                        .iter()
                        .filter_map(|r| r.metric_values(result.mode)[i])
                        .collect();
                    mean_stddev(&vals)
                })
                .collect();
            SummaryRow { value, stats }
        })
        .collect()
}

/// Ranks with ties sharing their average rank (1-based).
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation. `None` for fewer than two points or a
/// constant series.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Spearman correlation between sweep values and per-point metric means.
pub fn trend(summary: &[SummaryRow], mode: SweepMode, metric: &str) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = summary
        .iter()
        .filter_map(|row| row.metric(mode, metric).map(|s| (row.value, s.mean)))
        .unzip();
    spearman(&x, &y)
}

fn fmt_value(mode: SweepMode, v: f64) -> String {
    match mode {
        SweepMode::Population => format!("{}", v as u64),
        SweepMode::Mobility => v.to_string(),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_sweep_csv<W: io::Write>(out: W, result: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match result.mode {
        SweepMode::Population => w.write_record(POPULATION_SWEEP_HEADER)?,
        SweepMode::Mobility => w.write_record(MOBILITY_SWEEP_HEADER)?,
    }
    for row in &result.rows {
        let mut rec = vec![
            fmt_value(result.mode, row.value),
            row.replicate.to_string(),
            row.seed.to_string(),
            fmt_opt(row.metrics.mean_task_exec_time),
            row.metrics.task_failure_rate.to_string(),
        ];
        if result.mode == SweepMode::Mobility {
            rec.push(row.metrics.location_updates.to_string());
            rec.push(row.metrics.bandwidth_utilization.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()
        .map_err(|e| crate::error::Error::Csv(e.to_string()))?;
    Ok(())
}

pub fn summary_header(mode: SweepMode) -> Vec<String> {
    let mut header = vec![mode.key().to_string()];
    for name in mode.metric_names() {
        header.push(format!("{name}_mean"));
        header.push(format!("{name}_stddev"));
    }
    header
}

pub fn write_summary_csv<W: io::Write>(
    out: W,
    mode: SweepMode,
    summary: &[SummaryRow],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(summary_header(mode))?;
    for row in summary {
        let mut rec = vec![fmt_value(mode, row.value)];
        for s in &row.stats {
            rec.push(fmt_opt(s.map(|s| s.mean)));
            rec.push(fmt_opt(s.map(|s| s.stddev)));
        }
        w.write_record(&rec)?;
    }
    w.flush()
        .map_err(|e| crate::error::Error::Csv(e.to_string()))?;
    Ok(())
}
