mod common;

use mobgrid::experiment::{
    mean_stddev, replicate_seed, spearman, summarize, summary_header, sweep_mobility,
    sweep_population, trend, write_summary_csv, write_sweep_csv, SweepMode,
};
use mobgrid::ScenarioConfig;
use proptest::prelude::*;

fn quick() -> ScenarioConfig {
    ScenarioConfig {
        duration_s: 120.0,
        ..ScenarioConfig::default()
    }
}

fn csv_text(f: impl FnOnce(&mut Vec<u8>)) -> String {
    let mut buf = Vec::new();
    f(&mut buf);
    String::from_utf8(buf).unwrap()
}

#[test]
fn sweep_headers() {
    let pop = sweep_population(&quick(), &[30, 40], 2).unwrap();
    let text = csv_text(|b| write_sweep_csv(b, &pop).unwrap());
    assert_eq!(
        text.lines().next().unwrap(),
        "population,replicate,seed,mean_exec_time_s,failure_rate"
    );
    assert_eq!(text.lines().count(), 1 + 4);
    assert!(text.lines().nth(1).unwrap().starts_with("30,0,1,"));

    let mob = sweep_mobility(&quick(), &[0.1, 0.2], 2).unwrap();
    let text = csv_text(|b| write_sweep_csv(b, &mob).unwrap());
    assert_eq!(
        text.lines().next().unwrap(),
        "mobility_factor,replicate,seed,mean_exec_time_s,failure_rate,location_updates,bandwidth_utilization"
    );
    assert!(text.lines().nth(1).unwrap().starts_with("0.1,0,1,"));
}

#[test]
fn summary_headers() {
    assert_eq!(
        summary_header(SweepMode::Population).join(","),
        "population,mean_exec_time_s_mean,mean_exec_time_s_stddev,failure_rate_mean,failure_rate_stddev"
    );
    assert_eq!(
        summary_header(SweepMode::Mobility).join(","),
        "mobility_factor,mean_exec_time_s_mean,mean_exec_time_s_stddev,failure_rate_mean,failure_rate_stddev,\
location_updates_mean,location_updates_stddev,bandwidth_utilization_mean,bandwidth_utilization_stddev"
    );
    let mob = sweep_mobility(&quick(), &[0.1, 0.3], 3).unwrap();
    let text = csv_text(|b| write_summary_csv(b, SweepMode::Mobility, &summarize(&mob)).unwrap());
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn one_row_per_point_and_replicate() {
    let r = sweep_mobility(&quick(), &[0.1, 0.2, 0.3], 4).unwrap();
    assert_eq!(r.rows.len(), 12);
    for mf in [0.1, 0.2, 0.3] {
        let mut seeds: Vec<u64> = r
            .rows
            .iter()
            .filter(|x| x.value == mf)
            .map(|x| x.seed)
            .collect();
        seeds.dedup();
        assert_eq!(seeds, vec![1, 2, 3, 4]);
    }
    assert_eq!(replicate_seed(10, 3), 13);
}

#[test]
fn sweeps_are_deterministic() {
    let a = sweep_mobility(&quick(), &[0.1, 0.4], 3).unwrap();
    let b = sweep_mobility(&quick(), &[0.1, 0.4], 3).unwrap();
    assert_eq!(a, b);
    let ta = csv_text(|w| write_sweep_csv(w, &a).unwrap());
    let tb = csv_text(|w| write_sweep_csv(w, &b).unwrap());
    assert_eq!(ta, tb);
}

#[test]
fn population_sweep_is_stationary() {
    let r = sweep_population(&quick(), &[30, 90], 3).unwrap();
    for row in &r.rows {
        assert_eq!(row.metrics.location_updates, 0);
        assert_eq!(row.metrics.aborts, 0);
        assert_eq!(row.metrics.mobility_factor, 0.0);
    }
}

#[test]
fn sweep_points_validated() {
    assert!(sweep_mobility(&quick(), &[1.5], 1).is_err());
    assert!(sweep_mobility(&quick(), &[-0.1], 1).is_err());
}

#[test]
fn textbook_statistics() {
    let s = mean_stddev(&[1.0, 2.0, 3.0]).unwrap();
    assert_eq!(s.mean, 2.0);
    assert_eq!(s.stddev, 1.0);
    let s = mean_stddev(&[4.0]).unwrap();
    assert_eq!((s.mean, s.stddev), (4.0, 0.0));
    assert_eq!(mean_stddev(&[7.0; 5]).unwrap().stddev, 0.0);
    assert!(mean_stddev(&[]).is_none());
}

#[test]
fn trend_reads_means() {
    let r = sweep_mobility(&quick(), &[0.1, 0.4], 4).unwrap();
    let summary = summarize(&r);
    let rho = trend(&summary, SweepMode::Mobility, "location_updates").unwrap();
    assert!(rho == 1.0 || rho == -1.0);
    assert!(trend(&summary, SweepMode::Mobility, "nope").is_none());
}

/// Spearman for distinct values via the rank-difference formula.
fn spearman_no_ties(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut r = vec![0.0; v.len()];
        for (i, a) in v.iter().enumerate() {
            r[i] = 1.0 + v.iter().filter(|b| *b < a).count() as f64;
        }
        r
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

proptest! {
    #[test]
    fn spearman_matches_rank_difference_formula(
        perm in Just((0..8).collect::<Vec<u32>>()).prop_shuffle(),
        scale in 0.1f64..10.0,
    ) {
        let x: Vec<f64> = (0..8).map(|i| i as f64 * scale).collect();
        let y: Vec<f64> = perm.iter().map(|&p| (p as f64).powi(3)).collect();
        let got = spearman(&x, &y).unwrap();
        prop_assert!((got - spearman_no_ties(&x, &y)).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&got));
    }
}

#[test]
fn spearman_with_ties() {
    // average ranks: x -> 1, 2.5, 2.5, 4
    let rho = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert!((rho - 0.9486832980505138).abs() < 1e-12);
    assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).is_none());
    assert!(spearman(&[1.0], &[1.0]).is_none());
}
