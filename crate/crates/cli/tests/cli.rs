use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mobgrid(args: &[&str]) -> Output {
    mobgrid_env(args, &[])
}

fn mobgrid_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mobgrid"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.conf");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn probs_table() {
    let out = mobgrid(&["probs", "--sigma", "30"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("3  F    0.408551"));
    assert!(text.contains("sum = 1.000000"));

    let text = stdout(&mobgrid(&["probs", "--sigma", "90"]));
    assert!(text.contains("0  B    0.317311"));
}

#[test]
fn probs_rejects_out_of_range() {
    for sigma in ["4", "91", "-10"] {
        let out = mobgrid(&["probs", "--sigma", sigma]);
        assert_eq!(out.status.code(), Some(2), "sigma {sigma}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("outside"));
    }
}

#[test]
fn walk_trace_is_deterministic() {
    let a = mobgrid(&["walk", "--sigma", "45", "--steps", "50", "--seed", "9"]);
    let b = mobgrid(&["walk", "--sigma", "45", "--steps", "50", "--seed", "9"]);
    let c = mobgrid(&["walk", "--sigma", "45", "--steps", "50", "--seed", "10"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step\ttheta_deg\tk\tdir\theading\tq\tr"
    );
    let rows: Vec<Vec<i64>> = lines
        .map(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            vec![
                cols[4].parse().unwrap(),
                cols[5].parse().unwrap(),
                cols[6].parse().unwrap(),
            ]
        })
        .collect();
    assert_eq!(rows.len(), 50);
    let mut prev = (0i64, 0i64);
    for r in rows {
        let (dq, dr) = (r[1] - prev.0, r[2] - prev.1);
        // axial neighbours differ by one unit with dq + dr in {-1, 0, 1}
        assert!(dq.abs() <= 1 && dr.abs() <= 1 && (dq + dr).abs() <= 1 && (dq, dr) != (0, 0));
        prev = (r[1], r[2]);
    }
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(
        dir.path(),
        "# short run\npopulation = 40\nduration_s = 120\n",
    );
    let out_dir = dir.path().join("out");
    let out = mobgrid(&[
        "run",
        "--config",
        &conf,
        "--seed",
        "5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    assert_eq!(
        first_line(&out_dir.join("metrics.csv")),
        "population,mobility_factor,seed,jobs_submitted,jobs_completed,jobs_incomplete,\
mean_exec_time_s,failure_rate,dispatches,aborts,location_updates,bandwidth_utilization,\
elapsed_s,vo0_utilization,vo1_utilization"
    );
    let metrics = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert!(metrics.lines().nth(1).unwrap().starts_with("40,0.2,5,"));

    let log = fs::read_to_string(out_dir.join("events.log")).unwrap();
    assert!(log.starts_with("0\t-\tstart\tpopulation=40"));
    let effective = fs::read_to_string(out_dir.join("effective.conf")).unwrap();
    assert!(effective.contains("population = 40\n"));
    assert!(effective.contains("seed = 5\n"));

    // the snapshot reproduces the run on its own
    let again = dir.path().join("again");
    let conf2 = out_dir.join("effective.conf");
    let out = mobgrid(&[
        "run",
        "--config",
        conf2.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(log, fs::read_to_string(again.join("events.log")).unwrap());
    assert_eq!(
        metrics,
        fs::read_to_string(again.join("metrics.csv")).unwrap()
    );
}

#[test]
fn env_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = mobgrid_env(
        &["run", "--out", out_dir.to_str().unwrap()],
        &[("MOBGRID_POPULATION", "35"), ("MOBGRID_DURATION_S", "60")],
    );
    assert!(out.status.success());
    let effective = fs::read_to_string(out_dir.join("effective.conf")).unwrap();
    assert!(effective.contains("population = 35\n"));
    assert!(effective.contains("duration_s = 60\n"));

    let out = mobgrid_env(
        &["run", "--out", out_dir.to_str().unwrap()],
        &[("MOBGRID_POPULATION", "many")],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    for text in [
        "colour = blue\n",
        "sigma_deg = 2\n",
        "population\n",
        "bandwidth_mbps = -1\n",
    ] {
        let conf = write_config(dir.path(), text);
        let out = mobgrid(&["run", "--config", &conf, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{text:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = mobgrid(&[
        "run",
        "--config",
        "/nonexistent/x.conf",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = mobgrid(&["run", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(
        dir.path(),
        "duration_s = 60\nsweep_populations = 30, 60\nsweep_mobility_factors = 0.1,0.4\n",
    );
    let out_dir = dir.path().join("sweeps");
    let out_s = out_dir.to_str().unwrap();

    let out = mobgrid(&[
        "sweep",
        "--config",
        &conf,
        "--mode",
        "population",
        "--replicates",
        "3",
        "--out",
        out_s,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        first_line(&out_dir.join("population_sweep.csv")),
        "population,replicate,seed,mean_exec_time_s,failure_rate"
    );
    assert_eq!(
        first_line(&out_dir.join("population_summary.csv")),
        "population,mean_exec_time_s_mean,mean_exec_time_s_stddev,failure_rate_mean,failure_rate_stddev"
    );
    let rows = fs::read_to_string(out_dir.join("population_sweep.csv")).unwrap();
    assert_eq!(rows.lines().count(), 7);

    let out = mobgrid(&[
        "sweep",
        "--config",
        &conf,
        "--mode",
        "mobility",
        "--replicates",
        "2",
        "--out",
        out_s,
    ]);
    assert!(out.status.success());
    assert_eq!(
        first_line(&out_dir.join("mobility_sweep.csv")),
        "mobility_factor,replicate,seed,mean_exec_time_s,failure_rate,location_updates,bandwidth_utilization"
    );
    assert_eq!(
        first_line(&out_dir.join("mobility_summary.csv")),
        "mobility_factor,mean_exec_time_s_mean,mean_exec_time_s_stddev,failure_rate_mean,failure_rate_stddev,\
location_updates_mean,location_updates_stddev,bandwidth_utilization_mean,bandwidth_utilization_stddev"
    );
    let first = fs::read(out_dir.join("mobility_sweep.csv")).unwrap();
    let out = mobgrid(&[
        "sweep",
        "--config",
        &conf,
        "--mode",
        "mobility",
        "--replicates",
        "2",
        "--out",
        out_s,
    ]);
    assert!(out.status.success());
    assert_eq!(first, fs::read(out_dir.join("mobility_sweep.csv")).unwrap());
}

#[test]
fn sweep_rejects_bad_points() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), "sweep_populations = 10, 200\n");
    let out = mobgrid(&[
        "sweep",
        "--config",
        &conf,
        "--mode",
        "population",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = mobgrid(&[
        "sweep",
        "--mode",
        "sideways",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = mobgrid(&[
        "sweep",
        "--mode",
        "mobility",
        "--replicates",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shipped_config_is_the_default() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.conf");
    let text = fs::read_to_string(path).unwrap();
    let cfg = mobgrid::ScenarioConfig::from_text(&text).unwrap();
    assert_eq!(cfg, mobgrid::ScenarioConfig::default());
}
