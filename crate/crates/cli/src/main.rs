use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use mobgrid::engine::stream_rng;
use mobgrid::experiment::{
    summarize, sweep_mobility, sweep_population, write_summary_csv, write_sweep_csv, SweepMode,
};
use mobgrid::hex::HexCoord;
use mobgrid::mobility::{
    advance, classify_angle, direction_probabilities, sample_drift_angle, ConfiningAngles,
    MobilityParams, RelativeDirection, WalkerState,
};
use mobgrid::{run, write_metrics_csv, ScenarioConfig};

#[derive(Parser)]
#[command(name = "mobgrid", version, about = "Wireless mobile grid simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write metrics.csv, events.log and effective.conf.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a population or mobility-factor sweep and write its CSVs.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        replicates: Option<usize>,
        /// Base seed; replicate r uses seed + r.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the six direction probabilities for a drift spread.
    Probs {
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
    },
    /// Trace a single walker on the hex lattice.
    Walk {
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        #[arg(long, default_value_t = 20)]
        steps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Population,
    Mobility,
}

/// Bad input (exit 2) versus a failure while doing the work (exit 3).
enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

trait Classify<T> {
    fn invalid(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn invalid(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Invalid(e.into()))
    }

    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

fn load_config(path: Option<&Path>) -> Result<ScenarioConfig, Failure> {
    let mut cfg = ScenarioConfig::default();
    if let Some(path) = path {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .invalid()?;
        cfg.apply_text(&text)
            .with_context(|| format!("in {}", path.display()))
            .invalid()?;
    }
    cfg.apply_env(std::env::vars()).invalid()?;
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
        .runtime()
}

fn cmd_run(config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<(), Failure> {
    let mut cfg = load_config(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    cfg.validate().invalid()?;
    fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .runtime()?;

    let result = run(&cfg, cfg.seed).runtime()?;

    let mut w = create(out, "metrics.csv")?;
    write_metrics_csv(&mut w, cfg.seed, &result.metrics).runtime()?;
    w.flush().runtime()?;

    let mut w = create(out, "events.log")?;
    w.write_all(result.log.to_text().as_bytes()).runtime()?;
    w.flush().runtime()?;

    fs::write(out.join("effective.conf"), cfg.to_text()).runtime()?;

    let m = &result.metrics;
    let exec = m
        .mean_task_exec_time
        .map(|t| format!("{t:.4}s"))
        .unwrap_or_else(|| "n/a".into());
    println!(
        "jobs {}/{} done, mean exec time {exec}, failure rate {:.4}, updates {}, utilization {:.6}",
        m.jobs_completed,
        m.jobs_submitted,
        m.task_failure_rate,
        m.location_updates,
        m.bandwidth_utilization
    );
    Ok(())
}

fn cmd_sweep(
    config: Option<&Path>,
    mode: Mode,
    replicates: Option<usize>,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), Failure> {
    let mut cfg = load_config(config)?;
    if let Some(r) = replicates {
        cfg.replicates = r;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate_sweep().invalid()?;
    fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .runtime()?;

    let (mode, result) = match mode {
        Mode::Population => (
            SweepMode::Population,
            sweep_population(&cfg, &cfg.sweep_populations, cfg.replicates),
        ),
        Mode::Mobility => (
            SweepMode::Mobility,
            sweep_mobility(&cfg, &cfg.sweep_mobility_factors, cfg.replicates),
        ),
    };
    let result = result.runtime()?;

    let mut w = create(out, mode.sweep_file())?;
    write_sweep_csv(&mut w, &result).runtime()?;
    w.flush().runtime()?;

    let mut w = create(out, mode.summary_file())?;
    write_summary_csv(&mut w, mode, &summarize(&result)).runtime()?;
    w.flush().runtime()?;

    println!(
        "{} runs written to {} and {}",
        result.rows.len(),
        out.join(mode.sweep_file()).display(),
        out.join(mode.summary_file()).display()
    );
    Ok(())
}

fn cmd_probs(sigma: f64) -> Result<(), Failure> {
    let params = MobilityParams::new(sigma).invalid()?;
    let probs = direction_probabilities(&params, &ConfiningAngles::default());
    let mut out = io::stdout().lock();
    let mut emit = || -> io::Result<()> {
        writeln!(out, "sigma = {sigma}")?;
        writeln!(out, "k  dir  probability")?;
        for dir in RelativeDirection::ALL {
            writeln!(
                out,
                "{}  {:<3}  {:.6}",
                dir.index(),
                dir.label(),
                probs.get(dir)
            )?;
        }
        writeln!(out, "sum = {:.6}", probs.sum())
    };
    emit().runtime()
}

fn cmd_walk(sigma: f64, steps: u64, seed: u64) -> Result<(), Failure> {
    let params = MobilityParams::new(sigma).invalid()?;
    let angles = ConfiningAngles::default();
    let mut rng = stream_rng(seed, 0);
    let mut state = WalkerState::new(HexCoord::new(0, 0), 0).runtime()?;

    let mut out = BufWriter::new(io::stdout().lock());
    let mut emit = || -> anyhow::Result<()> {
        writeln!(out, "step\ttheta_deg\tk\tdir\theading\tq\tr")?;
        for step in 1..=steps {
            let theta = sample_drift_angle(&mut rng, &params);
            let dir = classify_angle(theta, &angles)?;
            state = advance(state, dir);
            writeln!(
                out,
                "{step}\t{theta:.4}\t{}\t{}\t{}\t{}\t{}",
                dir.index(),
                dir.label(),
                state.heading(),
                state.cell.q,
                state.cell.r
            )?;
        }
        out.flush()?;
        Ok(())
    };
    emit().runtime()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { config, seed, out } => cmd_run(config.as_deref(), *seed, out),
        Command::Sweep {
            config,
            mode,
            replicates,
            seed,
            out,
        } => cmd_sweep(config.as_deref(), *mode, *replicates, *seed, out),
        Command::Probs { sigma } => cmd_probs(*sigma),
        Command::Walk { sigma, steps, seed } => cmd_walk(*sigma, *steps, *seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
