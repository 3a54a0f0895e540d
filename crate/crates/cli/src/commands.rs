//! The `simulate`, `invert` and `full` commands.

use std::path::{Path, PathBuf};

use waveobs_core::diagnostics::{
    energy_identity_residual, lyapunov_decrease_check, second_energy_ratios, DiagnosticEntry, DiagnosticsReport,
};
use waveobs_core::{
    add_noise, simulate_forward, BackAndForth, BackAndForthRun, Gains, Grid1D, MeasurementRecord, ScalarField,
    ScenarioConfig, TimeSeries,
};

use crate::error::{CliError, CliResult};
use crate::io;
use crate::manifest::RunManifest;

/// Lyapunov increases up to this fraction of `V0` count as round-off.
pub const LYAPUNOV_TOLERANCE: f64 = 1e-3;
/// Largest admissible relative residual of the first energy identity.
pub const ENERGY_TOLERANCE: f64 = 1e-2;
/// Cap on the ratio of the second energy bundle to its initial data.
pub const SECOND_ENERGY_CAP: f64 = 10.0;
/// Allowed growth of the second energy bundle from the first to the second
/// half of a run.
pub const SECOND_ENERGY_SLACK: f64 = 0.05;

/// Options shared by every command.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub quiet: bool,
    /// Fill the `seconds` column of `iterations.csv` with wall-clock times.
    pub timing: bool,
    pub jobs: usize,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            quiet: true,
            timing: false,
            jobs: 1,
        }
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Reads and validates a scenario. `None` gives the reference defaults.
pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> CliResult<ScenarioConfig> {
    let mut config = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str::<ScenarioConfig>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

pub(crate) fn prepare_out(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Everything derived from a validated configuration.
struct Scenario {
    grid: Grid1D,
    gains: Gains,
    q: ScalarField,
}

impl Scenario {
    fn new(config: &ScenarioConfig) -> CliResult<Self> {
        let (grid, gains, source) = config.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let q = source.sample(&grid);
        Ok(Self { grid, gains, q })
    }
}

fn core_err(e: waveobs_core::Error) -> CliError {
    CliError::Data(e.to_string())
}

fn simulation_outputs(config: &ScenarioConfig) -> Vec<&'static str> {
    let mut v = vec!["measurement.csv"];
    if config.noise > 0.0 {
        v.push("measurement_noisy.csv");
    }
    v
}

fn inversion_outputs(config: &ScenarioConfig, truth: bool) -> Vec<String> {
    let mut v = vec!["iterations.csv".to_string()];
    v.extend(
        (0..=config.iterations)
            .filter(|k| k % config.snapshot_stride == 0)
            .map(|k| format!("estimate_iter_{k}.csv")),
    );
    v.push("estimate_final.csv".into());
    if truth {
        v.push("diagnostics.csv".into());
    }
    v
}

/// Clean and (optionally) noisy measurements, written as CSV.
fn write_simulation(config: &ScenarioConfig, sc: &Scenario, opts: &RunOptions) -> CliResult<MeasurementRecord> {
    opts.say(format!(
        "simulating {} steps on {} cells (omega = {})",
        sc.grid.n_steps_per_pass(),
        sc.grid.nx(),
        config.omega
    ));
    let clean = simulate_forward(&sc.q, config.omega, &sc.grid).map_err(core_err)?;
    io::write_measurement(&opts.path("measurement.csv"), &clean.y)?;
    if config.noise > 0.0 {
        let noisy = add_noise(&clean, config.noise, config.seed).map_err(core_err)?;
        io::write_measurement(&opts.path("measurement_noisy.csv"), &noisy.y)?;
        return Ok(noisy);
    }
    Ok(clean)
}

/// Converts a `t,y` file into a measurement sampled on `grid`.
pub fn measurement_from_columns(t: &[f64], y: &[f64], omega: f64, grid: &Grid1D) -> CliResult<MeasurementRecord> {
    let expected = grid.n_steps_per_pass() + 1;
    if y.len() != expected {
        return Err(CliError::Data(format!(
            "measurement has {} samples, the grid needs {expected}",
            y.len()
        )));
    }
    let dt = grid.dt();
    let tol = 1e-9 * grid.horizon();
    for (n, tn) in t.iter().enumerate() {
        if (tn - n as f64 * dt).abs() > tol {
            return Err(CliError::Data(format!(
                "sample {n} is at t = {tn}, the grid expects {}",
                n as f64 * dt
            )));
        }
    }
    if let Some(n) = y.iter().position(|v| !v.is_finite()) {
        return Err(CliError::Data(format!("sample {n} is not finite")));
    }
    Ok(MeasurementRecord::from_series(
        TimeSeries::new(y.to_vec(), dt),
        omega,
        grid.horizon(),
    ))
}

/// Run-level checks of a monitored inversion.
pub fn run_diagnostics(run: &BackAndForthRun, gains: Gains, omega: f64, grid: &Grid1D) -> CliResult<DiagnosticsReport> {
    let mut report = DiagnosticsReport::default();
    let v0 = *run
        .lyapunov
        .first()
        .ok_or_else(|| CliError::Data("run was not monitored".into()))?;
    report.push(lyapunov_decrease_check(&run.lyapunov, LYAPUNOV_TOLERANCE * v0).map_err(core_err)?);
    let residual = energy_identity_residual(&run.trajectory, gains, omega, grid).map_err(core_err)?;
    report.push(DiagnosticEntry::at_most(
        "energy_identity",
        "first energy identity of the error system",
        residual,
        ENERGY_TOLERANCE,
    ));
    let second = second_energy_ratios(&run.trajectory, gains, omega, grid).map_err(core_err)?;
    report.push(DiagnosticEntry::new(
        "second_energy_bounded",
        "higher-order energy of the error system bounded by its initial data",
        second.max_ratio,
        SECOND_ENERGY_CAP,
        second.max_ratio < SECOND_ENERGY_CAP,
    ));
    let growth = second.second_half_max / second.first_half_max.max(f64::MIN_POSITIVE);
    report.push(DiagnosticEntry::new(
        "second_energy_non_growing",
        "higher-order energy shows no growth trend",
        growth,
        1.0 + SECOND_ENERGY_SLACK,
        second.non_growing(SECOND_ENERGY_SLACK),
    ));
    let hidden = run.hidden_regularity.iter().copied().fold(0.0, f64::max);
    report.push(DiagnosticEntry::at_most(
        "hidden_regularity_observer",
        "boundary trace bound for the observer wave",
        hidden,
        1.0,
    ));
    Ok(report)
}

/// Runs the observer on `m` and writes the per-iteration artifacts.
fn write_inversion(
    config: &ScenarioConfig,
    sc: &Scenario,
    m: &MeasurementRecord,
    truth: bool,
    opts: &RunOptions,
) -> CliResult<(BackAndForthRun, Option<DiagnosticsReport>)> {
    opts.say(format!("running {} back-and-forth iterations", config.iterations));
    let mut driver = BackAndForth::new(m, sc.gains, config.omega, &sc.grid).iterations(config.iterations);
    if truth {
        driver = driver.truth(&sc.q);
    }
    let run = driver.run().map_err(core_err)?;
    for w in &run.warnings {
        opts.say(format!("warning: {w}"));
    }
    let q_true = truth.then_some(&sc.q);

    io::write_iterations(&opts.path("iterations.csv"), &run.reports, opts.timing)?;
    for (k, q_hat) in run.estimates.iter().enumerate() {
        if k % config.snapshot_stride == 0 {
            io::write_estimate(&opts.path(&format!("estimate_iter_{k}.csv")), &sc.grid, q_hat, q_true)?;
        }
    }
    let last = run.estimates.last().expect("at least the initial estimate");
    io::write_estimate(&opts.path("estimate_final.csv"), &sc.grid, last, q_true)?;

    let report = if truth {
        let mut report = run_diagnostics(&run, sc.gains, config.omega, &sc.grid)?;
        if m.noise_level > 0.0 {
            report.note("noisy measurement: the energy identities hold for clean data only");
        }
        io::write_checks(&opts.path("diagnostics.csv"), &report.entries)?;
        opts.say(report.summary());
        Some(report)
    } else {
        None
    };
    if let Some(r) = run.reports.last() {
        if let Some(e) = r.l2_err {
            opts.say(format!("final L2 error {e:.4e}"));
        }
    }
    Ok((run, report))
}

fn write_manifest(
    command: &str,
    config: &ScenarioConfig,
    inputs: Vec<PathBuf>,
    outputs: Vec<String>,
    opts: &RunOptions,
) -> CliResult<()> {
    let mut manifest = RunManifest::new(command, Some(config));
    manifest.inputs = inputs;
    manifest.outputs = outputs.into_iter().map(|o| opts.path(&o)).collect();
    manifest.write(&opts.out)?;
    Ok(())
}

pub fn cmd_simulate(config: &ScenarioConfig, opts: &RunOptions) -> CliResult<()> {
    let sc = Scenario::new(config)?;
    prepare_out(&opts.out)?;
    let outputs = simulation_outputs(config).into_iter().map(String::from).collect();
    write_manifest("simulate", config, Vec::new(), outputs, opts)?;
    write_simulation(config, &sc, opts)?;
    Ok(())
}

/// Inverts the measurement in `measurement`. With `truth`, the configured
/// source is taken as ground truth for error columns and diagnostics.
pub fn cmd_invert(config: &ScenarioConfig, measurement: &Path, truth: bool, opts: &RunOptions) -> CliResult<()> {
    let sc = Scenario::new(config)?;
    let (t, y) = io::read_measurement(measurement)?;
    let m = measurement_from_columns(&t, &y, config.omega, &sc.grid)?;
    prepare_out(&opts.out)?;
    write_manifest(
        "invert",
        config,
        vec![measurement.to_path_buf()],
        inversion_outputs(config, truth),
        opts,
    )?;
    write_inversion(config, &sc, &m, truth, opts)?;
    Ok(())
}

/// Simulation, noise, inversion with truth monitoring and diagnostics.
pub fn cmd_full(config: &ScenarioConfig, opts: &RunOptions) -> CliResult<()> {
    let sc = Scenario::new(config)?;
    prepare_out(&opts.out)?;
    let mut outputs: Vec<String> = simulation_outputs(config).into_iter().map(String::from).collect();
    outputs.extend(inversion_outputs(config, true));
    outputs.push("lyapunov.csv".into());
    write_manifest("full", config, Vec::new(), outputs, opts)?;

    let m = write_simulation(config, &sc, opts)?;
    let (run, _) = write_inversion(config, &sc, &m, true, opts)?;
    io::write_lyapunov(&opts.path("lyapunov.csv"), &run.reports)?;
    Ok(())
}
