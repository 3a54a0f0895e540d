//! Built-in diagnostics battery behind `waveobs verify`.

use waveobs_core::diagnostics::{
    equivalence_metrics, forced_field_error, hidden_regularity_ratio, kernel_energy_drift, kernel_round_trip_error,
    DiagnosticEntry,
};
use waveobs_core::spectral::ModeVector;
use waveobs_core::{
    simulate_cascade, simulate_forward, BackAndForth, Gains, Grid1D, ScalarField, SourceProfile, TimeSeries,
};

use crate::commands::{prepare_out, run_diagnostics, RunOptions};
use crate::error::{CliError, CliResult};
use crate::io;
use crate::manifest::RunManifest;

/// Relative discrepancies below this level are round-off; a refinement ratio
/// between two such values carries no information.
pub const ROUND_OFF_FLOOR: f64 = 1e-8;
/// Accepted error-reduction factors per halving of `dx` for a second-order
/// quantity.
pub const ORDER_RANGE: (f64, f64) = (3.0, 5.0);

type Group = fn(bool) -> CliResult<Vec<DiagnosticEntry>>;

/// Check groups in battery order: each group produces the listed checks.
const GROUPS: &[(&[&str], Group)] = &[
    (&["kernel_energy", "kernel_round_trip", "kernel_oracle_order"], kernel_group),
    (
        &[
            "output_equivalence_omega0",
            "output_equivalence_omega1",
            "output_equivalence_order_omega0",
            "output_equivalence_order_omega1",
        ],
        equivalence_group,
    ),
    (&["hidden_regularity_analytic"], analytic_trace_group),
    (
        &[
            "lyapunov_decrease",
            "energy_identity",
            "energy_identity_order",
            "second_energy_bounded",
            "second_energy_non_growing",
            "hidden_regularity_observer",
        ],
        reference_group,
    ),
];

/// Every check name, in battery order.
pub fn check_names() -> Vec<&'static str> {
    GROUPS.iter().flat_map(|(names, _)| names.iter().copied()).collect()
}

fn order_entry(check: &str, anchor: &str, coarse: f64, fine: f64) -> DiagnosticEntry {
    let ratio = coarse / fine;
    let at_floor = coarse <= ROUND_OFF_FLOOR && fine <= ROUND_OFF_FLOOR;
    let in_range = (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&ratio);
    DiagnosticEntry::new(check, anchor, ratio, ORDER_RANGE.0, at_floor || in_range)
}

fn kernel_group(_: bool) -> CliResult<Vec<DiagnosticEntry>> {
    let g = Grid1D::new(20, 0.5, 1.0).map_err(data)?;
    let sine = SourceProfile::SineMode(1).sample(&g);
    let poly = SourceProfile::PolyPaper.sample(&g);
    let drift = kernel_energy_drift(&sine, &g, 10_000).map_err(data)?;
    let round_trip = kernel_round_trip_error(&poly, &g, 10_000).map_err(data)?;
    let q = ModeVector::poly_paper(64);
    let coarse = forced_field_error(&q, 1.0, &Grid1D::new(20, 0.005, 1.0).map_err(data)?).map_err(data)?;
    let fine = forced_field_error(&q, 1.0, &Grid1D::new(40, 0.005, 1.0).map_err(data)?).map_err(data)?;
    Ok(vec![
        DiagnosticEntry::at_most("kernel_energy", "leapfrog energy conservation", drift, 1e-10),
        DiagnosticEntry::at_most("kernel_round_trip", "time reversibility of the leapfrog", round_trip, 1e-12),
        order_entry("kernel_oracle_order", "second-order convergence to the sine-series solution", coarse, fine),
    ])
}

fn equivalence_discrepancy(omega: f64, nx: usize) -> CliResult<f64> {
    let g = Grid1D::new(nx, 0.005, 3.0).map_err(data)?;
    let q = SourceProfile::SineMode(1).sample(&g);
    let y = simulate_forward(&q, omega, &g).map_err(data)?;
    let cascade = simulate_cascade(&q, omega, &g).map_err(data)?;
    Ok(equivalence_metrics(&y.y, &cascade.output).map_err(data)?.0)
}

fn equivalence_group(_: bool) -> CliResult<Vec<DiagnosticEntry>> {
    let mut out = Vec::new();
    let mut orders = Vec::new();
    for (omega, tag) in [(0.0, "omega0"), (1.0, "omega1")] {
        let coarse = equivalence_discrepancy(omega, 20)?;
        let fine = equivalence_discrepancy(omega, 40)?;
        out.push(DiagnosticEntry::at_most(
            &format!("output_equivalence_{tag}"),
            "measured output equals the cascade oscillator output",
            coarse,
            1e-2,
        ));
        orders.push(order_entry(
            &format!("output_equivalence_order_{tag}"),
            "output discrepancy vanishes at second order",
            coarse,
            fine,
        ));
    }
    out.extend(orders);
    Ok(out)
}

fn analytic_trace_group(_: bool) -> CliResult<Vec<DiagnosticEntry>> {
    let g = Grid1D::new(200, 0.5, 2.0).map_err(data)?;
    let n = g.n_steps_per_pass();
    let q0 = SourceProfile::SineMode(1).sample(&g);
    let zero = ScalarField::zeros(&g);
    let (_, trace) = waveobs_core::wave::run_homogeneous(&q0, &zero, &g, n, waveobs_core::Direction::Forward)
        .map_err(data)?;
    let f = TimeSeries::zeros(n + 1, g.dt());
    let r = hidden_regularity_ratio(&f, &q0, &zero, &trace, g.horizon(), &g).map_err(data)?;
    Ok(vec![DiagnosticEntry::at_most(
        "hidden_regularity_analytic",
        "boundary trace bound, standing sine mode (ratio 1/4)",
        (r - 0.25).abs(),
        1e-2,
    )])
}

fn reference_group(inject_sign_error: bool) -> CliResult<Vec<DiagnosticEntry>> {
    let gains = Gains::default();
    let omega = 1.0;
    let monitored = |nx: usize| -> CliResult<_> {
        let g = Grid1D::new(nx, 0.005, 3.0).map_err(data)?;
        let q = SourceProfile::PolyPaper.sample(&g);
        let m = simulate_forward(&q, omega, &g).map_err(data)?;
        let mut driver = BackAndForth::new(&m, gains, omega, &g).iterations(50).truth(&q);
        if inject_sign_error {
            driver.injection_sign = -1.0;
        }
        let run = driver.run().map_err(data)?;
        Ok((run, g))
    };
    let (run, g) = monitored(20)?;
    let mut entries = run_diagnostics(&run, gains, omega, &g)?.entries;
    let coarse = entries.iter().find(|e| e.check == "energy_identity").map(|e| e.value);
    let (fine_run, fine_g) = monitored(40)?;
    let fine = run_diagnostics(&fine_run, gains, omega, &fine_g)?
        .entries
        .into_iter()
        .find(|e| e.check == "energy_identity")
        .map(|e| e.value);
    if let (Some(c), Some(f)) = (coarse, fine) {
        let pos = entries.iter().position(|e| e.check == "energy_identity").unwrap_or(0);
        entries.insert(
            pos + 1,
            order_entry("energy_identity_order", "energy identity residual vanishes at second order", c, f),
        );
    }
    Ok(entries)
}

fn data(e: waveobs_core::Error) -> CliError {
    CliError::Data(e.to_string())
}

/// Runs the selected checks (all when `selection` is `None`) on up to `jobs`
/// threads. Results keep battery order regardless of scheduling.
pub fn run_battery(selection: Option<&[String]>, inject_sign_error: bool, jobs: usize) -> CliResult<Vec<DiagnosticEntry>> {
    let known = check_names();
    if let Some(sel) = selection {
        if let Some(bad) = sel.iter().find(|s| !known.contains(&s.as_str())) {
            return Err(CliError::Config(format!(
                "unknown check `{bad}`; available: {}",
                known.join(", ")
            )));
        }
    }
    let wanted = |name: &str| selection.is_none_or(|sel| sel.iter().any(|s| s == name));
    let active: Vec<(usize, Group)> = GROUPS
        .iter()
        .enumerate()
        .filter(|(_, (names, _))| names.iter().any(|n| wanted(n)))
        .map(|(i, (_, f))| (i, *f))
        .collect();

    let jobs = jobs.max(1);
    let mut results: Vec<(usize, CliResult<Vec<DiagnosticEntry>>)> = Vec::with_capacity(active.len());
    for chunk in active.chunks(jobs) {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&(i, f)| (i, scope.spawn(move || f(inject_sign_error))))
                .collect();
            for (i, h) in handles {
                results.push((i, h.join().expect("check thread panicked")));
            }
        });
    }
    results.sort_by_key(|(i, _)| *i);

    let mut entries = Vec::new();
    for (_, r) in results {
        entries.extend(r?.into_iter().filter(|e| wanted(&e.check)));
    }
    Ok(entries)
}

pub fn cmd_verify(
    selection: Option<&[String]>,
    inject_sign_error: bool,
    opts: &RunOptions,
) -> CliResult<Vec<DiagnosticEntry>> {
    // Validate the selection before touching the file system.
    if let Some(sel) = selection {
        let known = check_names();
        if let Some(bad) = sel.iter().find(|s| !known.contains(&s.as_str())) {
            return Err(CliError::Config(format!("unknown check `{bad}`")));
        }
    }
    prepare_out(&opts.out)?;
    let mut manifest = RunManifest::new("verify", None);
    manifest.outputs = vec![opts.out.join("verify.csv")];
    manifest.write(&opts.out)?;

    let entries = run_battery(selection, inject_sign_error, opts.jobs)?;
    io::write_checks(&opts.out.join("verify.csv"), &entries)?;
    if !opts.quiet {
        for e in &entries {
            eprintln!(
                "{:<4} {:<34} {:>12.4e} (threshold {:.4e})",
                if e.pass { "ok" } else { "FAIL" },
                e.check,
                e.value,
                e.threshold
            );
        }
    }
    let failed = entries.iter().filter(|e| !e.pass).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(entries)
}
