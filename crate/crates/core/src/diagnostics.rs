//! Numeric checks of the identities and estimates satisfied by the observer
//! error system.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::forward::simulate_forward_with_state;
use crate::grid::{h1_seminorm, h2_norm_sq, l2_norm, second_difference, Gains, Grid1D, ScalarField, TimeSeries};
use crate::observer::{OscillatorState, TrajectorySample};
use crate::spectral::{forced_modal_solution, ModeVector};
use crate::wave::{discrete_energy, init_leapfrog, Direction};

/// Guard against division by a vanishing reference value.
const EPS: f64 = 1e-300;

/// One named check: `value` compared against `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticEntry {
    pub check: String,
    /// The property of the continuous problem this check is a discrete shadow of.
    pub anchor: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl DiagnosticEntry {
    pub fn new(check: &str, anchor: &str, value: f64, threshold: f64, pass: bool) -> Self {
        Self {
            check: check.to_string(),
            anchor: anchor.to_string(),
            value,
            threshold,
            pass,
        }
    }

    /// Passing iff `value <= threshold` (NaN fails).
    pub fn at_most(check: &str, anchor: &str, value: f64, threshold: f64) -> Self {
        Self::new(check, anchor, value, threshold, value <= threshold)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub entries: Vec<DiagnosticEntry>,
    pub notes: Vec<String>,
}

impl DiagnosticsReport {
    pub fn push(&mut self, entry: DiagnosticEntry) {
        self.entries.push(entry);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &DiagnosticEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    /// Plain-text table, one check per line.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{:<4} {:<32} value {:>12.4e}  threshold {:>12.4e}  ({})\n",
                if e.pass { "ok" } else { "FAIL" },
                e.check,
                e.value,
                e.threshold,
                e.anchor
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// `V = 1/2 (|w1_x|^2 + |w2|^2 + gamma1 omega^2 z1^2 + gamma1 z2^2)`.
pub fn lyapunov_value(
    w1_err: &ScalarField,
    w2_err: &ScalarField,
    z_err: OscillatorState,
    gains: Gains,
    omega: f64,
    grid: &Grid1D,
) -> Result<f64> {
    let h1 = h1_seminorm(w1_err, grid)?;
    let l2 = l2_norm(w2_err, grid)?;
    let g1 = gains.gamma1;
    Ok(0.5 * (h1 * h1 + l2 * l2 + g1 * omega * omega * z_err.z1 * z_err.z1 + g1 * z_err.z2 * z_err.z2))
}

/// Passes iff `V[k + 1] <= V[k] + tolerance` for every `k`. The reported
/// value is the largest single-step increase (zero for a non-increasing
/// series).
pub fn lyapunov_decrease_check(series: &[f64], tolerance: f64) -> Result<DiagnosticEntry> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "Lyapunov decrease needs at least 2 samples, got {}",
            series.len()
        )));
    }
    let worst = series.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let finite = series.iter().all(|v| v.is_finite());
    Ok(DiagnosticEntry::new(
        "lyapunov_decrease",
        "Lyapunov function non-increasing along the error dynamics",
        if finite { worst } else { f64::NAN },
        tolerance,
        finite && worst <= tolerance,
    ))
}

/// Left-hand side of the first energy identity at one sample:
/// `|v1_x|^2 + |v2|^2 + gamma1 xi2^2 + gamma1 omega^2 xi1^2 + 2 gamma1 gamma2 omega^2 int xi1^2`.
pub fn energy_identity_lhs(s: &TrajectorySample, gains: Gains, omega: f64, grid: &Grid1D) -> Result<f64> {
    let h1 = h1_seminorm(&s.w1, grid)?;
    let l2 = l2_norm(&s.w2, grid)?;
    let (g1, g2) = (gains.gamma1, gains.gamma2);
    let w2 = omega * omega;
    Ok(h1 * h1
        + l2 * l2
        + g1 * s.z.z2 * s.z.z2
        + g1 * w2 * s.z.z1 * s.z.z1
        + 2.0 * g1 * g2 * w2 * s.xi1_sq_integral)
}

/// `|LHS(t) - rhs| / max(rhs, eps)` at one sample.
pub fn energy_residual_at(s: &TrajectorySample, rhs: f64, gains: Gains, omega: f64, grid: &Grid1D) -> Result<f64> {
    let lhs = energy_identity_lhs(s, gains, omega, grid)?;
    Ok((lhs - rhs).abs() / rhs.max(EPS))
}

/// Largest relative residual of the first energy identity over a recorded
/// trajectory. The right-hand side is the left-hand side of the first sample,
/// which must be taken at `t = 0`.
pub fn energy_identity_residual(samples: &[TrajectorySample], gains: Gains, omega: f64, grid: &Grid1D) -> Result<f64> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InsufficientData("energy identity needs a trajectory".into()))?;
    if first.time != 0.0 {
        return Err(Error::InsufficientData(format!(
            "trajectory starts at t = {} instead of 0",
            first.time
        )));
    }
    let rhs = energy_identity_lhs(first, gains, omega, grid)?;
    if rhs == 0.0 {
        // Zero data: the identity holds iff every sample is zero.
        let mut worst = 0.0f64;
        for s in samples {
            worst = worst.max(energy_identity_lhs(s, gains, omega, grid)?);
        }
        return Ok(worst);
    }
    samples
        .iter()
        .map(|s| energy_residual_at(s, rhs, gains, omega, grid))
        .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))
}

/// Left-hand bundle of the second energy estimate at one sample:
/// `1/2 (|v1_xx|^2 + |v2_x|^2 + gamma1 omega^4 xi1^2) + 1/4 gamma1 v1_x(t,0)^2
///  + 1/2 gamma1 gamma2 omega^2 int xi2^2 + gamma1 omega^2 xi2^2`.
pub fn second_energy_bundle(s: &TrajectorySample, gains: Gains, omega: f64, grid: &Grid1D) -> Result<f64> {
    let d2 = second_difference(&s.w1, grid)?;
    let d2_sq: f64 = d2.values()[1..grid.nx()].iter().map(|v| v * v).sum::<f64>() * grid.dx();
    let h1 = h1_seminorm(&s.w2, grid)?;
    let (g1, g2) = (gains.gamma1, gains.gamma2);
    let w2 = omega * omega;
    Ok(0.5 * (d2_sq + h1 * h1 + g1 * w2 * w2 * s.z.z1 * s.z.z1)
        + 0.25 * g1 * s.trace * s.trace
        + 0.5 * g1 * g2 * w2 * s.xi2_sq_integral
        + g1 * w2 * s.z.z2 * s.z.z2)
}

/// Initial-data bundle `|q0|^2_{H^2} + |q1|^2_{H^1} + xi1^2 + xi2^2`.
pub fn initial_data_bundle(s: &TrajectorySample, grid: &Grid1D) -> Result<f64> {
    let l2 = l2_norm(&s.w2, grid)?;
    let h1 = h1_seminorm(&s.w2, grid)?;
    Ok(h2_norm_sq(&s.w1, grid)? + l2 * l2 + h1 * h1 + s.z.z1 * s.z.z1 + s.z.z2 * s.z.z2)
}

/// Ratio series of the second energy bundle to the initial-data bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondEnergySummary {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// Largest ratio over the first half of the samples.
    pub first_half_max: f64,
    /// Largest ratio over the second half of the samples.
    pub second_half_max: f64,
}

impl SecondEnergySummary {
    /// `true` when the second half never exceeds the first half by more than
    /// the factor `1 + slack`.
    pub fn non_growing(&self, slack: f64) -> bool {
        self.second_half_max <= self.first_half_max * (1.0 + slack)
    }
}

pub fn second_energy_ratios(
    samples: &[TrajectorySample],
    gains: Gains,
    omega: f64,
    grid: &Grid1D,
) -> Result<SecondEnergySummary> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InsufficientData("second energy estimate needs a trajectory".into()))?;
    let initial = initial_data_bundle(first, grid)?;
    let mut ratios = Vec::with_capacity(samples.len());
    for s in samples {
        let b = second_energy_bundle(s, gains, omega, grid)?;
        let r = if initial > 0.0 {
            b / initial
        } else if b == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        ratios.push(r);
    }
    let half = ratios.len().div_ceil(2);
    let max_of = |v: &[f64]| v.iter().copied().fold(0.0f64, f64::max);
    Ok(SecondEnergySummary {
        max_ratio: max_of(&ratios),
        first_half_max: max_of(&ratios[..half]),
        second_half_max: max_of(&ratios[half..]),
        ratios,
    })
}

/// Passes iff the largest ratio of the second energy bundle to the
/// initial-data bundle stays strictly below `cap`.
pub fn second_energy_boundedness(
    samples: &[TrajectorySample],
    gains: Gains,
    omega: f64,
    grid: &Grid1D,
    cap: f64,
) -> Result<DiagnosticEntry> {
    let summary = second_energy_ratios(samples, gains, omega, grid)?;
    Ok(DiagnosticEntry::new(
        "second_energy_bounded",
        "higher-order energy of the error system bounded by its initial data",
        summary.max_ratio,
        cap,
        summary.max_ratio < cap,
    ))
}

/// `|trace|^2_{L^2(0,T)} / [2 (4T^2 + 3) |f|^2_{H^1(0,T)} + 2 (2 + T)(|q0_x|^2 + |q1|^2)]`
/// for a wave run with Dirichlet data `f` at `x = 0` and initial data
/// `(q0, q1)`. The trace bound says this never exceeds 1. Zero over zero is
/// reported as 0.
pub fn hidden_regularity_ratio(
    f: &TimeSeries,
    q0: &ScalarField,
    q1: &ScalarField,
    trace: &TimeSeries,
    horizon: f64,
    grid: &Grid1D,
) -> Result<f64> {
    check_len(trace.len(), f.len())?;
    let num = trace.l2_norm_sq();
    let h1 = h1_seminorm(q0, grid)?;
    let l2 = l2_norm(q1, grid)?;
    let t = horizon;
    let den = 2.0 * (4.0 * t * t + 3.0) * f.h1_norm_sq() + 2.0 * (2.0 + t) * (h1 * h1 + l2 * l2);
    if den == 0.0 {
        if num == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::InvalidParameter(
            "trace bound has a zero right-hand side but a nonzero trace".into(),
        ));
    }
    Ok(num / den)
}

/// Relative max-norm and relative `L^2` norm of `y - Y`.
pub fn equivalence_metrics(y: &TimeSeries, big_y: &TimeSeries) -> Result<(f64, f64)> {
    check_len(y.len(), big_y.len())?;
    let diff = TimeSeries::new(
        y.values().iter().zip(big_y.values()).map(|(a, b)| a - b).collect(),
        y.dt(),
    );
    let rel_max = diff.max_abs() / y.max_abs().max(EPS);
    let rel_l2 = (diff.l2_norm_sq() / y.l2_norm_sq().max(EPS)).sqrt();
    Ok((rel_max, rel_l2))
}

/// Compares the measured output `y` with the cascade output `Y`; passes iff
/// the relative max-norm discrepancy is at most `tolerance`.
pub fn equivalence_report(y: &TimeSeries, big_y: &TimeSeries, tolerance: f64) -> Result<DiagnosticEntry> {
    let (rel_max, _) = equivalence_metrics(y, big_y)?;
    Ok(DiagnosticEntry::at_most(
        "output_equivalence",
        "measured output equals the cascade oscillator output",
        rel_max,
        tolerance,
    ))
}

/// Largest relative drift of the leapfrog energy over `n_steps` source-free
/// steps from `(q0, 0)`.
pub fn kernel_energy_drift(q0: &ScalarField, grid: &Grid1D, n_steps: usize) -> Result<f64> {
    let zero = ScalarField::zeros(grid);
    let mut s = init_leapfrog(q0, &zero, &zero, grid, Direction::Forward)?;
    let e0 = discrete_energy(&s, grid);
    if e0 == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for _ in 0..n_steps {
        s.advance(0.0, None, grid);
        worst = worst.max((discrete_energy(&s, grid) - e0).abs() / e0);
    }
    Ok(worst)
}

/// Max-norm distance to `q0` after `n_steps` forward steps, a reversal and
/// `n_steps` backward steps.
pub fn kernel_round_trip_error(q0: &ScalarField, grid: &Grid1D, n_steps: usize) -> Result<f64> {
    let zero = ScalarField::zeros(grid);
    let mut s = init_leapfrog(q0, &zero, &zero, grid, Direction::Forward)?;
    for _ in 0..n_steps {
        s.advance(0.0, None, grid);
    }
    s.reverse(grid);
    for _ in 0..n_steps {
        s.advance(0.0, None, grid);
    }
    Ok(s.u_curr.sub(q0)?.max_abs())
}

/// Relative max-norm error at `t = T` of the forced leapfrog field against
/// the sine-series solution with source `q`.
pub fn forced_field_error(q: &ModeVector, omega: f64, grid: &Grid1D) -> Result<f64> {
    let (_, state) = simulate_forward_with_state(&q.synthesize(grid), omega, grid)?;
    let (exact, _) = forced_modal_solution(q, omega, grid.horizon())?;
    let exact = exact.synthesize(grid);
    Ok(state.u_curr.sub(&exact)?.max_abs() / exact.max_abs().max(EPS))
}
