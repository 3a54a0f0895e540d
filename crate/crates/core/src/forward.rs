//! Measurement synthesis: the Neumann trace `y(t) = u_x(t, 0)` of
//! `u_tt - u_xx = q(x) cos(omega t)` with zero initial data and homogeneous
//! Dirichlet conditions, plus seeded additive noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, ScalarField, TimeSeries};
use crate::wave::{init_leapfrog, trace_left, Direction, LeapfrogState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Clean,
    Noisy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub y: TimeSeries,
    pub omega: f64,
    pub horizon: f64,
    pub noise_level: f64,
    pub noise_seed: Option<u64>,
    pub provenance: Provenance,
}

impl MeasurementRecord {
    /// Wraps an externally supplied clean series (e.g. read from CSV).
    pub fn from_series(y: TimeSeries, omega: f64, horizon: f64) -> Self {
        Self {
            y,
            omega,
            horizon,
            noise_level: 0.0,
            noise_seed: None,
            provenance: Provenance::Clean,
        }
    }

    /// `(sum_n y_n^2 dt / T)^{1/2}`.
    pub fn rms(&self) -> f64 {
        let s: f64 = self.y.values().iter().map(|v| v * v).sum();
        (s * self.y.dt() / self.horizon).sqrt()
    }
}

/// Leapfrog solution of the forced problem over one pass, recording the left
/// trace at every time node (`n_steps_per_pass + 1` samples).
pub fn simulate_forward(q: &ScalarField, omega: f64, grid: &Grid1D) -> Result<MeasurementRecord> {
    simulate_forward_with_state(q, omega, grid).map(|(m, _)| m)
}

/// [`simulate_forward`] that also returns the wave state at `t = T`.
pub fn simulate_forward_with_state(
    q: &ScalarField,
    omega: f64,
    grid: &Grid1D,
) -> Result<(MeasurementRecord, LeapfrogState)> {
    grid.check_field(q)?;
    if !omega.is_finite() {
        return Err(Error::InvalidParameter(format!("omega must be finite, got {omega}")));
    }
    let n = grid.n_steps_per_pass();
    let dt = grid.dt();
    let zero = ScalarField::zeros(grid);
    let mut s = init_leapfrog(&zero, &zero, q, grid, Direction::Forward)?;
    let mut forcing = zero;
    let mut y = Vec::with_capacity(n + 1);
    y.push(trace_left(&s, grid));
    for step in 0..n {
        let c = (omega * step as f64 * dt).cos();
        for (f, qj) in forcing.values_mut().iter_mut().zip(q.values()) {
            *f = c * qj;
        }
        s.advance(0.0, Some(&forcing), grid);
        y.push(trace_left(&s, grid));
    }
    let m = MeasurementRecord::from_series(TimeSeries::new(y, dt), omega, grid.horizon());
    Ok((m, s))
}

/// Adds white Gaussian noise with standard deviation `level * rms(y)`.
///
/// Deterministic for a given `(record, level, seed)`; `level = 0` returns the
/// input unchanged.
pub fn add_noise(m: &MeasurementRecord, level: f64, seed: u64) -> Result<MeasurementRecord> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be non-negative, got {level}"
        )));
    }
    if level == 0.0 {
        return Ok(m.clone());
    }
    let sigma = level * m.rms();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy: Vec<f64> = m
        .y
        .values()
        .iter()
        .map(|v| {
            let eta: f64 = StandardNormal.sample(&mut rng);
            v + sigma * eta
        })
        .collect();
    Ok(MeasurementRecord {
        y: TimeSeries::new(noisy, m.y.dt()),
        noise_level: level,
        noise_seed: Some(seed),
        provenance: Provenance::Noisy,
        ..m.clone()
    })
}
