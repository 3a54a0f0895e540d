use crate::error::{Error, Result};
use crate::grid::{Grid1D, ScalarField, TimeSeries};
use crate::wave::{run_homogeneous, Direction, LeapfrogState};

use super::oscillator::{OscillatorMode, OscillatorPropagator, OscillatorState};

/// Output and internals of the source-free cascade over one pass.
#[derive(Debug, Clone)]
pub struct CascadeTrajectory {
    /// `Y(t_n) = z1(t_n)`.
    pub output: TimeSeries,
    /// `w_x(t_n, 0)`.
    pub wave_trace: TimeSeries,
    pub final_wave: LeapfrogState,
    pub final_oscillator: OscillatorState,
}

/// Homogeneous wave from `(q, 0)` feeding the boundary oscillator from rest.
///
/// The full trace series is known before the oscillator is integrated, so the
/// forcing uses both endpoints of every step.
pub fn simulate_cascade(q: &ScalarField, omega: f64, grid: &Grid1D) -> Result<CascadeTrajectory> {
    grid.check_field(q)?;
    if !omega.is_finite() {
        return Err(Error::InvalidParameter(format!("omega must be finite, got {omega}")));
    }
    let n = grid.n_steps_per_pass();
    let zero = ScalarField::zeros(grid);
    let (final_wave, wave_trace) = run_homogeneous(q, &zero, grid, n, Direction::Forward)?;
    let prop = OscillatorPropagator::new(omega, 0.0, grid.dt(), OscillatorMode::Plant, Direction::Forward);
    let tr = wave_trace.values();
    let mut z = OscillatorState::default();
    let mut out = Vec::with_capacity(n + 1);
    out.push(z.z1);
    for k in 0..n {
        z = prop.step(z, [tr[k], tr[k + 1]], [0.0, 0.0]);
        out.push(z.z1);
    }
    Ok(CascadeTrajectory {
        output: TimeSeries::new(out, grid.dt()),
        wave_trace,
        final_wave,
        final_oscillator: z,
    })
}
