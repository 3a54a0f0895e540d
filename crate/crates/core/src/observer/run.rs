//! Observer half-passes and the back-and-forth iteration.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{hidden_regularity_ratio, lyapunov_value};
use crate::error::{Error, Result};
use crate::forward::MeasurementRecord;
use crate::grid::{h1_seminorm, l2_norm, pin_endpoints, Gains, Grid1D, ScalarField, TimeSeries};
use crate::wave::{field_trace_left, init_leapfrog, trace_left, Direction, LeapfrogState};

use super::extended::ExtendedMeasurement;
use super::oscillator::{OscillatorMode, OscillatorPropagator, OscillatorState};

/// Observer wave, boundary oscillator estimate and the running integral of
/// the extended output, stored between half-passes.
///
/// Invariant: the left node of `wave.u_curr` equals
/// `gamma1 (z1 - Y) + gamma1 gamma2 (z3 - int_0^t Y)` at the current node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverState {
    pub wave: LeapfrogState,
    pub osc: OscillatorState,
    pub y_integral: f64,
    /// Index of the next half-pass; even values are forward half-passes.
    pub half_pass: usize,
}

impl ObserverState {
    /// Zero observer (`q_hat = 0`) at `t = 0`.
    pub fn zero(grid: &Grid1D) -> Self {
        Self {
            wave: LeapfrogState::zeros(grid, Direction::Forward),
            osc: OscillatorState::default(),
            y_integral: 0.0,
            half_pass: 0,
        }
    }

    pub fn direction(&self) -> Direction {
        self.wave.direction
    }

    /// Global time `half_pass * T`.
    pub fn time(&self, grid: &Grid1D) -> f64 {
        self.half_pass as f64 * grid.horizon()
    }
}

/// The true periodized cascade, advanced alongside the observer when the
/// source is known.
#[derive(Debug, Clone, PartialEq)]
struct PlantState {
    wave: LeapfrogState,
    osc: OscillatorState,
}

impl PlantState {
    fn new(q: &ScalarField, grid: &Grid1D) -> Result<Self> {
        let zero = ScalarField::zeros(grid);
        Ok(Self {
            wave: init_leapfrog(q, &zero, &zero, grid, Direction::Forward)?,
            osc: OscillatorState::default(),
        })
    }
}

/// Per-half-pass propagators and parameters.
struct PassKernel<'a> {
    grid: &'a Grid1D,
    em: &'a ExtendedMeasurement,
    gains: Gains,
    injection_sign: f64,
    observer: OscillatorPropagator,
    plant: OscillatorPropagator,
    half_pass: usize,
}

impl<'a> PassKernel<'a> {
    fn new(
        grid: &'a Grid1D,
        em: &'a ExtendedMeasurement,
        gains: Gains,
        omega: f64,
        injection_sign: f64,
        half_pass: usize,
    ) -> Self {
        let direction = ExtendedMeasurement::direction(half_pass);
        let dt = grid.dt();
        Self {
            grid,
            em,
            gains,
            injection_sign,
            observer: OscillatorPropagator::new(omega, gains.gamma2, dt, OscillatorMode::Observer, direction),
            plant: OscillatorPropagator::new(omega, 0.0, dt, OscillatorMode::Plant, direction),
            half_pass,
        }
    }

    /// One coupled observer step from local node `n` to `n + 1`. Returns the
    /// Dirichlet value injected at node `n + 1`.
    fn observer_step(&self, s: &mut ObserverState, n: usize) -> f64 {
        let trace = trace_left(&s.wave, self.grid);
        let y0 = self.em.value_unchecked(self.half_pass, n);
        let y1 = self.em.value_unchecked(self.half_pass, n + 1);
        s.osc = self.observer.step(s.osc, [trace, trace], [y0, y1]);
        s.y_integral += 0.5 * self.grid.dt() * (y0 + y1);
        let g = self.gains;
        let bc = self.injection_sign
            * (g.gamma1 * (s.osc.z1 - y1) + g.gamma1 * g.gamma2 * (s.osc.z3 - s.y_integral));
        s.wave.advance(bc, None, self.grid);
        bc
    }

    fn plant_step(&self, p: &mut PlantState) {
        let trace = trace_left(&p.wave, self.grid);
        p.osc = self.plant.step(p.osc, [trace, trace], [0.0, 0.0]);
        p.wave.advance(0.0, None, self.grid);
    }
}

fn check_direction(s: &ObserverState) -> Result<()> {
    let expected = ExtendedMeasurement::direction(s.half_pass);
    if s.wave.direction != expected {
        return Err(Error::StateMismatch(format!(
            "half-pass {} runs {:?} but the observer is oriented {:?}",
            s.half_pass, expected, s.wave.direction
        )));
    }
    Ok(())
}

/// Runs one half-pass of the observer and turns it around for the next one.
pub fn observer_half_pass(
    s: &ObserverState,
    em: &ExtendedMeasurement,
    gains: Gains,
    omega: f64,
    grid: &Grid1D,
) -> Result<ObserverState> {
    check_direction(s)?;
    grid.check_field(&s.wave.u_curr)?;
    if em.n_steps_per_pass() != grid.n_steps_per_pass() {
        return Err(Error::LengthMismatch {
            expected: grid.n_steps_per_pass() + 1,
            actual: em.base.y.len(),
        });
    }
    let kernel = PassKernel::new(grid, em, gains, omega, 1.0, s.half_pass);
    let mut next = s.clone();
    for n in 0..grid.n_steps_per_pass() {
        kernel.observer_step(&mut next, n);
    }
    next.wave.reverse(grid);
    next.half_pass += 1;
    Ok(next)
}

/// `W_hat^1(2kT, .)` with the endpoints pinned to zero.
pub fn extract_estimate(s: &ObserverState, grid: &Grid1D) -> Result<ScalarField> {
    grid.check_field(&s.wave.u_curr)?;
    if !s.half_pass.is_multiple_of(2) {
        return Err(Error::StateMismatch(format!(
            "estimates exist only at times 2kT; observer is after half-pass {}",
            s.half_pass
        )));
    }
    let mut q = s.wave.u_curr.clone();
    pin_endpoints(&mut q);
    Ok(q)
}

/// Error-system snapshot `(W_hat - W, Z_hat - Z)` at one time node.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub time: f64,
    /// Half-passes completed when the sample was taken.
    pub half_pass: usize,
    pub w1: ScalarField,
    pub w2: ScalarField,
    pub z: OscillatorState,
    /// `W~^1_x(t, 0)`.
    pub trace: f64,
    /// `int_0^t Z~_1^2`.
    pub xi1_sq_integral: f64,
    /// `int_0^t Z~_2^2`.
    pub xi2_sq_integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: usize,
    pub l2_err: Option<f64>,
    pub h1_err: Option<f64>,
    pub lyapunov: Option<f64>,
    pub energy_residual: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct BackAndForthRun {
    /// `q_hat_k` for `k = 0..=n_iterations`; entry 0 is the zero initial guess.
    pub estimates: Vec<ScalarField>,
    /// One report per entry of `estimates`.
    pub reports: Vec<IterationReport>,
    /// Lyapunov value at every half-pass boundary `kT`, `k = 0..=2 n`.
    pub lyapunov: Vec<f64>,
    /// Error-system samples at every half-pass boundary (plus intra-pass
    /// samples when requested). Empty without a known source.
    pub trajectory: Vec<TrajectorySample>,
    /// Hidden-regularity ratio of the observer wave for each half-pass.
    pub hidden_regularity: Vec<f64>,
    pub final_state: ObserverState,
    pub warnings: Vec<String>,
}

/// Back-and-forth iteration with optional truth monitoring.
#[derive(Debug, Clone)]
pub struct BackAndForth<'a> {
    pub measurement: &'a MeasurementRecord,
    pub gains: Gains,
    pub omega: f64,
    pub grid: &'a Grid1D,
    pub n_iterations: usize,
    pub truth: Option<&'a ScalarField>,
    /// Record error-system samples every `stride` steps inside each pass.
    pub intra_pass_stride: Option<usize>,
    /// `-1` flips the sign of the boundary injection; test hook only.
    pub injection_sign: f64,
}

impl<'a> BackAndForth<'a> {
    pub fn new(measurement: &'a MeasurementRecord, gains: Gains, omega: f64, grid: &'a Grid1D) -> Self {
        Self {
            measurement,
            gains,
            omega,
            grid,
            n_iterations: 50,
            truth: None,
            intra_pass_stride: None,
            injection_sign: 1.0,
        }
    }

    pub fn iterations(mut self, n: usize) -> Self {
        self.n_iterations = n;
        self
    }

    pub fn truth(mut self, q: &'a ScalarField) -> Self {
        self.truth = Some(q);
        self
    }

    fn validate(&self) -> Result<Vec<String>> {
        let grid = self.grid;
        if self.measurement.y.len() != grid.n_steps_per_pass() + 1 {
            return Err(Error::LengthMismatch {
                expected: grid.n_steps_per_pass() + 1,
                actual: self.measurement.y.len(),
            });
        }
        if (self.measurement.y.dt() - grid.dt()).abs() > 1e-12 * grid.dt() {
            return Err(Error::InvalidParameter(format!(
                "measurement sampled at dt = {}, grid uses {}",
                self.measurement.y.dt(),
                grid.dt()
            )));
        }
        if self.n_iterations == 0 {
            return Err(Error::InvalidParameter("n_iterations must be >= 1".into()));
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega must be finite, got {}", self.omega)));
        }
        if let Some(q) = self.truth {
            grid.check_field(q)?;
        }
        let mut warnings = Vec::new();
        if grid.horizon() < 2.0 {
            warnings.push(format!(
                "horizon T = {} is below the observability time 2; convergence is not guaranteed",
                grid.horizon()
            ));
        }
        Ok(warnings)
    }

    pub fn run(&self) -> Result<BackAndForthRun> {
        let warnings = self.validate()?;
        let grid = self.grid;
        let dt = grid.dt();
        let n_steps = grid.n_steps_per_pass();
        let em = ExtendedMeasurement::new(self.measurement.clone());

        let mut obs = ObserverState::zero(grid);
        let mut plant = self.truth.map(|q| PlantState::new(q, grid)).transpose()?;
        let mut xi1_int = 0.0;
        let mut xi2_int = 0.0;

        let sample = |obs: &ObserverState, plant: &PlantState, half_pass: usize, local: usize, i1: f64, i2: f64| {
            let w1 = obs.wave.u_curr.sub(&plant.wave.u_curr).expect("grid-sized fields");
            let w2 = obs
                .wave
                .current_velocity(grid)
                .sub(&plant.wave.current_velocity(grid))
                .expect("grid-sized fields");
            TrajectorySample {
                time: half_pass as f64 * grid.horizon() + local as f64 * dt,
                half_pass,
                trace: field_trace_left(&w1, grid),
                w1,
                w2,
                z: obs.osc - plant.osc,
                xi1_sq_integral: i1,
                xi2_sq_integral: i2,
            }
        };
        let lyap = |s: &TrajectorySample| lyapunov_value(&s.w1, &s.w2, s.z, self.gains, self.omega, grid);

        let mut trajectory = Vec::new();
        let mut lyapunov = Vec::new();
        if let Some(p) = &plant {
            let s0 = sample(&obs, p, 0, 0, 0.0, 0.0);
            lyapunov.push(lyap(&s0)?);
            trajectory.push(s0);
        }

        let mut estimates = vec![extract_estimate(&obs, grid)?];
        let mut reports = vec![self.report(0, &estimates[0], lyapunov.first().copied(), trajectory.first(), 0.0)?];
        let mut hidden_regularity = Vec::with_capacity(2 * self.n_iterations);
        let mut boundary = vec![0.0; n_steps + 1];
        let mut traces = vec![0.0; n_steps + 1];

        let mut clock = Instant::now();
        for half_pass in 0..2 * self.n_iterations {
            let kernel = PassKernel::new(grid, &em, self.gains, self.omega, self.injection_sign, half_pass);
            let q0 = obs.wave.u_curr.clone();
            let q1 = obs.wave.current_velocity(grid);
            boundary[0] = obs.wave.u_curr[0];
            traces[0] = trace_left(&obs.wave, grid);

            for n in 0..n_steps {
                let before = plant.as_ref().map(|p| obs.osc - p.osc);
                boundary[n + 1] = kernel.observer_step(&mut obs, n);
                traces[n + 1] = trace_left(&obs.wave, grid);
                if let (Some(p), Some(before)) = (plant.as_mut(), before) {
                    kernel.plant_step(p);
                    let after = obs.osc - p.osc;
                    xi1_int += 0.5 * dt * (before.z1 * before.z1 + after.z1 * after.z1);
                    xi2_int += 0.5 * dt * (before.z2 * before.z2 + after.z2 * after.z2);
                    if let Some(stride) = self.intra_pass_stride {
                        if stride > 0 && (n + 1) % stride == 0 && n + 1 < n_steps {
                            trajectory.push(sample(&obs, p, half_pass, n + 1, xi1_int, xi2_int));
                        }
                    }
                }
            }

            hidden_regularity.push(hidden_regularity_ratio(
                &TimeSeries::new(boundary.clone(), dt),
                &q0,
                &q1,
                &TimeSeries::new(traces.clone(), dt),
                grid.horizon(),
                grid,
            )?);

            obs.wave.reverse(grid);
            obs.half_pass += 1;
            if let Some(p) = plant.as_mut() {
                p.wave.reverse(grid);
                let s = sample(&obs, p, obs.half_pass, 0, xi1_int, xi2_int);
                lyapunov.push(lyap(&s)?);
                trajectory.push(s);
            }

            if obs.half_pass.is_multiple_of(2) {
                let k = obs.half_pass / 2;
                let q_hat = extract_estimate(&obs, grid)?;
                let seconds = clock.elapsed().as_secs_f64();
                clock = Instant::now();
                let last = trajectory.last().filter(|s| s.half_pass == obs.half_pass);
                reports.push(self.report(k, &q_hat, lyapunov.last().copied(), last, seconds)?);
                estimates.push(q_hat);
            }
        }

        Ok(BackAndForthRun {
            estimates,
            reports,
            lyapunov,
            trajectory,
            hidden_regularity,
            final_state: obs,
            warnings,
        })
    }

    fn report(
        &self,
        iteration: usize,
        q_hat: &ScalarField,
        lyapunov: Option<f64>,
        sample: Option<&TrajectorySample>,
        seconds: f64,
    ) -> Result<IterationReport> {
        let (l2_err, h1_err) = match self.truth {
            Some(q) => {
                let e = q_hat.sub(q)?;
                (Some(l2_norm(&e, self.grid)?), Some(h1_seminorm(&e, self.grid)?))
            }
            None => (None, None),
        };
        let energy_residual = match (self.truth, sample) {
            (Some(q), Some(s)) => Some(crate::diagnostics::energy_residual_at(
                s,
                h1_seminorm(q, self.grid)?.powi(2),
                self.gains,
                self.omega,
                self.grid,
            )?),
            _ => None,
        };
        Ok(IterationReport {
            iteration,
            l2_err,
            h1_err,
            lyapunov,
            energy_residual,
            seconds,
        })
    }
}

/// Convenience wrapper over [`BackAndForth`].
pub fn run_back_and_forth(
    m: &MeasurementRecord,
    gains: Gains,
    omega: f64,
    grid: &Grid1D,
    n_iterations: usize,
    q_true: Option<&ScalarField>,
) -> Result<BackAndForthRun> {
    let mut driver = BackAndForth::new(m, gains, omega, grid).iterations(n_iterations);
    driver.truth = q_true;
    driver.run()
}
