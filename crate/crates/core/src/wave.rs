//! Explicit leapfrog integrator for `u_tt = u_xx + f` on `(0, 1)` with
//! Dirichlet data at `x = 0` and `u = 0` at `x = 1`.
//!
//! The state stores two consecutive displacement levels. The scheme is
//! symmetric under `t -> -t`, so a backward run uses the same update with the
//! roles of the stored levels exchanged (see [`LeapfrogState::reverse`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, ScalarField, TimeSeries};

/// Direction in which physical time advances with each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Self::Forward => 1.0,
            Self::Backward => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Self::Forward => Self::Backward,
            Self::Backward => Self::Forward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeapfrogState {
    pub u_prev: ScalarField,
    pub u_curr: ScalarField,
    /// Physical time index of `u_curr`.
    pub t_index: i64,
    pub direction: Direction,
}

/// Dirichlet values at `x = 0`, one per time node; `u(t, 1) = 0` always.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySchedule {
    pub left_values: TimeSeries,
}

impl BoundarySchedule {
    pub fn homogeneous(grid: &Grid1D, n_steps: usize) -> Self {
        Self {
            left_values: TimeSeries::zeros(n_steps + 1, grid.dt()),
        }
    }
}

/// `2 u_j + cfl^2 (u_{j+1} - 2 u_j + u_{j-1}) + dt^2 f_j`, the part of the
/// update shared by both time directions.
fn symmetric_part(u: &[f64], f: Option<&[f64]>, cfl2: f64, dt2: f64, j: usize) -> f64 {
    let lap = u[j + 1] - 2.0 * u[j] + u[j - 1];
    let forcing = f.map_or(0.0, |f| dt2 * f[j]);
    2.0 * u[j] + cfl2 * lap + forcing
}

/// Taylor start: `u_prev = q0 - sigma dt v0 + dt^2/2 (D2 q0 + f0)` on interior
/// nodes, `u_curr = q0`.
pub fn init_leapfrog(
    q0: &ScalarField,
    v0: &ScalarField,
    f0: &ScalarField,
    grid: &Grid1D,
    direction: Direction,
) -> Result<LeapfrogState> {
    grid.check_field(q0)?;
    grid.check_field(v0)?;
    grid.check_field(f0)?;
    let dt = grid.dt();
    let sigma = direction.sign();
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    let q = q0.values();
    let mut prev = q0.clone();
    for j in 1..grid.nx() {
        let d2 = (q[j + 1] - 2.0 * q[j] + q[j - 1]) * inv_dx2;
        prev[j] = q[j] - sigma * dt * v0[j] + 0.5 * dt * dt * (d2 + f0[j]);
    }
    Ok(LeapfrogState {
        u_prev: prev,
        u_curr: q0.clone(),
        t_index: 0,
        direction,
    })
}

impl LeapfrogState {
    pub fn zeros(grid: &Grid1D, direction: Direction) -> Self {
        Self {
            u_prev: ScalarField::zeros(grid),
            u_curr: ScalarField::zeros(grid),
            t_index: 0,
            direction,
        }
    }

    /// Advances one step in place. `forcing` is sampled at the current level.
    #[allow(clippy::needless_range_loop)]
    pub fn advance(&mut self, left_bc_next: f64, forcing: Option<&ScalarField>, grid: &Grid1D) {
        let nx = grid.nx();
        let cfl2 = grid.cfl() * grid.cfl();
        let dt2 = grid.dt() * grid.dt();
        let f = forcing.map(|f| f.values());
        let u = self.u_curr.values();
        let prev = self.u_prev.values_mut();
        // Overwrite the older level with the new one, then swap.
        for j in 1..nx {
            prev[j] = symmetric_part(u, f, cfl2, dt2, j) - prev[j];
        }
        prev[0] = left_bc_next;
        prev[nx] = 0.0;
        std::mem::swap(&mut self.u_prev, &mut self.u_curr);
        self.t_index += self.direction.sign() as i64;
    }

    /// Time reversal at the current level: the velocity changes sign and the
    /// direction flips.
    ///
    /// The older level is replaced by the level the scheme would have produced
    /// next, `2 u - u_prev + cfl^2 D2 u` on interior nodes, so that the next
    /// step reproduces the previous level exactly in the absence of boundary
    /// input. The boundary node of the ghost level is linearly extrapolated;
    /// it never enters an interior update.
    #[allow(clippy::needless_range_loop)]
    pub fn reverse(&mut self, grid: &Grid1D) {
        let nx = grid.nx();
        let cfl2 = grid.cfl() * grid.cfl();
        let u = self.u_curr.values();
        let prev = self.u_prev.values_mut();
        for j in 1..nx {
            prev[j] = symmetric_part(u, None, cfl2, 0.0, j) - prev[j];
        }
        prev[0] = 2.0 * u[0] - prev[0];
        prev[nx] = 0.0;
        self.direction = self.direction.flipped();
    }

    /// Physical-time velocity at the current level, second order on interior
    /// nodes (centered difference against the extrapolated next level),
    /// first order at `x = 0`.
    pub fn current_velocity(&self, grid: &Grid1D) -> ScalarField {
        let nx = grid.nx();
        let dt = grid.dt();
        let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
        let sigma = self.direction.sign();
        let u = self.u_curr.values();
        let p = self.u_prev.values();
        let mut v = vec![0.0; nx + 1];
        v[0] = sigma * (u[0] - p[0]) / dt;
        for j in 1..nx {
            let d2 = (u[j + 1] - 2.0 * u[j] + u[j - 1]) * inv_dx2;
            v[j] = sigma * ((u[j] - p[j]) / dt + 0.5 * dt * d2);
        }
        ScalarField::from_values(v)
    }
}

/// Pure form of [`LeapfrogState::advance`]:
/// `u_next = 2 u - u_prev + cfl^2 D2 u + dt^2 f` on interior nodes.
pub fn step(
    s: &LeapfrogState,
    left_bc_next: f64,
    f_curr: &ScalarField,
    grid: &Grid1D,
) -> Result<LeapfrogState> {
    grid.check_field(&s.u_curr)?;
    grid.check_field(&s.u_prev)?;
    grid.check_field(f_curr)?;
    let mut next = s.clone();
    next.advance(left_bc_next, Some(f_curr), grid);
    Ok(next)
}

/// Second-order one-sided `u_x(t, 0)`: `(-3 u_0 + 4 u_1 - u_2) / (2 dx)`.
pub fn trace_left(s: &LeapfrogState, grid: &Grid1D) -> f64 {
    field_trace_left(&s.u_curr, grid)
}

pub(crate) fn field_trace_left(u: &ScalarField, grid: &Grid1D) -> f64 {
    (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * grid.dx())
}

/// Centered velocity `(u_next - u_prev) / (2 dt)` at `s`'s current level,
/// expressed in physical time.
pub fn velocity(s: &LeapfrogState, s_next: &LeapfrogState, grid: &Grid1D) -> Result<ScalarField> {
    let expected = s.t_index + s.direction.sign() as i64;
    if s_next.t_index != expected || s_next.direction != s.direction {
        return Err(Error::StateMismatch(format!(
            "velocity needs consecutive states: t_index {} then {}",
            s.t_index, s_next.t_index
        )));
    }
    let c = s.direction.sign() / (2.0 * grid.dt());
    s_next.u_curr.lin_comb(c, &s.u_prev, -c)
}

/// Leapfrog-conserved energy
/// `1/2 sum dx [((u - u_prev)/dt)^2 + D u . D u_prev]`.
pub fn discrete_energy(s: &LeapfrogState, grid: &Grid1D) -> f64 {
    let dx = grid.dx();
    let dt = grid.dt();
    let u = s.u_curr.values();
    let p = s.u_prev.values();
    let kinetic: f64 = u
        .iter()
        .zip(p)
        .map(|(a, b)| {
            let v = (a - b) / dt;
            v * v
        })
        .sum();
    let potential: f64 = (0..grid.nx())
        .map(|j| ((u[j + 1] - u[j]) / dx) * ((p[j + 1] - p[j]) / dx))
        .sum();
    0.5 * dx * (kinetic + potential)
}

/// Source-free run with homogeneous Dirichlet data. Returns the final state
/// and the left traces `w_x(t_n, 0)`, `n = 0..=n_steps`.
pub fn run_homogeneous(
    q0: &ScalarField,
    v0: &ScalarField,
    grid: &Grid1D,
    n_steps: usize,
    direction: Direction,
) -> Result<(LeapfrogState, TimeSeries)> {
    let zero = ScalarField::zeros(grid);
    let mut s = init_leapfrog(q0, v0, &zero, grid, direction)?;
    let mut traces = Vec::with_capacity(n_steps + 1);
    traces.push(trace_left(&s, grid));
    for _ in 0..n_steps {
        s.advance(0.0, None, grid);
        traces.push(trace_left(&s, grid));
    }
    Ok((s, TimeSeries::new(traces, grid.dt())))
}
