//! Boundary oscillator of the cascade system and of its observer copy.
//!
//! Forward half-passes integrate
//! `z1' = z2 - g2 (z1 - Y)`, `z2' = -omega^2 z1 + w_x(t, 0)`, `z3' = z1`;
//! backward half-passes flip the sign of the `z2` coupling and of the second
//! line. The plant has `g2 = 0`.

use serde::{Deserialize, Serialize};

use crate::wave::Direction;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OscillatorState {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
}

impl std::ops::Sub for OscillatorState {
    type Output = Self;

    fn sub(self, other: Self) -> Self {
        Self::new(self.z1 - other.z1, self.z2 - other.z2, self.z3 - other.z3)
    }
}

impl OscillatorState {
    pub fn new(z1: f64, z2: f64, z3: f64) -> Self {
        Self { z1, z2, z3 }
    }

    fn as_array(self) -> [f64; 3] {
        [self.z1, self.z2, self.z3]
    }

    fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn is_finite(self) -> bool {
        self.z1.is_finite() && self.z2.is_finite() && self.z3.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OscillatorMode {
    /// True system: no output injection.
    Plant,
    /// Observer copy with the `-g2 (z1 - Y)` injection.
    Observer,
}

type Mat3 = [[f64; 3]; 3];

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn mat_vec(a: &Mat3, v: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (o, row) in out.iter_mut().zip(a) {
        *o = row.iter().zip(v).map(|(x, y)| x * y).sum();
    }
    out
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
fn expm(a: &Mat3) -> Mat3 {
    let norm = a
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    let scaled: Mat3 = a.map(|row| row.map(|v| v * scale));

    let mut result: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut term = result;
    for k in 1..=24 {
        term = mat_mul(&term, &scaled).map(|row| row.map(|v| v / k as f64));
        for i in 0..3 {
            for j in 0..3 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    result
}

/// One-step propagator for a fixed `(mode, direction, omega, gamma2, dt)`.
///
/// The homogeneous part (including `z3' = z1`) is advanced with the exact
/// matrix exponential; the affine forcing is integrated with the trapezoid
/// rule, `z+ = E z + dt/2 (E b_now + b_next)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorPropagator {
    exp: Mat3,
    dt: f64,
    gamma2: f64,
    sign: f64,
}

impl OscillatorPropagator {
    pub fn new(omega: f64, gamma2: f64, dt: f64, mode: OscillatorMode, direction: Direction) -> Self {
        let g2 = match mode {
            OscillatorMode::Plant => 0.0,
            OscillatorMode::Observer => gamma2,
        };
        let sign = direction.sign();
        let w2 = omega * omega;
        let generator: Mat3 = [[-g2, sign, 0.0], [-sign * w2, 0.0, 0.0], [1.0, 0.0, 0.0]];
        Self {
            exp: expm(&generator.map(|row| row.map(|v| v * dt))),
            dt,
            gamma2: g2,
            sign,
        }
    }

    fn forcing(&self, trace: f64, y: f64) -> [f64; 3] {
        [self.gamma2 * y, self.sign * trace, 0.0]
    }

    /// Advances `z` by one step given the boundary trace and output samples at
    /// both ends of the step.
    pub fn step(&self, z: OscillatorState, trace: [f64; 2], y: [f64; 2]) -> OscillatorState {
        let b0 = self.forcing(trace[0], y[0]);
        let b1 = self.forcing(trace[1], y[1]);
        let ez = mat_vec(&self.exp, &z.as_array());
        let eb0 = mat_vec(&self.exp, &b0);
        let h = 0.5 * self.dt;
        OscillatorState::from_array([
            ez[0] + h * (eb0[0] + b1[0]),
            ez[1] + h * (eb0[1] + b1[1]),
            ez[2] + h * (eb0[2] + b1[2]),
        ])
    }
}

/// Single oscillator step; see [`OscillatorPropagator`]. `y_*` are ignored in
/// plant mode.
#[allow(clippy::too_many_arguments)]
pub fn oscillator_step(
    z: OscillatorState,
    trace_now: f64,
    trace_next: f64,
    y_now: f64,
    y_next: f64,
    omega: f64,
    gamma2: f64,
    dt: f64,
    mode: OscillatorMode,
    direction: Direction,
) -> OscillatorState {
    OscillatorPropagator::new(omega, gamma2, dt, mode, direction).step(
        z,
        [trace_now, trace_next],
        [y_now, y_next],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exact_rotation_step() {
        let z = oscillator_step(
            OscillatorState::new(1.0, 0.0, 0.0),
            0.0,
            0.0,
            0.0,
            0.0,
            1.0,
            0.0,
            PI / 2.0,
            OscillatorMode::Plant,
            Direction::Forward,
        );
        assert!(z.z1.abs() < 1e-14);
        assert!((z.z2 + 1.0).abs() < 1e-14);
        assert!((z.z3 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn observer_at_rest_stays_at_rest() {
        let z = oscillator_step(
            OscillatorState::default(),
            0.0,
            0.0,
            0.0,
            0.0,
            1.0,
            0.5,
            1e-3,
            OscillatorMode::Observer,
            Direction::Backward,
        );
        assert_eq!(z, OscillatorState::default());
    }

    #[test]
    fn constant_forcing_particular_solution() {
        // z1'' + z1 = 1 from rest: z1 = 1 - cos t.
        for &n in &[100usize, 1000] {
            let dt = 1.0 / n as f64;
            let p = OscillatorPropagator::new(1.0, 0.0, dt, OscillatorMode::Plant, Direction::Forward);
            let mut z = OscillatorState::default();
            for _ in 0..n {
                z = p.step(z, [1.0, 1.0], [0.0, 0.0]);
            }
            let err = (z.z1 - (1.0 - 1f64.cos())).abs();
            assert!(err < 1e-6 * (1000.0 / n as f64).powi(2), "n {n}: err {err}");
            assert!((z.z3 - (1.0 - 1f64.sin())).abs() < 1e-5);
        }
    }

    #[test]
    fn backward_retraces_forward() {
        // Forward with a smooth trace, then backward with the reversed trace,
        // returns to the start up to the trapezoid error.
        let n = 2000;
        let dt = 1e-3;
        let g = |k: usize| (3.0 * k as f64 * dt).cos();
        let fwd = OscillatorPropagator::new(1.3, 0.0, dt, OscillatorMode::Plant, Direction::Forward);
        let bwd = OscillatorPropagator::new(1.3, 0.0, dt, OscillatorMode::Plant, Direction::Backward);
        let start = OscillatorState::new(0.2, -0.1, 0.0);
        let mut z = start;
        for k in 0..n {
            z = fwd.step(z, [g(k), g(k + 1)], [0.0, 0.0]);
        }
        let mid = z;
        for k in 0..n {
            z = bwd.step(z, [g(n - k), g(n - k - 1)], [0.0, 0.0]);
        }
        assert!((z.z1 - start.z1).abs() < 1e-6);
        assert!((z.z2 - start.z2).abs() < 1e-6);
        assert!(mid.z3.abs() > 0.0);
    }

    #[test]
    fn expm_of_nilpotent() {
        let a: Mat3 = [[0.0, 2.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
        let e = expm(&a);
        // I + A + A^2/2 with A^2 = [[0,0,0],[0,0,0],[0,2,0]].
        let expected: Mat3 = [[1.0, 2.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((e[i][j] - expected[i][j]).abs() < 1e-14);
            }
        }
    }
}
