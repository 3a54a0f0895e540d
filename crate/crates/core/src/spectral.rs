//! Closed-form sine-series solutions used as independent references for the
//! finite-difference solvers.
//!
//! Everything here is evaluated analytically mode by mode; nothing depends on
//! the leapfrog kernel or the oscillator propagator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, ScalarField, TimeSeries};
use crate::observer::OscillatorState;

/// Distance to a natural frequency `k pi` below which forcing is rejected.
pub const RESONANCE_TOLERANCE: f64 = 1e-8;

pub const DEFAULT_MODES: usize = 64;

/// Coefficients of `sum_k c_k sin(k pi x)`; `coefficients[k - 1] = c_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeVector {
    pub coefficients: Vec<f64>,
}

impl ModeVector {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Self { coefficients }
    }

    pub fn n_modes(&self) -> usize {
        self.coefficients.len()
    }

    /// `k pi` for the `k`-th stored entry.
    fn wavenumbers(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| ((i + 1) as f64 * PI, *c))
    }

    /// Coefficients of `x - x^2`: `8 / (k pi)^3` for odd `k`, zero otherwise.
    pub fn poly_paper(n_modes: usize) -> Self {
        Self::new(
            (1..=n_modes)
                .map(|k| {
                    if k % 2 == 1 {
                        8.0 / (k as f64 * PI).powi(3)
                    } else {
                        0.0
                    }
                })
                .collect(),
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.wavenumbers().map(|(kp, c)| c * (kp * x).sin()).sum()
    }

    /// Nodal samples of the series on `grid`.
    pub fn synthesize(&self, grid: &Grid1D) -> ScalarField {
        ScalarField::from_fn(grid, |x| self.eval(x))
    }
}

/// `c_k = 2 * trapezoid(f sin(k pi x))`, `k = 1..=n_modes`.
pub fn sine_coefficients(f: &ScalarField, grid: &Grid1D, n_modes: usize) -> Result<ModeVector> {
    grid.check_field(f)?;
    if n_modes > grid.nx() {
        return Err(Error::Aliasing { n_modes, nx: grid.nx() });
    }
    let scale = f.max_abs().max(1.0);
    if f[0].abs() > 1e-12 * scale || f[grid.nx()].abs() > 1e-12 * scale {
        return Err(Error::InvalidParameter(
            "sine projection needs f(0) = f(1) = 0".into(),
        ));
    }
    let dx = grid.dx();
    let coefficients = (1..=n_modes)
        .map(|k| {
            let kp = k as f64 * PI;
            // Endpoint terms vanish: f and sin are both zero there.
            2.0 * dx
                * (1..grid.nx())
                    .map(|j| f[j] * (kp * grid.x(j)).sin())
                    .sum::<f64>()
        })
        .collect();
    Ok(ModeVector::new(coefficients))
}

/// Source-free evolution from `(q, 0)`: `c_k cos(k pi t)`.
pub fn free_modal_solution(q: &ModeVector, t: f64) -> ModeVector {
    ModeVector::new(q.wavenumbers().map(|(kp, c)| c * (kp * t).cos()).collect())
}

fn check_resonance(q: &ModeVector, omega: f64) -> Result<()> {
    for (i, (kp, _)) in q.wavenumbers().enumerate() {
        if (omega.abs() - kp).abs() < RESONANCE_TOLERANCE {
            return Err(Error::Resonance {
                omega,
                mode: i + 1,
                tolerance: RESONANCE_TOLERANCE,
            });
        }
    }
    Ok(())
}

/// Duhamel solution of `a_k'' + (k pi)^2 a_k = c_k cos(omega t)` from rest:
/// `a_k = c_k (cos omega t - cos k pi t) / ((k pi)^2 - omega^2)`.
/// Returns `(position, velocity)` coefficients.
pub fn forced_modal_solution(
    q: &ModeVector,
    omega: f64,
    t: f64,
) -> Result<(ModeVector, ModeVector)> {
    check_resonance(q, omega)?;
    let (pos, vel) = q
        .wavenumbers()
        .map(|(kp, c)| {
            let denom = kp * kp - omega * omega;
            let a = c * ((omega * t).cos() - (kp * t).cos()) / denom;
            let da = c * (-omega * (omega * t).sin() + kp * (kp * t).sin()) / denom;
            (a, da)
        })
        .unzip();
    Ok((ModeVector::new(pos), ModeVector::new(vel)))
}

/// `d/dx sum_k a_k sin(k pi x)` at `x = 0`, i.e. `sum_k a_k k pi`.
pub fn neumann_trace_series(a: &ModeVector) -> f64 {
    a.wavenumbers().map(|(kp, c)| c * kp).sum()
}

/// Analytic output `y(t_n)` of the forced problem at `t_n = n dt`,
/// `n = 0..n_samples`.
pub fn oracle_measurement(
    q: &ModeVector,
    omega: f64,
    n_samples: usize,
    dt: f64,
) -> Result<TimeSeries> {
    check_resonance(q, omega)?;
    let values = (0..n_samples)
        .map(|n| {
            let t = n as f64 * dt;
            q.wavenumbers()
                .map(|(kp, c)| c * kp * ((omega * t).cos() - (kp * t).cos()) / (kp * kp - omega * omega))
                .sum()
        })
        .collect();
    Ok(TimeSeries::new(values, dt))
}

/// Kernels of `z1'' + omega^2 z1 = g`: `sin(omega s)/omega` and its
/// antiderivative `(1 - cos(omega s))/omega^2`, with their `omega -> 0` limits.
fn rotation_kernels(omega: f64, s: f64) -> (f64, f64) {
    let w = omega.abs();
    if w * s.abs() < 1e-4 {
        // Series to avoid cancellation.
        let ws2 = (w * s) * (w * s);
        (s * (1.0 - ws2 / 6.0), 0.5 * s * s * (1.0 - ws2 / 12.0))
    } else {
        ((w * s).sin() / w, (1.0 - (w * s).cos()) / (w * w))
    }
}

/// Composite Simpson weights on `m` intervals (Simpson 3/8 on the last three
/// intervals when `m` is odd, trapezoid when `m == 1`).
fn simpson_weights(m: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    match m {
        0 => {}
        1 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        _ => {
            let (simpson_end, tail) = if m.is_multiple_of(2) { (m, false) } else { (m - 3, true) };
            for i in (0..simpson_end).step_by(2) {
                w[i] += h / 3.0;
                w[i + 1] += 4.0 * h / 3.0;
                w[i + 2] += h / 3.0;
            }
            if tail {
                let b = m - 3;
                w[b] += 3.0 * h / 8.0;
                w[b + 1] += 9.0 * h / 8.0;
                w[b + 2] += 9.0 * h / 8.0;
                w[b + 3] += 3.0 * h / 8.0;
            }
        }
    }
    w
}

/// Variation-of-constants solution of `z1' = z2`, `z2' = -omega^2 z1 + g`,
/// `z3' = z1` at time `t`, with the convolution evaluated by composite
/// Simpson quadrature over the samples of `forcing`.
///
/// `t` must be a sample time of `forcing`.
pub fn oscillator_closed_form(
    omega: f64,
    forcing: &TimeSeries,
    z0: OscillatorState,
    t: f64,
) -> Result<OscillatorState> {
    let h = forcing.dt();
    let m_real = t / h;
    let m = m_real.round();
    if (m_real - m).abs() > 1e-9 * m.max(1.0) || m < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "t = {t} is not a sample time of the forcing (dt = {h})"
        )));
    }
    let m = m as usize;
    if m >= forcing.len() {
        return Err(Error::IndexOutOfRange { index: m, max: forcing.len() - 1 });
    }
    let weights = simpson_weights(m, h);
    let g = forcing.values();
    let (mut c1, mut c2, mut c3) = (0.0, 0.0, 0.0);
    for (i, w) in weights.iter().enumerate() {
        let s = t - i as f64 * h;
        let (sinc, anti) = rotation_kernels(omega, s);
        let cos_term = (omega * s).cos();
        c1 += w * sinc * g[i];
        c2 += w * cos_term * g[i];
        c3 += w * anti * g[i];
    }
    let (sinc_t, anti_t) = rotation_kernels(omega, t);
    let cos_t = (omega * t).cos();
    Ok(OscillatorState {
        z1: cos_t * z0.z1 + sinc_t * z0.z2 + c1,
        z2: -omega * omega * sinc_t * z0.z1 + cos_t * z0.z2 + c2,
        z3: z0.z3 + sinc_t * z0.z1 + anti_t * z0.z2 + c3,
    })
}
