//! Uniform space-time grid on `(0, T) x (0, 1)`, nodal field containers and
//! the discrete norms shared by the solvers and diagnostics.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Uniform discretization of the unit interval and of one observation window.
///
/// The time step is adjusted so that a pass of length `horizon` contains an
/// integer number of steps; pass boundaries then fall exactly on time nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    nx: usize,
    dx: f64,
    cfl: f64,
    dt: f64,
    n_steps_per_pass: usize,
    horizon: f64,
}

impl Grid1D {
    /// Builds a grid with `nx` cells, requested ratio `cfl = dt/dx` and pass
    /// length `horizon`.
    ///
    /// The effective time step is `horizon / round(horizon / (cfl * dx))`; the
    /// stored `cfl` is recomputed from it and never exceeds 1.
    pub fn new(nx: usize, cfl: f64, horizon: f64) -> Result<Self> {
        if nx < 3 {
            return Err(Error::InvalidGrid(format!("nx must be >= 3, got {nx}")));
        }
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::InvalidGrid(format!("cfl must lie in (0, 1], got {cfl}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        let dx = 1.0 / nx as f64;
        let mut n_steps = ((horizon / (cfl * dx)).round() as usize).max(1);
        while horizon / n_steps as f64 / dx > 1.0 {
            n_steps += 1;
        }
        let dt = horizon / n_steps as f64;
        Ok(Self {
            nx,
            dx,
            cfl: dt / dx,
            dt,
            n_steps_per_pass: n_steps,
            horizon,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Number of nodes, `nx + 1`.
    pub fn n_nodes(&self) -> usize {
        self.nx + 1
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Effective `dt / dx` after the step adjustment.
    pub fn cfl(&self) -> f64 {
        self.cfl
    }

    pub fn n_steps_per_pass(&self) -> usize {
        self.n_steps_per_pass
    }

    /// One-way observation horizon `T`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.nx).map(move |j| self.x(j))
    }

    /// Time of node `n` within a pass.
    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    /// Same grid with the spatial resolution doubled at fixed `cfl`.
    pub fn refined(&self) -> Result<Self> {
        Self::new(2 * self.nx, self.cfl, self.horizon)
    }

    pub(crate) fn check_field(&self, f: &ScalarField) -> Result<()> {
        check_len(self.n_nodes(), f.len())
    }
}

/// Nodal samples `f(x_j)`, `x_j = j dx`, of a function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField(Vec<f64>);

impl ScalarField {
    pub fn zeros(grid: &Grid1D) -> Self {
        Self(vec![0.0; grid.n_nodes()])
    }

    pub fn from_fn(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self(grid.nodes().map(f).collect())
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| c * v).collect())
    }

    /// `self - other`, nodewise.
    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    /// `a * self + b * other`, nodewise.
    pub fn lin_comb(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(x, y)| a * x + b * y).collect()))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.0[j]
    }
}

impl IndexMut<usize> for ScalarField {
    fn index_mut(&mut self, j: usize) -> &mut f64 {
        &mut self.0[j]
    }
}

/// Uniformly sampled signal `values[n] = s(n dt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    dt: f64,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, dt: f64) -> Self {
        Self { values, dt }
    }

    pub fn zeros(len: usize, dt: f64) -> Self {
        Self::new(vec![0.0; len], dt)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |n| n as f64 * self.dt)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoid approximation of `int_0^{(len-1) dt} s(t)^2 dt`.
    pub fn l2_norm_sq(&self) -> f64 {
        trapezoid_sq(&self.values, self.dt)
    }

    /// Full `H^1(0, T)` norm squared: `L^2` part plus the `L^2` norm of the
    /// forward difference quotient (midpoint rule on intervals).
    pub fn h1_norm_sq(&self) -> f64 {
        let deriv: f64 = self
            .values
            .windows(2)
            .map(|w| {
                let d = (w[1] - w[0]) / self.dt;
                d * d
            })
            .sum::<f64>()
            * self.dt;
        self.l2_norm_sq() + deriv
    }
}

/// Positive observer gains `(gamma1, gamma2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl Gains {
    pub fn new(gamma1: f64, gamma2: f64) -> Result<Self> {
        if !(gamma1 > 0.0 && gamma1.is_finite() && gamma2 > 0.0 && gamma2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "observer gains must be strictly positive, got ({gamma1}, {gamma2})"
            )));
        }
        Ok(Self { gamma1, gamma2 })
    }
}

impl Default for Gains {
    fn default() -> Self {
        Self { gamma1: 1.0, gamma2: 0.5 }
    }
}

/// Source profile `q(x)`. All profiles vanish at both endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SourceProfile {
    /// `q(x) = x - x^2`.
    PolyPaper,
    /// `q(x) = sin(k pi x)`.
    SineMode(usize),
    /// `q(x) = sum_k c_k sin(k pi x)`, `coeffs[k-1] = c_k`.
    Modes(Vec<f64>),
}

impl SourceProfile {
    /// Resolves a named profile. `k` is required for `sine_k`, `coeffs` for
    /// `modes`.
    pub fn from_name(name: &str, k: Option<usize>, coeffs: Option<&[f64]>) -> Result<Self> {
        match name {
            "poly_paper" => Ok(Self::PolyPaper),
            "sine_k" => match k {
                Some(k) if k >= 1 => Ok(Self::SineMode(k)),
                _ => Err(Error::InvalidParameter("sine_k needs a mode index k >= 1".into())),
            },
            "modes" | "coeffs" => match coeffs {
                Some(c) => Ok(Self::Modes(c.to_vec())),
                None => Err(Error::InvalidParameter("modes profile needs `coeffs`".into())),
            },
            other => Err(Error::UnknownProfile(other.to_string())),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::PolyPaper => x - x * x,
            Self::SineMode(k) => (*k as f64 * PI * x).sin(),
            Self::Modes(c) => c
                .iter()
                .enumerate()
                .map(|(i, ck)| ck * ((i + 1) as f64 * PI * x).sin())
                .sum(),
        }
    }

    /// Nodal samples on `grid` with `q(0) = q(1) = 0` enforced.
    pub fn sample(&self, grid: &Grid1D) -> ScalarField {
        let mut f = ScalarField::from_fn(grid, |x| self.eval(x));
        pin_endpoints(&mut f);
        f
    }
}

pub fn eval_source_profile(profile: &SourceProfile, grid: &Grid1D) -> ScalarField {
    profile.sample(grid)
}

pub(crate) fn pin_endpoints(f: &mut ScalarField) {
    let n = f.len();
    if n > 0 {
        f[0] = 0.0;
        f[n - 1] = 0.0;
    }
}

fn trapezoid_sq(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().map(|v| v * v).sum();
            h * (inner + 0.5 * (values[0] * values[0] + values[n - 1] * values[n - 1]))
        }
    }
}

/// Composite trapezoid approximation of `(int_0^1 f^2)^{1/2}`.
pub fn l2_norm(f: &ScalarField, grid: &Grid1D) -> Result<f64> {
    grid.check_field(f)?;
    Ok(trapezoid_sq(f.values(), grid.dx()).sqrt())
}

/// `L^2` norm of the forward-difference derivative (midpoint rule on cells).
pub fn h1_seminorm(f: &ScalarField, grid: &Grid1D) -> Result<f64> {
    grid.check_field(f)?;
    let dx = grid.dx();
    let s: f64 = f
        .values()
        .windows(2)
        .map(|w| {
            let d = (w[1] - w[0]) / dx;
            d * d
        })
        .sum();
    Ok((s * dx).sqrt())
}

/// Centered second difference at interior nodes; boundary entries are zero.
pub fn second_difference(f: &ScalarField, grid: &Grid1D) -> Result<ScalarField> {
    grid.check_field(f)?;
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    let v = f.values();
    let mut out = vec![0.0; v.len()];
    for j in 1..v.len() - 1 {
        out[j] = (v[j + 1] - 2.0 * v[j] + v[j - 1]) * inv_dx2;
    }
    Ok(ScalarField(out))
}

/// Full `H^2(0, 1)` norm squared: `|f|^2 + |f_x|^2 + |f_xx|^2` with the
/// discrete norms above (second difference on interior nodes).
pub fn h2_norm_sq(f: &ScalarField, grid: &Grid1D) -> Result<f64> {
    let l2 = l2_norm(f, grid)?;
    let h1 = h1_seminorm(f, grid)?;
    let d2 = second_difference(f, grid)?;
    let dx = grid.dx();
    let d2_sq: f64 = d2.values()[1..grid.nx()].iter().map(|v| v * v).sum::<f64>() * dx;
    Ok(l2 * l2 + h1 * h1 + d2_sq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_grid() {
        let g = Grid1D::new(20, 0.005, 3.0).unwrap();
        assert_eq!(g.dx(), 0.05);
        assert!((g.dt() - 2.5e-4).abs() < 1e-18);
        assert_eq!(g.n_steps_per_pass(), 12000);
        assert!((g.n_steps_per_pass() as f64 * g.dt() - 3.0).abs() <= f64::EPSILON * 3.0);
    }

    #[test]
    fn unit_cfl_grid() {
        let g = Grid1D::new(20, 1.0, 2.0).unwrap();
        assert_eq!(g.dx(), 0.05);
        assert!((g.dt() - 0.05).abs() < 1e-15);
        assert_eq!(g.n_steps_per_pass(), 40);
        assert!(g.cfl() <= 1.0);
    }

    #[test]
    fn rounded_step() {
        let g = Grid1D::new(10, 0.3, 1.0).unwrap();
        assert_eq!(g.n_steps_per_pass(), 33);
        assert!((g.dt() - 1.0 / 33.0).abs() < 1e-15);
        assert!((g.cfl() - 10.0 / 33.0).abs() < 1e-12);
        assert!(g.cfl() <= 1.0);
    }

    #[test]
    fn rounding_never_exceeds_unit_cfl() {
        // 1.03 / 0.1 rounds down to 10 steps, which would give cfl 1.03.
        let g = Grid1D::new(10, 1.0, 1.03).unwrap();
        assert!(g.cfl() <= 1.0);
        assert_eq!(g.n_steps_per_pass(), 11);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid1D::new(2, 0.5, 1.0).is_err());
        assert!(Grid1D::new(20, 0.0, 1.0).is_err());
        assert!(Grid1D::new(20, 1.5, 1.0).is_err());
        assert!(Grid1D::new(20, 0.5, 0.0).is_err());
        assert!(Grid1D::new(20, 0.5, -1.0).is_err());
        assert!(Grid1D::new(20, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = Grid1D::new(20, 0.5, 1.0).unwrap();
        let zero = ScalarField::zeros(&g);
        assert_eq!(l2_norm(&zero, &g).unwrap(), 0.0);
        let one = ScalarField::from_fn(&g, |_| 1.0);
        assert!((l2_norm(&one, &g).unwrap() - 1.0).abs() < 1e-14);
        let s = ScalarField::from_fn(&g, |x| (PI * x).sin());
        assert!((l2_norm(&s, &g).unwrap() - 0.5f64.sqrt()).abs() < 1e-3);

        assert_eq!(h1_seminorm(&ScalarField::from_fn(&g, |_| 3.0), &g).unwrap(), 0.0);
        assert!((h1_seminorm(&ScalarField::from_fn(&g, |x| x), &g).unwrap() - 1.0).abs() < 1e-13);
        let h1 = h1_seminorm(&s, &g).unwrap();
        let exact = PI / 2f64.sqrt();
        assert!((h1 - exact).abs() / exact < 1e-2);
    }

    #[test]
    fn norm_length_mismatch() {
        let g = Grid1D::new(20, 0.5, 1.0).unwrap();
        let f = ScalarField::from_values(vec![0.0; 5]);
        assert!(matches!(l2_norm(&f, &g), Err(Error::LengthMismatch { .. })));
        assert!(h1_seminorm(&f, &g).is_err());
    }

    #[test]
    fn l2_norm_at_least_second_order() {
        // int_0^1 (x - x^2)^2 dx = 1/30
        let exact = (1.0f64 / 30.0).sqrt();
        let err = |nx| {
            let g = Grid1D::new(nx, 0.5, 1.0).unwrap();
            let f = SourceProfile::PolyPaper.sample(&g);
            (l2_norm(&f, &g).unwrap() - exact).abs()
        };
        // q^2 has zero slope at both ends, so the trapezoid rule gains two
        // orders; require at least second order.
        let ratio = err(20) / err(40);
        assert!(ratio >= 3.0, "ratio {ratio}");
    }

    #[test]
    fn source_profiles() {
        let g = Grid1D::new(20, 0.5, 1.0).unwrap();
        let p = SourceProfile::from_name("poly_paper", None, None).unwrap().sample(&g);
        assert!((p[10] - 0.25).abs() < 1e-15);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[20], 0.0);
        let s = SourceProfile::from_name("sine_k", Some(1), None).unwrap().sample(&g);
        assert!((s[10] - 1.0).abs() < 1e-15);
        let m = SourceProfile::from_name("modes", None, Some(&[0.0, 1.0])).unwrap().sample(&g);
        assert!(m[10].abs() < 1e-15);
        assert!((m[5] - 1.0).abs() < 1e-15);
        assert!(matches!(
            SourceProfile::from_name("gaussian", None, None),
            Err(Error::UnknownProfile(_))
        ));
        assert!(SourceProfile::from_name("sine_k", None, None).is_err());
    }

    #[test]
    fn gains_must_be_positive() {
        assert!(Gains::new(1.0, 0.5).is_ok());
        assert!(Gains::new(0.0, 0.5).is_err());
        assert!(Gains::new(1.0, -0.5).is_err());
    }

    #[test]
    fn time_series_h1_of_linear_ramp() {
        // s(t) = t on [0, 1]: |s|^2 = 1/3, |s'|^2 = 1
        let n = 1000;
        let dt = 1.0 / n as f64;
        let s = TimeSeries::new((0..=n).map(|i| i as f64 * dt).collect(), dt);
        assert!((s.h1_norm_sq() - (1.0 / 3.0 + 1.0)).abs() < 1e-6);
    }
}
