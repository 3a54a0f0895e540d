use waveobs_core::grid::l2_norm;
use waveobs_core::observer::{extract_estimate, observer_half_pass, ExtendedMeasurement};
use waveobs_core::wave::init_leapfrog;
use waveobs_core::{
    run_back_and_forth, simulate_forward, BackAndForth, Direction, Error, Gains, Grid1D, MeasurementRecord,
    ObserverState, ScalarField, SourceProfile, TimeSeries,
};

fn record(values: Vec<f64>, grid: &Grid1D) -> MeasurementRecord {
    MeasurementRecord::from_series(TimeSeries::new(values, grid.dt()), 1.0, grid.horizon())
}

fn reference_measurement(grid: &Grid1D) -> (ScalarField, MeasurementRecord) {
    let q = SourceProfile::PolyPaper.sample(grid);
    let m = simulate_forward(&q, 1.0, grid).unwrap();
    (q, m)
}

#[test]
fn zero_measurement_gives_zero_estimates() {
    let g = Grid1D::new(20, 0.005, 3.0).unwrap();
    let m = record(vec![0.0; g.n_steps_per_pass() + 1], &g);
    let run = run_back_and_forth(&m, Gains::default(), 1.0, &g, 3, None).unwrap();
    assert_eq!(run.estimates.len(), 4);
    for q_hat in &run.estimates {
        assert_eq!(q_hat.max_abs(), 0.0);
    }
}

#[test]
fn single_iteration_gives_two_estimates() {
    let g = Grid1D::new(20, 0.005, 3.0).unwrap();
    let (q, m) = reference_measurement(&g);
    let run = run_back_and_forth(&m, Gains::default(), 1.0, &g, 1, Some(&q)).unwrap();
    assert_eq!(run.estimates.len(), 2);
    assert_eq!(run.reports.len(), 2);
    assert_eq!(run.lyapunov.len(), 3);
    assert_eq!(run.hidden_regularity.len(), 2);
    // The initial guess is zero, so its error is the norm of the source.
    let norm = l2_norm(&q, &g).unwrap();
    assert!((run.reports[0].l2_err.unwrap() - norm).abs() < 1e-15);
    assert!(run.reports[1].l2_err.unwrap() < norm);
    assert!(run.lyapunov[2] < run.lyapunov[0]);
}

#[test]
fn short_horizon_is_warned_about() {
    let short = Grid1D::new(20, 0.05, 1.5).unwrap();
    let (_, m) = reference_measurement(&short);
    let run = run_back_and_forth(&m, Gains::default(), 1.0, &short, 1, None).unwrap();
    assert_eq!(run.warnings.len(), 1);
    assert!(run.warnings[0].contains("2"));

    let long = Grid1D::new(20, 0.05, 3.0).unwrap();
    let (_, m) = reference_measurement(&long);
    let run = run_back_and_forth(&m, Gains::default(), 1.0, &long, 1, None).unwrap();
    assert!(run.warnings.is_empty());
}

#[test]
fn rejects_mismatched_measurement() {
    let g = Grid1D::new(20, 0.005, 3.0).unwrap();
    let m = record(vec![0.0; 10], &g);
    let err = run_back_and_forth(&m, Gains::default(), 1.0, &g, 1, None).unwrap_err();
    assert!(matches!(err, Error::LengthMismatch { .. }));

    let (_, m) = reference_measurement(&g);
    assert!(run_back_and_forth(&m, Gains::default(), 1.0, &g, 0, None).is_err());
}

#[test]
fn vanishing_gains_make_a_pass_pair_reversible() {
    let g = Grid1D::new(20, 0.05, 3.0).unwrap();
    let (_, m) = reference_measurement(&g);
    let em = ExtendedMeasurement::new(m);
    let gains = Gains::new(1e-12, 0.5).unwrap();
    let q0 = SourceProfile::SineMode(2).sample(&g);
    let zero = ScalarField::zeros(&g);
    let mut s = ObserverState::zero(&g);
    s.wave = init_leapfrog(&q0, &zero, &zero, &g, Direction::Forward).unwrap();

    let s1 = observer_half_pass(&s, &em, gains, 1.0, &g).unwrap();
    assert_eq!(s1.direction(), Direction::Backward);
    let s2 = observer_half_pass(&s1, &em, gains, 1.0, &g).unwrap();
    assert_eq!(s2.direction(), Direction::Forward);
    assert_eq!(s2.half_pass, 2);
    let back = s2.wave.u_curr.sub(&q0).unwrap().max_abs();
    assert!(back <= 1e-9, "wave state moved by {back:e}");
}

#[test]
fn half_pass_rejects_wrong_direction() {
    let g = Grid1D::new(20, 0.05, 3.0).unwrap();
    let (_, m) = reference_measurement(&g);
    let em = ExtendedMeasurement::new(m);
    let mut s = ObserverState::zero(&g);
    s.half_pass = 1;
    assert!(observer_half_pass(&s, &em, Gains::default(), 1.0, &g).is_err());
}

#[test]
fn boundary_node_carries_the_injection() {
    let g = Grid1D::new(20, 0.05, 3.0).unwrap();
    let (_, m) = reference_measurement(&g);
    let y_end = *m.y.values().last().unwrap();
    let em = ExtendedMeasurement::new(m);
    let gains = Gains::default();
    let s = observer_half_pass(&ObserverState::zero(&g), &em, gains, 1.0, &g).unwrap();
    let expected = gains.gamma1 * (s.osc.z1 - y_end) + gains.gamma1 * gains.gamma2 * (s.osc.z3 - s.y_integral);
    let got = s.wave.u_curr.values()[0];
    assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0), "{got} vs {expected}");
}

#[test]
fn disturbance_travels_at_unit_speed() {
    let g = Grid1D::new(40, 0.005, 0.5).unwrap();
    let n = g.n_steps_per_pass();
    let m = record((0..=n).map(|k| g.t(k)).collect(), &g);
    let em = ExtendedMeasurement::new(m);
    let s = observer_half_pass(&ObserverState::zero(&g), &em, Gains::default(), 1.0, &g).unwrap();
    let u = s.wave.u_curr.values();
    let peak = s.wave.u_curr.max_abs();
    assert!(peak > 0.1);
    let ahead = (0..g.n_nodes())
        .filter(|&j| g.x(j) > g.horizon() + 0.25)
        .map(|j| u[j].abs())
        .fold(0.0, f64::max);
    assert!(ahead <= 1e-6 * peak, "{ahead:e} ahead of the front");
}

#[test]
fn estimates_exist_only_at_forward_starts() {
    let g = Grid1D::new(20, 0.05, 3.0).unwrap();
    let (_, m) = reference_measurement(&g);
    let em = ExtendedMeasurement::new(m);
    let s1 = observer_half_pass(&ObserverState::zero(&g), &em, Gains::default(), 1.0, &g).unwrap();
    assert!(extract_estimate(&s1, &g).is_err());
    let s2 = observer_half_pass(&s1, &em, Gains::default(), 1.0, &g).unwrap();
    let q = extract_estimate(&s2, &g).unwrap();
    assert_eq!(q.values()[0], 0.0);
    assert_eq!(q.values()[g.nx()], 0.0);
    assert!(q.max_abs() > 0.0);
}

#[test]
fn monitored_run_starts_from_minus_truth() {
    let g = Grid1D::new(20, 0.05, 3.0).unwrap();
    let (q, m) = reference_measurement(&g);
    let run = BackAndForth::new(&m, Gains::default(), 1.0, &g).iterations(2).truth(&q).run().unwrap();
    let first = &run.trajectory[0];
    assert_eq!(first.time, 0.0);
    assert!(first.w1.lin_comb(1.0, &q, 1.0).unwrap().max_abs() < 1e-15);
    assert_eq!(first.z.z1, 0.0);
}

#[test]
fn runs_are_deterministic() {
    let g = Grid1D::new(20, 0.05, 3.0).unwrap();
    let (q, m) = reference_measurement(&g);
    let a = run_back_and_forth(&m, Gains::default(), 1.0, &g, 3, Some(&q)).unwrap();
    let b = run_back_and_forth(&m, Gains::default(), 1.0, &g, 3, Some(&q)).unwrap();
    assert_eq!(a.estimates, b.estimates);
    assert_eq!(a.lyapunov, b.lyapunov);
}

#[test]
fn monitoring_does_not_change_estimates() {
    let g = Grid1D::new(20, 0.05, 3.0).unwrap();
    let (q, m) = reference_measurement(&g);
    let blind = run_back_and_forth(&m, Gains::default(), 1.0, &g, 2, None).unwrap();
    let seen = run_back_and_forth(&m, Gains::default(), 1.0, &g, 2, Some(&q)).unwrap();
    assert_eq!(blind.estimates, seen.estimates);
    assert!(blind.trajectory.is_empty());
}
