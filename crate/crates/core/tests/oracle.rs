use waveobs_core::diagnostics::equivalence_metrics;
use waveobs_core::spectral::{forced_modal_solution, oracle_measurement, sine_coefficients, ModeVector};
use waveobs_core::{simulate_cascade, simulate_forward, Grid1D, SourceProfile};

fn forward_discrepancy(omega: f64, nx: usize) -> f64 {
    let g = Grid1D::new(nx, 0.005, 3.0).unwrap();
    let q = SourceProfile::PolyPaper.sample(&g);
    let y = simulate_forward(&q, omega, &g).unwrap();
    let exact = oracle_measurement(&ModeVector::poly_paper(64), omega, g.n_steps_per_pass() + 1, g.dt()).unwrap();
    equivalence_metrics(&exact, &y.y).unwrap().0
}

#[test]
fn measurement_matches_series_at_second_order() {
    for omega in [0.0, 1.0, 2.0] {
        let e20 = forward_discrepancy(omega, 20);
        let e40 = forward_discrepancy(omega, 40);
        let e80 = forward_discrepancy(omega, 80);
        assert!(e20 < 2e-2, "omega {omega}: {e20:e}");
        assert!(e80 < 1e-3, "omega {omega}: {e80:e}");
        for (c, f) in [(e20, e40), (e40, e80)] {
            let ratio = c / f;
            assert!((3.0..=5.0).contains(&ratio), "omega {omega}: ratio {ratio}");
        }
    }
}

#[test]
fn static_source_trace_settles_on_its_mean() {
    // With omega = 0 the field oscillates about the static solution
    // u_s = x^4/12 - x^3/6 + x/12, whose slope at x = 0 is 1/12. The
    // measurement y(t) therefore averages to 1/12 over whole periods.
    let g = Grid1D::new(80, 0.005, 2.0).unwrap();
    let q = SourceProfile::PolyPaper.sample(&g);
    let y = simulate_forward(&q, 0.0, &g).unwrap();
    let v = y.y.values();
    let mean = v[..v.len() - 1].iter().sum::<f64>() / (v.len() - 1) as f64;
    assert!((mean - 1.0 / 12.0).abs() < 1e-3, "mean {mean}");
    assert_eq!(v[0], 0.0);
}

#[test]
fn forced_field_matches_modal_solution() {
    let q = ModeVector::poly_paper(64);
    let g = Grid1D::new(80, 0.005, 1.0).unwrap();
    let src = SourceProfile::PolyPaper.sample(&g);
    let (_, state) = waveobs_core::simulate_forward_with_state(&src, 1.0, &g).unwrap();
    let exact = forced_modal_solution(&q, 1.0, g.horizon()).unwrap().0.synthesize(&g);
    let err = state.u_curr.sub(&exact).unwrap().max_abs() / exact.max_abs();
    assert!(err < 5e-4, "{err:e}");
}

#[test]
fn cascade_output_tracks_measurement() {
    for omega in [0.0, 1.0] {
        for nx in [20, 40] {
            let g = Grid1D::new(nx, 0.005, 3.0).unwrap();
            let q = SourceProfile::SineMode(1).sample(&g);
            let y = simulate_forward(&q, omega, &g).unwrap();
            let c = simulate_cascade(&q, omega, &g).unwrap();
            let (rel_max, _) = equivalence_metrics(&y.y, &c.output).unwrap();
            assert!(rel_max <= 1e-2, "omega {omega}, nx {nx}: {rel_max:e}");
            assert_eq!(c.output.len(), y.y.len());
        }
    }
}

#[test]
fn sine_projection_recovers_polynomial_coefficients() {
    let g = Grid1D::new(200, 0.5, 1.0).unwrap();
    let q = SourceProfile::PolyPaper.sample(&g);
    let a = sine_coefficients(&q, &g, 8).unwrap();
    let exact = ModeVector::poly_paper(8);
    for k in 0..8 {
        let (got, want) = (a.coefficients[k], exact.coefficients[k]);
        assert!((got - want).abs() < 1e-4, "mode {}: {got} vs {want}", k + 1);
    }
}
