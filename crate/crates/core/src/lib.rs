//! Recovery of the spatial source `q(x)` of
//! `u_tt - u_xx = q(x) cos(omega t)` on `(0, 1)` from the single boundary
//! measurement `y(t) = u_x(t, 0)`, by a back-and-forth boundary observer.
//!
//! The crate holds the leapfrog wave kernel, the measurement simulator, the
//! observer iteration, a sine-series oracle and the diagnostics that check
//! the error system's energy identities.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod forward;
pub mod grid;
pub mod observer;
pub mod spectral;
pub mod wave;

pub use config::{ScenarioConfig, SourceSpec};
pub use diagnostics::{DiagnosticEntry, DiagnosticsReport};
pub use error::{Error, Result};
pub use forward::{add_noise, simulate_forward, simulate_forward_with_state, MeasurementRecord, Provenance};
pub use grid::{Gains, Grid1D, ScalarField, SourceProfile, TimeSeries};
pub use observer::{
    run_back_and_forth, simulate_cascade, BackAndForth, BackAndForthRun, IterationReport, ObserverState,
    OscillatorState,
};
pub use spectral::ModeVector;
pub use wave::{Direction, LeapfrogState};
