//! Cascade system, its back-and-forth observer and the boundary oscillator
//! they share.

mod cascade;
mod extended;
mod oscillator;
mod run;

pub use cascade::{simulate_cascade, CascadeTrajectory};
pub use extended::{extended_output, ExtendedMeasurement};
pub use oscillator::{oscillator_step, OscillatorMode, OscillatorPropagator, OscillatorState};
pub use run::{
    extract_estimate, observer_half_pass, run_back_and_forth, BackAndForth, BackAndForthRun, IterationReport,
    ObserverState, TrajectorySample,
};
