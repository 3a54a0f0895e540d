use crate::error::{Error, Result};
use crate::forward::MeasurementRecord;
use crate::wave::Direction;

/// The measured output extended to all half-passes: `y` is replayed forward on
/// even half-passes and in reverse on odd ones, `Y(t) = y((2k + 2) T - t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedMeasurement {
    pub base: MeasurementRecord,
}

impl ExtendedMeasurement {
    pub fn new(base: MeasurementRecord) -> Self {
        Self { base }
    }

    pub fn n_steps_per_pass(&self) -> usize {
        self.base.y.len().saturating_sub(1)
    }

    pub fn direction(half_pass: usize) -> Direction {
        if half_pass.is_multiple_of(2) {
            Direction::Forward
        } else {
            Direction::Backward
        }
    }

    /// `Y` at local step `n` of half-pass `half_pass`.
    pub fn value(&self, half_pass: usize, n: usize) -> Result<f64> {
        let last = self.n_steps_per_pass();
        if n > last {
            return Err(Error::IndexOutOfRange { index: n, max: last });
        }
        Ok(self.value_unchecked(half_pass, n))
    }

    pub(crate) fn value_unchecked(&self, half_pass: usize, n: usize) -> f64 {
        let y = self.base.y.values();
        match Self::direction(half_pass) {
            Direction::Forward => y[n],
            Direction::Backward => y[y.len() - 1 - n],
        }
    }
}

pub fn extended_output(em: &ExtendedMeasurement, half_pass: usize, n: usize) -> Result<f64> {
    em.value(half_pass, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeSeries;

    fn record() -> ExtendedMeasurement {
        let y = TimeSeries::new(vec![0.0, 1.0, 4.0, 9.0, 16.0], 0.25);
        ExtendedMeasurement::new(MeasurementRecord::from_series(y, 1.0, 1.0))
    }

    #[test]
    fn forward_and_backward_lookup() {
        let em = record();
        assert_eq!(em.value(0, 0).unwrap(), 0.0);
        assert_eq!(em.value(2, 3).unwrap(), 9.0);
        assert_eq!(em.value(1, 0).unwrap(), 16.0);
        assert_eq!(em.value(3, 1).unwrap(), 9.0);
        assert_eq!(em.value(1, 4).unwrap(), 0.0);
        assert!(em.value(0, 5).is_err());
    }

    #[test]
    fn backward_sweep_is_a_permutation() {
        let em = record();
        let mut fwd: Vec<f64> = (0..=4).map(|n| em.value(0, n).unwrap()).collect();
        let mut bwd: Vec<f64> = (0..=4).map(|n| em.value(1, n).unwrap()).collect();
        fwd.sort_by(f64::total_cmp);
        bwd.sort_by(f64::total_cmp);
        assert_eq!(fwd, bwd);
    }
}
