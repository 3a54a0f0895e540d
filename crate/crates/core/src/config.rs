//! Scenario configuration shared by the CLI and the Python bindings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Gains, Grid1D, SourceProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub profile: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self {
            profile: "poly_paper".into(),
            k: None,
            coeffs: None,
        }
    }
}

impl SourceSpec {
    pub fn resolve(&self) -> Result<SourceProfile> {
        SourceProfile::from_name(&self.profile, self.k, self.coeffs.as_deref())
    }
}

/// One end-to-end experiment. Missing keys take the defaults of the
/// reference experiment (`q = x - x^2`, `T = 3`, 20 cells, `cfl = 0.005`,
/// gains `(1, 1/2)`, 50 iterations, no noise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub source: SourceSpec,
    pub omega: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub nx: usize,
    pub cfl: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub iterations: usize,
    /// Noise level relative to the RMS of the clean measurement.
    pub noise: f64,
    pub seed: u64,
    /// Write `estimate_iter_<k>.csv` every `snapshot_stride` iterations.
    pub snapshot_stride: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            source: SourceSpec::default(),
            omega: 1.0,
            horizon: 3.0,
            nx: 20,
            cfl: 0.005,
            gamma1: 1.0,
            gamma2: 0.5,
            iterations: 50,
            noise: 0.0,
            seed: 42,
            snapshot_stride: 1,
        }
    }
}

impl ScenarioConfig {
    /// Checks every field and returns the resolved grid, gains and source.
    pub fn validate(&self) -> Result<(Grid1D, Gains, SourceProfile)> {
        let grid = Grid1D::new(self.nx, self.cfl, self.horizon)?;
        let gains = Gains::new(self.gamma1, self.gamma2)?;
        let source = self.source.resolve()?;
        if !self.omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega must be finite, got {}", self.omega)));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be >= 1".into()));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise must be >= 0, got {}", self.noise)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter("snapshot_stride must be >= 1".into()));
        }
        Ok((grid, gains, source))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_reference_defaults() {
        let c: ScenarioConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, ScenarioConfig::default());
        let (g, gains, src) = c.validate().unwrap();
        assert_eq!(g.n_steps_per_pass(), 12000);
        assert_eq!(gains, Gains::default());
        assert_eq!(src, SourceProfile::PolyPaper);
    }

    #[test]
    fn horizon_key_is_capital_t() {
        let c: ScenarioConfig = serde_json::from_str(r#"{"T": 2.0, "source": {"profile": "sine_k", "k": 1}}"#).unwrap();
        assert_eq!(c.horizon, 2.0);
        assert_eq!(c.validate().unwrap().2, SourceProfile::SineMode(1));
    }

    #[test]
    fn rejects_bad_values() {
        let bad = |f: fn(&mut ScenarioConfig)| {
            let mut c = ScenarioConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.nx = 1));
        assert!(bad(|c| c.gamma1 = 0.0));
        assert!(bad(|c| c.iterations = 0));
        assert!(bad(|c| c.noise = -0.1));
        assert!(bad(|c| c.snapshot_stride = 0));
        assert!(bad(|c| c.source.profile = "nope".into()));
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
