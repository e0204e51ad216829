use std::path::Path;

use leggett::expsim::{DEFAULT_COUNTS_PER_PAIR, DEFAULT_SEED};
use leggett::{Criterion, PolarizationState};
use serde::{Deserialize, Serialize};

/// Visibilities measured along x, y, z in the reference experiment; the
/// default source for `simulate`.
pub const REFERENCE_VISIBILITIES: [f64; 3] = [0.9947, 0.9925, 0.9970];
pub const DEFAULT_JITTER_DEG: f64 = 0.5;

/// On-disk run description. Every key is optional; missing ones take the
/// defaults below and command-line flags override whatever is present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub state: Option<PolarizationState>,
    pub n: Option<usize>,
    /// Relative angle in degrees; the optimum for `criterion` when absent.
    pub phi_deg: Option<f64>,
    pub criterion: Option<Criterion>,
    pub counts_per_pair: Option<u64>,
    pub jitter_deg: Option<f64>,
    pub seed: Option<u64>,
}

impl RunConfigFile {
    pub fn load(path: &Path) -> leggett::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn state(&self) -> leggett::Result<PolarizationState> {
        match self.state {
            Some(s) => Ok(s),
            None => {
                let [v1, v2, v3] = REFERENCE_VISIBILITIES;
                PolarizationState::per_axis(v1, v2, v3)
            }
        }
    }

    pub fn counts_per_pair(&self) -> u64 {
        self.counts_per_pair.unwrap_or(DEFAULT_COUNTS_PER_PAIR)
    }

    pub fn jitter_deg(&self) -> f64 {
        self.jitter_deg.unwrap_or(DEFAULT_JITTER_DEG)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}
