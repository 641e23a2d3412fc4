use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::RNG_ALGORITHM;

pub const DEFAULT_BETA: f64 = 0.1;
pub const DEFAULT_BURN_IN: usize = 4_000;
pub const DEFAULT_SAVED_SAMPLES: usize = 4_000;
pub const DEFAULT_THINNING: usize = 100;

/// `alpha` is the concentration of the per-patient topic mixtures and
/// `beta` that of the per-topic code distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparameters {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub burn_in_sweeps: usize,
    pub n_saved_samples: usize,
    pub thinning_interval: usize,
    pub seed: u64,
    #[serde(default = "rng_name")]
    pub rng: String,
}

fn rng_name() -> String {
    RNG_ALGORITHM.to_owned()
}

impl Hyperparameters {
    /// Library defaults for `topics` topics: alpha = 50/K, beta = 0.1,
    /// 4,000 burn-in sweeps, then 4,000 samples saved every 100 sweeps.
    pub fn new(topics: usize) -> Self {
        Self {
            topics,
            alpha: default_alpha(topics),
            beta: DEFAULT_BETA,
            burn_in_sweeps: DEFAULT_BURN_IN,
            n_saved_samples: DEFAULT_SAVED_SAMPLES,
            thinning_interval: DEFAULT_THINNING,
            seed: 0,
            rng: rng_name(),
        }
    }

    pub fn with_protocol(mut self, burn_in: usize, saved: usize, thinning: usize) -> Self {
        self.burn_in_sweeps = burn_in;
        self.n_saved_samples = saved;
        self.thinning_interval = thinning;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    /// Sweeps `run` will perform in total.
    pub fn total_sweeps(&self) -> usize {
        self.burn_in_sweeps + self.n_saved_samples * self.thinning_interval
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidHyperparameter(m));
        if self.topics == 0 {
            return bad("topics must be at least 1".into());
        }
        if self.topics > u32::MAX as usize {
            return bad("topics exceeds 32-bit range".into());
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if self.thinning_interval == 0 {
            return bad("thinning_interval must be at least 1".into());
        }
        if self.n_saved_samples == 0 {
            return bad("n_saved_samples must be at least 1".into());
        }
        if self.rng != RNG_ALGORITHM {
            return bad(format!("unsupported rng {:?}, expected {RNG_ALGORITHM:?}", self.rng));
        }
        Ok(())
    }
}

pub fn default_alpha(topics: usize) -> f64 {
    50.0 / topics.max(1) as f64
}
