//! Seeded randomness shared by the sampler and the synthetic generator.
//!
//! Every stream is a ChaCha8 generator seeded from a `u64`, so results are
//! reproducible across platforms. The algorithm name is recorded in model
//! and config files as [`RNG_ALGORITHM`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

pub const RNG_ALGORITHM: &str = "chacha8";

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Samples from a symmetric Dirichlet of dimension `dim`.
///
/// Works in log space: for concentration below 1, `Gamma(a)` is drawn as
/// `Gamma(a + 1) * U^(1/a)`, which keeps tiny concentrations such as 0.05 from
/// underflowing every component to zero.
pub fn symmetric_dirichlet<R: Rng + ?Sized>(rng: &mut R, concentration: f64, dim: usize) -> Vec<f64> {
    assert!(concentration > 0.0 && dim > 0);
    let boosted = concentration < 1.0;
    let shape = if boosted { concentration + 1.0 } else { concentration };
    let gamma = Gamma::new(shape, 1.0).expect("positive shape");
    let mut logs: Vec<f64> = (0..dim)
        .map(|_| {
            let g: f64 = gamma.sample(rng);
            let mut lg = g.ln();
            if boosted {
                // open interval (0, 1] keeps ln finite
                let u: f64 = 1.0 - rng.random::<f64>();
                lg += u.ln() / concentration;
            }
            lg
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for l in &mut logs {
        *l = (*l - max).exp();
        total += *l;
    }
    for l in &mut logs {
        *l /= total;
    }
    logs
}

/// Draws an index with probability proportional to `weights`.
pub fn categorical<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    // round-off can leave u marginally above the last bucket
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}
