//! Latent Dirichlet allocation fit by collapsed Gibbs sampling.
//!
//! Each patient mixes K topics with weights drawn from a symmetric
//! Dirichlet(`alpha`); each topic is a distribution over codes drawn from a
//! symmetric Dirichlet(`beta`). The sampler integrates both out and
//! resamples only the per-token topic assignments.

mod hyper;
mod model;
mod run;
mod state;


pub use hyper::{
    default_alpha, Hyperparameters, DEFAULT_BETA, DEFAULT_BURN_IN, DEFAULT_SAVED_SAMPLES, DEFAULT_THINNING,
};
pub use model::{ModelFile, TopicModel, LOAD_ROW_TOLERANCE, MODEL_FORMAT};
pub use run::{run, Progress};
pub use state::SamplerState;
