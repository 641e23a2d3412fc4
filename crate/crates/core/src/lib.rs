//! Topic discovery in bag-of-codes corpora.
//!
//! A corpus is a patient × code count matrix built from a diagnosis event
//! log. [`sampler`] fits latent Dirichlet allocation to it by collapsed Gibbs
//! sampling, [`eval`] scores the fitted topics for tightness and
//! distinctiveness, and [`synth`] draws corpora from known topics so that
//! recovery can be checked end to end.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod random;
pub mod report;
pub mod sampler;
pub mod synth;

pub use error::{Error, ErrorClass, Result};
