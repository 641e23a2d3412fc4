use super::hyper::Hyperparameters;
use super::model::TopicModel;
use super::state::SamplerState;
use crate::corpus::PatientConditionsCorpus;
use crate::error::Result;

/// Receives `(sweep_index, log_likelihood)` after every `every`-th sweep.
pub struct Progress<'a> {
    pub every: usize,
    pub sink: &'a mut dyn FnMut(usize, f64),
}

/// Fits a model: `burn_in_sweeps` discarded sweeps, then one saved
/// `(phi, theta)` sample every `thinning_interval` sweeps until
/// `n_saved_samples` are collected. The returned estimate is the
/// element-wise mean of the saved samples with rows renormalized.
pub fn run(
    corpus: &PatientConditionsCorpus,
    hyper: &Hyperparameters,
    mut progress: Option<Progress<'_>>,
) -> Result<TopicModel> {
    let mut state = SamplerState::init(corpus, hyper)?;
    let mut report = |state: &SamplerState| {
        if let Some(p) = progress.as_mut() {
            if p.every > 0 && state.sweep_index().is_multiple_of(p.every) {
                (p.sink)(state.sweep_index(), state.log_likelihood());
            }
        }
    };

    for _ in 0..hyper.burn_in_sweeps {
        state.sweep();
        report(&state);
    }

    let k = hyper.topics;
    let v = corpus.vocabulary_size();
    let d = corpus.n_documents();
    let mut phi_sum = vec![vec![0.0; v]; k];
    let mut theta_sum = vec![vec![0.0; k]; d];
    for _ in 0..hyper.n_saved_samples {
        for _ in 0..hyper.thinning_interval {
            state.sweep();
            report(&state);
        }
        accumulate(&mut phi_sum, &state.estimate_phi());
        accumulate(&mut theta_sum, &state.estimate_theta());
    }

    Ok(TopicModel {
        hyper: hyper.clone(),
        codes: corpus.vocabulary().codes().to_vec(),
        phi: normalize_rows(phi_sum),
        theta: Some(normalize_rows(theta_sum)),
        patient_ids: corpus.patient_ids().to_vec(),
        n_samples_averaged: hyper.n_saved_samples,
        corpus_fingerprint: corpus.fingerprint(),
    })
}

fn accumulate(acc: &mut [Vec<f64>], sample: &[Vec<f64>]) {
    for (a, s) in acc.iter_mut().zip(sample) {
        for (x, y) in a.iter_mut().zip(s) {
            *x += y;
        }
    }
}

fn normalize_rows(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for row in &mut rows {
        let s: f64 = row.iter().sum();
        for x in row.iter_mut() {
            *x /= s;
        }
    }
    rows
}
