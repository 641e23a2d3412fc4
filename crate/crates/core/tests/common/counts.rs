//! Incrementally maintained count tables against a from-scratch recount.

use codetopics::corpus::{PatientConditionsCorpus, Vocabulary, VocabularyFile};
use codetopics::sampler::{run, Hyperparameters, SamplerState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vocabulary(v: usize) -> Vocabulary {
    Vocabulary::from_file(VocabularyFile {
        codes: (0..v).map(|w| format!("c{w}")).collect(),
        frequencies: vec![1; v],
        coverage_requested: 1.0,
        coverage_achieved: 1.0,
        total_occurrences: v as u64,
    })
    .unwrap()
}

/// Random corpus of at most 5 patients × 5 codes, every patient non-empty.
fn random_corpus(rng: &mut ChaCha8Rng) -> PatientConditionsCorpus {
    let d = rng.random_range(1..=5);
    let v = rng.random_range(1..=5);
    let dense: Vec<Vec<u32>> = (0..d)
        .map(|_| {
            let mut row: Vec<u32> = (0..v).map(|_| rng.random_range(0..4)).collect();
            if row.iter().all(|&c| c == 0) {
                row[rng.random_range(0..v)] = 1;
            }
            row
        })
        .collect();
    let ids = (0..d).map(|i| format!("p{i}")).collect();
    PatientConditionsCorpus::from_dense(ids, vocabulary(v), &dense).unwrap()
}

/// Recounts n_dt, n_tw and n_t from the assignment vector alone.
fn assert_tables_match(state: &SamplerState) {
    let (k, d, v) = (state.n_topics(), state.n_documents(), state.vocabulary_size());
    let mut n_dt = vec![vec![0u32; k]; d];
    let mut n_tw = vec![vec![0u32; v]; k];
    let mut n_t = vec![0u32; k];
    for doc in 0..d {
        for (&w, &t) in state.document_codes(doc).iter().zip(state.assignments(doc)) {
            n_dt[doc][t as usize] += 1;
            n_tw[t as usize][w as usize] += 1;
            n_t[t as usize] += 1;
        }
    }
    for t in 0..k {
        assert_eq!(state.topic_count(t), n_t[t], "n_t[{t}]");
        for (doc, row) in n_dt.iter().enumerate() {
            assert_eq!(state.doc_topic_count(doc, t), row[t], "n_dt[{doc}][{t}]");
        }
        for w in 0..v {
            assert_eq!(state.topic_code_count(t, w), n_tw[t][w], "n_tw[{t}][{w}]");
        }
    }
    assert_eq!(n_t.iter().map(|&n| n as usize).sum::<usize>(), state.total_tokens());
}

/// Runs `instances` random cases; returns how many sweeps were checked.
pub fn check_random_instances(instances: u64) -> usize {
    let mut checked = 0;
    for case in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(case);
        let corpus = random_corpus(&mut rng);
        let k = rng.random_range(1..=4);
        let hyper = Hyperparameters::new(k)
            .with_alpha(rng.random_range(0.05..2.0))
            .with_beta(rng.random_range(0.01..1.0))
            .with_seed(rng.random());
        let mut state = SamplerState::init(&corpus, &hyper).unwrap();
        assert_tables_match(&state);
        for _ in 0..20 {
            state.sweep();
            assert_tables_match(&state);
            checked += 1;
        }
        let model = run(&corpus, &hyper.clone().with_protocol(3, 4, 2), None).unwrap();
        for row in model.phi.iter().chain(model.theta.iter().flatten()) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }
    checked
}
