use rand::Rng;
use statrs::function::gamma::ln_gamma;

use super::hyper::Hyperparameters;
use crate::corpus::PatientConditionsCorpus;
use crate::error::{Error, Result};
use crate::random::{seeded, SeededRng};

/// Token-level topic assignments plus the sufficient statistics of a
/// collapsed Gibbs chain.
///
/// Tokens are laid out patient-major; within a patient, codes follow
/// vocabulary-index order with repeats consecutive. Sweeps visit tokens in
/// exactly that order.
#[derive(Debug, Clone)]
pub struct SamplerState {
    topics: usize,
    vocab_size: usize,
    alpha: f64,
    beta: f64,
    doc_offsets: Vec<usize>,
    words: Vec<u32>,
    z: Vec<u32>,
    // D×K, patient-major
    doc_topic: Vec<u32>,
    // V×K, code-major so one token's weights read a contiguous slice
    word_topic: Vec<u32>,
    topic_totals: Vec<u32>,
    sweeps: usize,
    rng: SeededRng,
    scratch: Vec<f64>,
}

impl SamplerState {
    /// Assigns every token a uniformly random topic from the seeded stream.
    pub fn init(corpus: &PatientConditionsCorpus, hyper: &Hyperparameters) -> Result<Self> {
        let topics = hyper.topics as u32;
        Self::build(corpus, hyper, |rng, _, _| rng.random_range(0..topics))
    }

    /// Builds a state from explicit assignments, one vector per patient in
    /// token order. The chain's generator is seeded from `hyper.seed`.
    pub fn from_assignments(
        corpus: &PatientConditionsCorpus,
        hyper: &Hyperparameters,
        assignments: &[Vec<u32>],
    ) -> Result<Self> {
        if assignments.len() != corpus.n_documents() {
            return Err(Error::LengthMismatch {
                left: assignments.len(),
                right: corpus.n_documents(),
            });
        }
        for (d, a) in assignments.iter().enumerate() {
            if a.len() as u64 != corpus.document_length(d) {
                return Err(Error::LengthMismatch {
                    left: a.len(),
                    right: corpus.document_length(d) as usize,
                });
            }
            if let Some(&t) = a.iter().find(|&&t| t as usize >= hyper.topics) {
                return Err(Error::IndexOutOfRange {
                    what: "topic",
                    index: t as usize,
                    len: hyper.topics,
                });
            }
        }
        Self::build(corpus, hyper, |_, d, j| assignments[d][j])
    }

    fn build(
        corpus: &PatientConditionsCorpus,
        hyper: &Hyperparameters,
        mut assign: impl FnMut(&mut SeededRng, usize, usize) -> u32,
    ) -> Result<Self> {
        hyper.validate()?;
        let d_count = corpus.n_documents();
        if d_count == 0 || corpus.total_tokens() == 0 {
            return Err(Error::EmptyCorpus);
        }
        let total = corpus.total_tokens();
        if total > u32::MAX as u64 {
            return Err(Error::InvalidArgument(format!(
                "{total} tokens exceed the 32-bit count range"
            )));
        }
        let k = hyper.topics;
        let v = corpus.vocabulary_size();
        if k as u64 > total {
            log::warn!("{k} topics for {total} tokens; some topics will stay empty");
        }

        let mut state = Self {
            topics: k,
            vocab_size: v,
            alpha: hyper.alpha,
            beta: hyper.beta,
            doc_offsets: Vec::with_capacity(d_count + 1),
            words: Vec::with_capacity(total as usize),
            z: Vec::with_capacity(total as usize),
            doc_topic: vec![0; d_count * k],
            word_topic: vec![0; v * k],
            topic_totals: vec![0; k],
            sweeps: 0,
            rng: seeded(hyper.seed),
            scratch: vec![0.0; k],
        };
        state.doc_offsets.push(0);
        for (d, row) in corpus.rows().enumerate() {
            let mut j = 0;
            for &(w, n) in row {
                for _ in 0..n {
                    let t = assign(&mut state.rng, d, j);
                    j += 1;
                    state.words.push(w);
                    state.z.push(t);
                    state.doc_topic[d * k + t as usize] += 1;
                    state.word_topic[w as usize * k + t as usize] += 1;
                    state.topic_totals[t as usize] += 1;
                }
            }
            state.doc_offsets.push(state.words.len());
        }
        Ok(state)
    }

    pub fn n_topics(&self) -> usize {
        self.topics
    }

    pub fn n_documents(&self) -> usize {
        self.doc_offsets.len() - 1
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocab_size
    }

    pub fn total_tokens(&self) -> usize {
        self.words.len()
    }

    pub fn sweep_index(&self) -> usize {
        self.sweeps
    }

    pub fn document_length(&self, d: usize) -> usize {
        self.doc_offsets[d + 1] - self.doc_offsets[d]
    }

    /// Vocabulary index of every token of patient `d`.
    pub fn document_codes(&self, d: usize) -> &[u32] {
        &self.words[self.doc_offsets[d]..self.doc_offsets[d + 1]]
    }

    /// Current topic of every token of patient `d`.
    pub fn assignments(&self, d: usize) -> &[u32] {
        &self.z[self.doc_offsets[d]..self.doc_offsets[d + 1]]
    }

    pub fn doc_topic_count(&self, d: usize, t: usize) -> u32 {
        self.doc_topic[d * self.topics + t]
    }

    pub fn topic_code_count(&self, t: usize, w: usize) -> u32 {
        self.word_topic[w * self.topics + t]
    }

    pub fn topic_count(&self, t: usize) -> u32 {
        self.topic_totals[t]
    }

    /// Full conditional of the topic of token `position` of patient
    /// `patient`, with that token removed from every count. `code` must be
    /// the token's vocabulary index.
    pub fn conditional_distribution(&self, patient: usize, position: usize, code: usize) -> Result<Vec<f64>> {
        let d_count = self.n_documents();
        if patient >= d_count {
            return Err(Error::IndexOutOfRange {
                what: "patient",
                index: patient,
                len: d_count,
            });
        }
        let len = self.document_length(patient);
        if position >= len {
            return Err(Error::IndexOutOfRange {
                what: "token position",
                index: position,
                len,
            });
        }
        if code >= self.vocab_size {
            return Err(Error::IndexOutOfRange {
                what: "code",
                index: code,
                len: self.vocab_size,
            });
        }
        let i = self.doc_offsets[patient] + position;
        if self.words[i] as usize != code {
            return Err(Error::InvalidArgument(format!(
                "token {position} of patient {patient} has code {}, not {code}",
                self.words[i]
            )));
        }
        let current = self.z[i] as usize;
        let k = self.topics;
        let vbeta = self.vocab_size as f64 * self.beta;
        let excl = |t: usize, n: u32| f64::from(n) - if t == current { 1.0 } else { 0.0 };
        let mut weights: Vec<f64> = (0..k)
            .map(|t| {
                let ndt = excl(t, self.doc_topic[patient * k + t]);
                let ntw = excl(t, self.word_topic[code * k + t]);
                let nt = excl(t, self.topic_totals[t]);
                (ndt + self.alpha) * (ntw + self.beta) / (nt + vbeta)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(weights)
    }

    /// Resamples every token once, in storage order, updating the count
    /// tables incrementally.
    pub fn sweep(&mut self) {
        let k = self.topics;
        let alpha = self.alpha;
        let beta = self.beta;
        let vbeta = self.vocab_size as f64 * beta;
        let Self {
            doc_offsets,
            words,
            z,
            doc_topic,
            word_topic,
            topic_totals,
            rng,
            scratch,
            ..
        } = self;

        for d in 0..doc_offsets.len() - 1 {
            let doc_row = d * k;
            for i in doc_offsets[d]..doc_offsets[d + 1] {
                let word_row = words[i] as usize * k;
                let old = z[i] as usize;
                doc_topic[doc_row + old] -= 1;
                word_topic[word_row + old] -= 1;
                topic_totals[old] -= 1;

                let ndt = &doc_topic[doc_row..doc_row + k];
                let nwt = &word_topic[word_row..word_row + k];
                let mut cumulative = 0.0;
                for t in 0..k {
                    cumulative += (f64::from(ndt[t]) + alpha) * (f64::from(nwt[t]) + beta)
                        / (f64::from(topic_totals[t]) + vbeta);
                    scratch[t] = cumulative;
                }
                let u = rng.random::<f64>() * cumulative;
                let new = scratch.partition_point(|&c| c <= u).min(k - 1);

                z[i] = new as u32;
                doc_topic[doc_row + new] += 1;
                word_topic[word_row + new] += 1;
                topic_totals[new] += 1;
            }
        }
        self.sweeps += 1;
        debug_assert!(self.check_consistency().is_ok(), "{:?}", self.check_consistency());
    }

    /// Cross-checks the three count tables against each other and against
    /// the patient lengths.
    pub fn check_consistency(&self) -> Result<()> {
        let k = self.topics;
        let fail = |m: String| Err(Error::Invariant(m));
        for d in 0..self.n_documents() {
            let row: u64 = self.doc_topic[d * k..(d + 1) * k].iter().map(|&n| u64::from(n)).sum();
            if row != self.document_length(d) as u64 {
                return fail(format!("patient {d}: topic counts sum to {row}"));
            }
        }
        for t in 0..k {
            let by_doc: u64 = (0..self.n_documents()).map(|d| u64::from(self.doc_topic[d * k + t])).sum();
            let by_word: u64 = (0..self.vocab_size).map(|w| u64::from(self.word_topic[w * k + t])).sum();
            let nt = u64::from(self.topic_totals[t]);
            if by_doc != nt || by_word != nt {
                return fail(format!("topic {t}: {by_doc} by patient, {by_word} by code, {nt} total"));
            }
        }
        let all: u64 = self.topic_totals.iter().map(|&n| u64::from(n)).sum();
        if all != self.words.len() as u64 {
            return fail(format!("topic totals sum to {all}, expected {}", self.words.len()));
        }
        Ok(())
    }

    /// Smoothed topic-code estimate `(n_tw + beta) / (n_t + V beta)`.
    pub fn estimate_phi(&self) -> Vec<Vec<f64>> {
        let vbeta = self.vocab_size as f64 * self.beta;
        (0..self.topics)
            .map(|t| {
                let denom = f64::from(self.topic_totals[t]) + vbeta;
                (0..self.vocab_size)
                    .map(|w| (f64::from(self.topic_code_count(t, w)) + self.beta) / denom)
                    .collect()
            })
            .collect()
    }

    /// Smoothed patient-topic estimate `(n_dt + alpha) / (N_d + K alpha)`.
    pub fn estimate_theta(&self) -> Vec<Vec<f64>> {
        let kalpha = self.topics as f64 * self.alpha;
        (0..self.n_documents())
            .map(|d| {
                let denom = self.document_length(d) as f64 + kalpha;
                self.doc_topic[d * self.topics..(d + 1) * self.topics]
                    .iter()
                    .map(|&n| (f64::from(n) + self.alpha) / denom)
                    .collect()
            })
            .collect()
    }

    /// Collapsed joint log-probability `log p(codes, z | alpha, beta)`.
    pub fn log_likelihood(&self) -> f64 {
        let k = self.topics;
        let v = self.vocab_size;
        let (alpha, beta) = (self.alpha, self.beta);

        let vbeta = v as f64 * beta;
        let mut ll = 0.0;
        for t in 0..k {
            // sum over codes of lnΓ(n + beta), relative to the all-zero baseline
            let mut occupied = 0.0;
            for w in 0..v {
                let n = self.word_topic[w * k + t];
                if n > 0 {
                    occupied += ln_gamma(f64::from(n) + beta) - ln_gamma(beta);
                }
            }
            ll += ln_gamma(vbeta) + occupied - ln_gamma(f64::from(self.topic_totals[t]) + vbeta);
        }

        let doc_norm = ln_gamma(k as f64 * alpha) - k as f64 * ln_gamma(alpha);
        for d in 0..self.n_documents() {
            ll += doc_norm;
            for &n in &self.doc_topic[d * k..(d + 1) * k] {
                ll += ln_gamma(f64::from(n) + alpha);
            }
            ll -= ln_gamma(self.document_length(d) as f64 + k as f64 * alpha);
        }
        ll
    }
}
