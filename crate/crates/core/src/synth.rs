//! Synthetic corpora drawn from the LDA generative process with known
//! topics, and greedy matching of recovered topics back to that truth.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{build_matrix, EventLog, EventRecord, PatientConditionsCorpus, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::jsd;
use crate::random::{categorical, seeded, symmetric_dirichlet, RNG_ALGORITHM};

pub const GROUND_TRUTH_FORMAT: &str = "codetopics.ground_truth.v1";

/// Per-document token counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LengthDistribution {
    Fixed(u64),
    /// Gamma-Poisson mixture with the given mean; smaller dispersion means
    /// heavier overdispersion. Zero draws are redrawn.
    NegativeBinomial { mean: f64, dispersion: f64 },
}

impl LengthDistribution {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            LengthDistribution::Fixed(n) => n >= 1,
            LengthDistribution::NegativeBinomial { mean, dispersion } => {
                mean.is_finite() && mean > 0.0 && dispersion.is_finite() && dispersion > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid length distribution {self:?}")))
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            LengthDistribution::Fixed(n) => n,
            LengthDistribution::NegativeBinomial { mean, dispersion } => {
                let gamma = Gamma::new(dispersion, mean / dispersion).expect("validated");
                loop {
                    let rate: f64 = gamma.sample(rng);
                    if rate.is_nan() || rate <= 0.0 {
                        continue;
                    }
                    let n: f64 = Poisson::new(rate).expect("positive rate").sample(rng);
                    if n >= 1.0 {
                        return n as u64;
                    }
                }
            }
        }
    }
}

/// Settings for one synthetic corpus. Serialized inside config files and
/// ground-truth bundles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub topics: usize,
    pub codes: usize,
    pub documents: usize,
    /// Dirichlet concentration of each true topic's code distribution.
    pub topic_concentration: f64,
    /// Dirichlet concentration of each document's topic mixture.
    pub doc_alpha: f64,
    pub mean_length: f64,
    /// Negative-binomial dispersion; absent means every document has
    /// exactly `mean_length` tokens.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_dispersion: Option<f64>,
    pub seed: u64,
    pub rng: String,
}

fn rng_name() -> String {
    RNG_ALGORITHM.to_owned()
}

impl Default for GeneratorConfig {
    /// Desk-scale preset: five sparse topics over 50 codes, 2,000 documents
    /// of about 100 tokens.
    fn default() -> Self {
        Self {
            topics: 5,
            codes: 50,
            documents: 2_000,
            topic_concentration: 0.05,
            doc_alpha: 0.5,
            mean_length: 100.0,
            length_dispersion: Some(5.0),
            seed: 20_160_601,
            rng: rng_name(),
        }
    }
}

impl GeneratorConfig {
    pub fn length_distribution(&self) -> LengthDistribution {
        match self.length_dispersion {
            Some(dispersion) => LengthDistribution::NegativeBinomial {
                mean: self.mean_length,
                dispersion,
            },
            None => LengthDistribution::Fixed(self.mean_length.round().max(0.0) as u64),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synth: {m}")));
        if self.topics < 1 {
            return bad("topics must be at least 1");
        }
        if self.codes < 2 {
            return bad("codes must be at least 2");
        }
        if self.documents < 1 {
            return bad("documents must be at least 1");
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.topic_concentration) || !positive(self.doc_alpha) {
            return bad("concentrations must be positive");
        }
        if self.rng != RNG_ALGORITHM {
            return bad("unsupported rng");
        }
        self.length_distribution()
            .validate()
            .map_err(|e| Error::Config(format!("synth: {e}")))
    }

    fn corpus_seed(&self) -> u64 {
        self.seed ^ 0x9e37_79b9_7f4a_7c15
    }
}

/// Code name for vocabulary index `w`, zero-padded so that string order
/// equals index order.
pub fn code_name(w: usize, v: usize) -> String {
    let width = v.saturating_sub(1).to_string().len();
    format!("w{w:0width$}")
}

pub fn patient_name(d: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len().max(4);
    format!("pt{d:0width$}")
}

/// `k` topics over `v` codes, each row an independent symmetric
/// Dirichlet(`concentration`) draw.
pub fn make_ground_truth_topics(k: usize, v: usize, concentration: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    if k < 1 || v < 2 {
        return Err(Error::InvalidArgument(format!("need k >= 1 and v >= 2, got k={k}, v={v}")));
    }
    if !(concentration.is_finite() && concentration > 0.0) {
        return Err(Error::InvalidArgument(format!("concentration {concentration} must be positive")));
    }
    let mut rng = seeded(seed);
    Ok((0..k).map(|_| symmetric_dirichlet(&mut rng, concentration, v)).collect())
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub events: EventLog,
    pub corpus: PatientConditionsCorpus,
    /// True topic mixture per generated document, in generation order.
    pub theta_star: Vec<Vec<f64>>,
}

/// Runs the generative process: per document a topic mixture from
/// Dirichlet(`alpha`) and a length, then per token a topic from the mixture
/// and a code from that topic.
pub fn generate_corpus(
    phi_star: &[Vec<f64>],
    d: usize,
    alpha: f64,
    length: LengthDistribution,
    seed: u64,
) -> Result<SyntheticCorpus> {
    if d < 1 {
        return Err(Error::InvalidArgument("need at least one document".into()));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} must be positive")));
    }
    length.validate()?;
    let k = phi_star.len();
    let v = phi_star.first().map_or(0, Vec::len);
    if k == 0 || v < 2 || phi_star.iter().any(|r| r.len() != v) {
        return Err(Error::InvalidArgument("phi_star must be a non-empty K×V matrix with V >= 2".into()));
    }

    let mut rng = seeded(seed);
    let mut events = EventLog::new();
    let mut theta_star = Vec::with_capacity(d);
    let mut counts = vec![0u64; v];
    for doc in 0..d {
        let theta = symmetric_dirichlet(&mut rng, alpha, k);
        let n = length.sample(&mut rng);
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..n {
            let t = categorical(&mut rng, &theta);
            counts[categorical(&mut rng, &phi_star[t])] += 1;
        }
        let patient = patient_name(doc, d);
        for (w, &c) in counts.iter().enumerate() {
            if c > 0 {
                events.push(EventRecord::new(patient.clone(), code_name(w, v), c))?;
            }
        }
        theta_star.push(theta);
    }
    let vocab = Vocabulary::build(&events, 1.0)?;
    let (corpus, _) = build_matrix(&events, &vocab)?;
    Ok(SyntheticCorpus {
        events,
        corpus,
        theta_star,
    })
}

/// Known topics, the mixtures that generated each document, and the
/// settings used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    pub format: String,
    pub generator: GeneratorConfig,
    /// Column labels of `phi_star`.
    pub codes: Vec<String>,
    pub phi_star: Vec<Vec<f64>>,
    pub patient_ids: Vec<String>,
    pub theta_star: Vec<Vec<f64>>,
}

impl GroundTruth {
    /// Generates topics and a corpus from one config.
    pub fn generate(config: &GeneratorConfig) -> Result<(Self, SyntheticCorpus)> {
        config.validate()?;
        let phi_star = make_ground_truth_topics(config.topics, config.codes, config.topic_concentration, config.seed)?;
        let synthetic = generate_corpus(
            &phi_star,
            config.documents,
            config.doc_alpha,
            config.length_distribution(),
            config.corpus_seed(),
        )?;
        let truth = GroundTruth {
            format: GROUND_TRUTH_FORMAT.to_owned(),
            generator: config.clone(),
            codes: (0..config.codes).map(|w| code_name(w, config.codes)).collect(),
            phi_star,
            patient_ids: (0..config.documents).map(|d| patient_name(d, config.documents)).collect(),
            theta_star: synthetic.theta_star.clone(),
        };
        Ok((truth, synthetic))
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let truth: GroundTruth = serde_json::from_slice(bytes)?;
        let bad = |r: &str| Error::artifact("ground truth", r);
        if truth.format != GROUND_TRUTH_FORMAT {
            return Err(bad("unknown format"));
        }
        let v = truth.codes.len();
        if truth.phi_star.is_empty() || truth.phi_star.iter().any(|r| r.len() != v) {
            return Err(bad("phi_star shape does not match codes"));
        }
        if truth.theta_star.len() != truth.patient_ids.len()
            || truth.theta_star.iter().any(|r| r.len() != truth.phi_star.len())
        {
            return Err(bad("theta_star shape does not match"));
        }
        Ok(truth)
    }
}

/// Reorders the columns of `phi` from `codes` into `target_codes` order.
/// Target codes missing from `codes` get probability 0.
pub fn align_columns(phi: &[Vec<f64>], codes: &[String], target_codes: &[String]) -> Result<Vec<Vec<f64>>> {
    let position: std::collections::HashMap<&str, usize> =
        target_codes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mapping = codes
        .iter()
        .map(|c| {
            position
                .get(c.as_str())
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("code {c:?} not among target codes")))
        })
        .collect::<Result<Vec<_>>>()?;
    phi.iter()
        .map(|row| {
            if row.len() != codes.len() {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: codes.len(),
                });
            }
            let mut out = vec![0.0; target_codes.len()];
            for (&p, &j) in row.iter().zip(&mapping) {
                out[j] = p;
            }
            Ok(out)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicMatching {
    /// `(recovered topic, true topic)` pairs in the order they were matched.
    pub assignment: Vec<(usize, usize)>,
    pub per_pair_jsd: Vec<f64>,
    pub mean_matched_jsd: f64,
}

impl TopicMatching {
    pub fn max_matched_jsd(&self) -> f64 {
        self.per_pair_jsd.iter().copied().fold(0.0, f64::max)
    }

    pub fn truth_for(&self, recovered: usize) -> Option<usize> {
        self.assignment.iter().find(|p| p.0 == recovered).map(|p| p.1)
    }
}

/// Greedy matching: repeatedly takes the globally cheapest unmatched
/// (recovered, true) pair under JSD until one side runs out. Ties go to the
/// lowest (recovered, true) index pair.
pub fn match_topics(phi_hat: &[Vec<f64>], phi_star: &[Vec<f64>]) -> Result<TopicMatching> {
    let v_hat = phi_hat.first().map_or(0, Vec::len);
    let v_star = phi_star.first().map_or(0, Vec::len);
    if v_hat != v_star {
        return Err(Error::LengthMismatch {
            left: v_hat,
            right: v_star,
        });
    }
    let mut cost = Vec::with_capacity(phi_hat.len() * phi_star.len());
    for (i, h) in phi_hat.iter().enumerate() {
        for (j, s) in phi_star.iter().enumerate() {
            cost.push((jsd(h, s)?, i, j));
        }
    }
    cost.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut hat_used = vec![false; phi_hat.len()];
    let mut star_used = vec![false; phi_star.len()];
    let mut assignment = Vec::new();
    let mut per_pair_jsd = Vec::new();
    let pairs = phi_hat.len().min(phi_star.len());
    for (c, i, j) in cost {
        if assignment.len() == pairs {
            break;
        }
        if hat_used[i] || star_used[j] {
            continue;
        }
        hat_used[i] = true;
        star_used[j] = true;
        assignment.push((i, j));
        per_pair_jsd.push(c);
    }
    let mean_matched_jsd = if per_pair_jsd.is_empty() {
        0.0
    } else {
        per_pair_jsd.iter().sum::<f64>() / per_pair_jsd.len() as f64
    };
    Ok(TopicMatching {
        assignment,
        per_pair_jsd,
        mean_matched_jsd,
    })
}
