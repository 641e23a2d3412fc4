use serde::{Deserialize, Serialize};

use super::hyper::Hyperparameters;
use crate::corpus::code_list_hash;
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "codetopics.model.v1";

/// Row-sum tolerance applied when loading models written by other tools.
pub const LOAD_ROW_TOLERANCE: f64 = 1e-6;

/// Fitted topic-code (`phi`, K×V) and patient-topic (`theta`, D×K)
/// distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub hyper: Hyperparameters,
    /// Vocabulary codes in column order of `phi`.
    pub codes: Vec<String>,
    pub phi: Vec<Vec<f64>>,
    /// Absent when loaded from a file written without theta.
    pub theta: Option<Vec<Vec<f64>>>,
    pub patient_ids: Vec<String>,
    pub n_samples_averaged: usize,
    pub corpus_fingerprint: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub hyperparameters: Hyperparameters,
    pub codes: Vec<String>,
    pub vocabulary_hash: String,
    pub corpus_fingerprint: String,
    pub n_samples_averaged: usize,
    pub phi: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patient_ids: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<Vec<f64>>>,
}

impl TopicModel {
    pub fn n_topics(&self) -> usize {
        self.phi.len()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.codes.len()
    }

    pub fn to_file(&self, include_theta: bool) -> ModelFile {
        let with_theta = include_theta && self.theta.is_some();
        ModelFile {
            format: MODEL_FORMAT.to_owned(),
            hyperparameters: self.hyper.clone(),
            codes: self.codes.clone(),
            vocabulary_hash: code_list_hash(&self.codes),
            corpus_fingerprint: self.corpus_fingerprint.clone(),
            n_samples_averaged: self.n_samples_averaged,
            phi: self.phi.clone(),
            patient_ids: with_theta.then(|| self.patient_ids.clone()),
            theta: if with_theta { self.theta.clone() } else { None },
        }
    }

    pub fn to_json(&self, include_theta: bool) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.to_file(include_theta))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let file: ModelFile = serde_json::from_slice(bytes)?;
        Self::from_file(file)
    }

    /// Validates a deserialized model file.
    pub fn from_file(file: ModelFile) -> Result<Self> {
        let bad = |r: String| Error::artifact("model", r);
        if file.format != MODEL_FORMAT {
            return Err(bad(format!("unknown format {:?}", file.format)));
        }
        file.hyperparameters.validate()?;
        let v = file.codes.len();
        if v == 0 {
            return Err(Error::EmptyVocabulary);
        }
        let mut seen = std::collections::HashSet::new();
        if file.codes.iter().any(|c| c.is_empty() || !seen.insert(c.as_str())) {
            return Err(bad("codes must be unique and non-empty".into()));
        }
        if code_list_hash(&file.codes) != file.vocabulary_hash {
            return Err(bad("vocabulary_hash does not match codes".into()));
        }
        let k = file.hyperparameters.topics;
        if file.phi.len() != k {
            return Err(bad(format!("{} phi rows for {k} topics", file.phi.len())));
        }
        for (t, row) in file.phi.iter().enumerate() {
            check_row(row, v).map_err(|r| bad(format!("phi row {t}: {r}")))?;
        }
        let patient_ids = match (&file.theta, file.patient_ids) {
            (Some(theta), Some(ids)) => {
                if theta.len() != ids.len() {
                    return Err(bad(format!("{} theta rows for {} patients", theta.len(), ids.len())));
                }
                for (d, row) in theta.iter().enumerate() {
                    check_row(row, k).map_err(|r| bad(format!("theta row {d}: {r}")))?;
                }
                ids
            }
            (None, None) => Vec::new(),
            _ => return Err(bad("theta and patient_ids must appear together".into())),
        };
        if file.n_samples_averaged == 0 {
            return Err(bad("n_samples_averaged must be positive".into()));
        }
        Ok(Self {
            hyper: file.hyperparameters,
            codes: file.codes,
            phi: file.phi,
            theta: file.theta,
            patient_ids,
            n_samples_averaged: file.n_samples_averaged,
            corpus_fingerprint: file.corpus_fingerprint,
        })
    }
}

fn check_row(row: &[f64], len: usize) -> std::result::Result<(), String> {
    if row.len() != len {
        return Err(format!("length {} != {len}", row.len()));
    }
    if let Some(x) = row.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(format!("entry {x} is not a probability"));
    }
    let s: f64 = row.iter().sum();
    if (s - 1.0).abs() > LOAD_ROW_TOLERANCE {
        return Err(format!("sums to {s}"));
    }
    Ok(())
}
