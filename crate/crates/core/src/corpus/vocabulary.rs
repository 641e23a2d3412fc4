use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::events::EventLog;
use crate::error::{Error, Result};

/// Retained codes ordered by descending corpus frequency, ties broken by
/// code string.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    codes: Vec<String>,
    frequencies: Vec<u64>,
    index_of: HashMap<String, usize>,
    coverage_requested: f64,
    coverage_achieved: f64,
    total_occurrences: u64,
}

/// On-disk form of a [`Vocabulary`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabularyFile {
    pub codes: Vec<String>,
    pub frequencies: Vec<u64>,
    pub coverage_requested: f64,
    pub coverage_achieved: f64,
    pub total_occurrences: u64,
}

impl Vocabulary {
    /// Keeps the smallest frequency-descending prefix of codes whose share of
    /// all occurrences reaches `coverage`.
    pub fn build(log: &EventLog, coverage: f64) -> Result<Self> {
        if !(coverage > 0.0 && coverage <= 1.0) {
            return Err(Error::InvalidCoverage(coverage));
        }
        if log.is_empty() {
            return Err(Error::EmptyEventLog);
        }
        let mut ranked = log.code_frequencies();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

        let total = log.total_occurrences();
        let mut cumulative = 0u64;
        let mut keep = ranked.len();
        for (i, &(_, f)) in ranked.iter().enumerate() {
            cumulative += f;
            // slack for decimal thresholds such as 0.8 that have no exact binary form
            let reached = if coverage >= 1.0 {
                cumulative == total
            } else {
                cumulative as f64 / total as f64 + 1e-12 >= coverage
            };
            if reached {
                keep = i + 1;
                break;
            }
        }
        ranked.truncate(keep);
        let covered: u64 = ranked.iter().map(|r| r.1).sum();
        let (codes, frequencies): (Vec<String>, Vec<u64>) =
            ranked.into_iter().map(|(c, f)| (c.to_owned(), f)).unzip();
        Ok(Self::assemble(
            codes,
            frequencies,
            coverage,
            covered as f64 / total as f64,
            total,
        ))
    }

    fn assemble(
        codes: Vec<String>,
        frequencies: Vec<u64>,
        coverage_requested: f64,
        coverage_achieved: f64,
        total_occurrences: u64,
    ) -> Self {
        let index_of = codes.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Self {
            codes,
            frequencies,
            index_of,
            coverage_requested,
            coverage_achieved,
            total_occurrences,
        }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn code(&self, index: usize) -> Option<&str> {
        self.codes.get(index).map(String::as_str)
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.index_of.get(code).copied()
    }

    pub fn frequency_of(&self, code: &str) -> Option<u64> {
        self.index_of(code).map(|i| self.frequencies[i])
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.frequencies
    }

    pub fn coverage_requested(&self) -> f64 {
        self.coverage_requested
    }

    pub fn coverage_achieved(&self) -> f64 {
        self.coverage_achieved
    }

    pub fn total_occurrences(&self) -> u64 {
        self.total_occurrences
    }

    /// SHA-256 over the ordered code list, newline-separated.
    pub fn code_list_hash(&self) -> String {
        code_list_hash(&self.codes)
    }

    pub fn to_file(&self) -> VocabularyFile {
        VocabularyFile {
            codes: self.codes.clone(),
            frequencies: self.frequencies.clone(),
            coverage_requested: self.coverage_requested,
            coverage_achieved: self.coverage_achieved,
            total_occurrences: self.total_occurrences,
        }
    }

    /// Validates and rebuilds a vocabulary from its serialized form.
    pub fn from_file(file: VocabularyFile) -> Result<Self> {
        let bad = |r: String| Error::artifact("vocabulary", r);
        if file.codes.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if file.codes.len() != file.frequencies.len() {
            return Err(bad(format!(
                "{} codes but {} frequencies",
                file.codes.len(),
                file.frequencies.len()
            )));
        }
        if file.codes.iter().any(String::is_empty) {
            return Err(bad("empty code".into()));
        }
        for i in 1..file.codes.len() {
            let (fa, fb) = (file.frequencies[i - 1], file.frequencies[i]);
            if fa < fb || (fa == fb && file.codes[i - 1] >= file.codes[i]) {
                return Err(bad(format!("codes out of order at position {i}")));
            }
        }
        let covered = file
            .frequencies
            .iter()
            .try_fold(0u64, |acc, &f| acc.checked_add(f))
            .ok_or_else(|| bad("frequency overflow".into()))?;
        if covered > file.total_occurrences || file.frequencies.contains(&0) {
            return Err(bad("frequencies inconsistent with total_occurrences".into()));
        }
        let valid_fraction = |x: f64| x > 0.0 && x <= 1.0;
        if !valid_fraction(file.coverage_requested) || !valid_fraction(file.coverage_achieved) {
            return Err(bad("coverage outside (0, 1]".into()));
        }
        Ok(Self::assemble(
            file.codes,
            file.frequencies,
            file.coverage_requested,
            file.coverage_achieved,
            file.total_occurrences,
        ))
    }
}

pub fn code_list_hash(codes: &[String]) -> String {
    let mut h = Sha256::new();
    for c in codes {
        h.update(c.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}
