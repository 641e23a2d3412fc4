use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::events::EventLog;
use super::vocabulary::{Vocabulary, VocabularyFile};
use crate::error::{Error, Result};

/// One patient's sparse row: `(vocabulary index, count)` sorted by index.
pub type SparseRow = Vec<(u32, u32)>;

/// Sparse D×V matrix of per-patient code counts over a fixed vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientConditionsCorpus {
    patient_ids: Vec<String>,
    vocabulary: Vocabulary,
    rows: Vec<SparseRow>,
    row_totals: Vec<u64>,
}

/// What [`build_matrix`] filtered out.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FilterTally {
    pub dropped_patients: usize,
    pub dropped_tokens: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub vocabulary_size: usize,
    pub total_tokens: u64,
    pub mean_length: f64,
    pub min_length: u64,
    pub max_length: u64,
    /// Fraction of D×V cells that are zero.
    pub sparsity: f64,
}

/// On-disk form: the vocabulary plus `[row, column, count]` triplets.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusFile {
    pub patient_ids: Vec<String>,
    pub vocabulary: VocabularyFile,
    pub triplets: Vec<[u64; 3]>,
}

/// Restricts the log to `vocab` and assembles the count matrix. Patients left
/// with no in-vocabulary code are dropped; row order follows first
/// appearance in the log.
pub fn build_matrix(
    log: &EventLog,
    vocab: &Vocabulary,
) -> Result<(PatientConditionsCorpus, FilterTally)> {
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let mut row_of = indexmap::IndexMap::<&str, SparseRow>::new();
    for p in log.patients() {
        row_of.insert(p, Vec::new());
    }
    let mut tally = FilterTally::default();
    for (patient, code, count) in log.records() {
        match vocab.index_of(code) {
            Some(w) => {
                let n = u32::try_from(count).map_err(|_| Error::CountOverflow {
                    patient: patient.to_owned(),
                    code: code.to_owned(),
                })?;
                row_of[patient].push((w as u32, n));
            }
            None => tally.dropped_tokens += count,
        }
    }

    let mut patient_ids = Vec::new();
    let mut rows = Vec::new();
    for (patient, mut row) in row_of {
        if row.is_empty() {
            tally.dropped_patients += 1;
            continue;
        }
        // the log already aggregated (patient, code) pairs, so indices are unique
        row.sort_unstable_by_key(|&(w, _)| w);
        patient_ids.push(patient.to_owned());
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if tally.dropped_patients > 0 {
        log::warn!(
            "dropped {} patients with no in-vocabulary codes",
            tally.dropped_patients
        );
    }
    Ok((
        PatientConditionsCorpus::assemble(patient_ids, vocab.clone(), rows),
        tally,
    ))
}

impl PatientConditionsCorpus {
    fn assemble(patient_ids: Vec<String>, vocabulary: Vocabulary, rows: Vec<SparseRow>) -> Self {
        let row_totals = rows
            .iter()
            .map(|r| r.iter().map(|&(_, n)| u64::from(n)).sum())
            .collect();
        Self {
            patient_ids,
            vocabulary,
            rows,
            row_totals,
        }
    }

    /// Builds a corpus from dense rows. All-zero rows are dropped.
    pub fn from_dense(
        patient_ids: Vec<String>,
        vocabulary: Vocabulary,
        dense: &[Vec<u32>],
    ) -> Result<Self> {
        if patient_ids.len() != dense.len() {
            return Err(Error::LengthMismatch {
                left: patient_ids.len(),
                right: dense.len(),
            });
        }
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for (id, row) in patient_ids.into_iter().zip(dense) {
            if row.len() != vocabulary.len() {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: vocabulary.len(),
                });
            }
            let sparse: SparseRow = row
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(w, &n)| (w as u32, n))
                .collect();
            if !sparse.is_empty() {
                ids.push(id);
                rows.push(sparse);
            }
        }
        if rows.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self::assemble(ids, vocabulary, rows))
    }

    pub fn n_documents(&self) -> usize {
        self.rows.len()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn patient_ids(&self) -> &[String] {
        &self.patient_ids
    }

    pub fn row(&self, d: usize) -> &[(u32, u32)] {
        &self.rows[d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[(u32, u32)]> {
        self.rows.iter().map(Vec::as_slice)
    }

    /// Token count `N_d` of patient `d`.
    pub fn document_length(&self, d: usize) -> u64 {
        self.row_totals[d]
    }

    pub fn total_tokens(&self) -> u64 {
        self.row_totals.iter().sum()
    }

    pub fn count(&self, d: usize, w: usize) -> u32 {
        self.rows[d]
            .binary_search_by_key(&(w as u32), |&(i, _)| i)
            .map_or(0, |i| self.rows[d][i].1)
    }

    /// Summary statistics, recomputed from the rows on every call.
    pub fn stats(&self) -> CorpusStats {
        let lengths: Vec<u64> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&(_, n)| u64::from(n)).sum())
            .collect();
        let total: u64 = lengths.iter().sum();
        let nonzero: usize = self.rows.iter().map(Vec::len).sum();
        let cells = self.rows.len() * self.vocabulary.len();
        CorpusStats {
            documents: self.rows.len(),
            vocabulary_size: self.vocabulary.len(),
            total_tokens: total,
            mean_length: total as f64 / lengths.len().max(1) as f64,
            min_length: lengths.iter().copied().min().unwrap_or(0),
            max_length: lengths.iter().copied().max().unwrap_or(0),
            sparsity: if cells == 0 {
                0.0
            } else {
                (cells - nonzero) as f64 / cells as f64
            },
        }
    }

    pub fn to_file(&self) -> CorpusFile {
        let triplets = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(d, r)| r.iter().map(move |&(w, n)| [d as u64, u64::from(w), u64::from(n)]))
            .collect();
        CorpusFile {
            patient_ids: self.patient_ids.clone(),
            vocabulary: self.vocabulary.to_file(),
            triplets,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    /// Parses and validates a serialized corpus.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let file: CorpusFile = serde_json::from_slice(bytes)?;
        Self::from_file(file)
    }

    pub fn from_file(file: CorpusFile) -> Result<Self> {
        let bad = |r: String| Error::artifact("corpus", r);
        let vocabulary = Vocabulary::from_file(file.vocabulary)?;
        let d = file.patient_ids.len();
        let v = vocabulary.len() as u64;
        let mut seen = std::collections::HashSet::new();
        if file.patient_ids.iter().any(|p| p.is_empty() || !seen.insert(p.as_str())) {
            return Err(bad("patient ids must be unique and non-empty".into()));
        }
        let mut rows: Vec<SparseRow> = vec![Vec::new(); d];
        for &[r, c, n] in &file.triplets {
            if r >= d as u64 || c >= v {
                return Err(bad(format!("triplet [{r}, {c}, {n}] out of range")));
            }
            let n = u32::try_from(n)
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| bad(format!("count {n} outside 1..=u32::MAX")))?;
            rows[r as usize].push((c as u32, n));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_unstable_by_key(|&(w, _)| w);
            if row.is_empty() {
                return Err(bad(format!("patient row {i} is empty")));
            }
            if row.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(bad(format!("duplicate cell in row {i}")));
            }
        }
        if rows.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self::assemble(file.patient_ids, vocabulary, rows))
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(&self.to_file()).expect("corpus serializes");
        hex::encode(Sha256::digest(&json))
    }
}
