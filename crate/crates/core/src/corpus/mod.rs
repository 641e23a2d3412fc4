//! Event-log ingestion, frequency-truncated vocabularies and the sparse
//! patient × code count matrix.

mod events;
mod matrix;
mod vocabulary;

pub use events::{ingest_events, ingest_path, EventFormat, EventLog, EventRecord, IngestReport};
pub use matrix::{build_matrix, CorpusFile, CorpusStats, FilterTally, PatientConditionsCorpus, SparseRow};
pub use vocabulary::{code_list_hash, Vocabulary, VocabularyFile};
