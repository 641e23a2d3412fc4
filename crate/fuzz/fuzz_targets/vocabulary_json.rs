#![no_main]

use codetopics::corpus::{Vocabulary, VocabularyFile};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(file) = serde_json::from_slice::<VocabularyFile>(data) {
        if let Ok(vocab) = Vocabulary::from_file(file) {
            assert_eq!(Vocabulary::from_file(vocab.to_file()).unwrap(), vocab);
        }
    }
});
