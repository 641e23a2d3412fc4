#![no_main]

use codetopics::corpus::{build_matrix, ingest_events, EventFormat, Vocabulary};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(log) = ingest_events(data, EventFormat::JsonLines) {
        if let Ok(vocab) = Vocabulary::build(&log, 1.0) {
            let (corpus, tally) = build_matrix(&log, &vocab).expect("full coverage keeps every patient");
            assert_eq!(tally.dropped_tokens, 0);
            assert_eq!(corpus.total_tokens(), log.total_occurrences());
        }
    }
});
