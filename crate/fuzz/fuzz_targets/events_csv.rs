#![no_main]

use codetopics::corpus::{ingest_events, EventFormat, Vocabulary};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(log) = ingest_events(data, EventFormat::Csv) {
        assert!(!log.is_empty());
        let _ = Vocabulary::build(&log, 0.8);
    }
});
