#![no_main]

use codetopics::corpus::PatientConditionsCorpus;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(corpus) = PatientConditionsCorpus::from_json(data) {
        let stats = corpus.stats();
        assert_eq!(stats.documents, corpus.n_documents());
        let json = corpus.to_json().unwrap();
        assert_eq!(PatientConditionsCorpus::from_json(json.as_bytes()).unwrap(), corpus);
    }
});
