#![no_main]

use codetopics::report::{render_table, topic_report};
use codetopics::sampler::TopicModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = TopicModel::from_json(data) {
        let json = model.to_json(model.theta.is_some()).unwrap();
        let again = TopicModel::from_json(json.as_bytes()).unwrap();
        assert_eq!(again.codes, model.codes);
        if let Ok(rows) = topic_report(&model, None, 3) {
            let _ = render_table(&rows);
        }
    }
});
