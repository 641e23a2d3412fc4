#![no_main]

use codetopics::report::LabelMap;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = LabelMap::from_csv(data);
});
