#![no_main]

use codetopics::synth::GroundTruth;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = GroundTruth::from_json(data);
});
