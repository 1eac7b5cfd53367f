#![no_main]

use isa_core::synth::{synth_metadata, SynthSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = SynthSpec::parse(text) else { return };
    if spec.n_instances() <= 2000 && spec.feature_names.len() <= 64 {
        let _ = synth_metadata(&spec, 0);
    }
});
