#![no_main]

use isa_core::metadata;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = metadata::parse_feature_table(text) {
        assert!(t.rows.iter().all(|(_, v)| v.len() == t.feature_names.len()));
    }
});
