#![no_main]

use isa_core::footprint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = footprint::parse_summary_csv(text) {
        let _ = footprint::summary_csv(&rows, None);
    }
});
