#![no_main]

use isa_core::prep::PrepReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(report) = serde_json::from_str::<PrepReport>(text) else {
        return;
    };
    for f in &report.features {
        let _ = report.transform_value(&f.name, 1.0);
    }
});
