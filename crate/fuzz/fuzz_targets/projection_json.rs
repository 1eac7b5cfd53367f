#![no_main]

use isa_core::pilot::{project_point, Projection};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = Projection::from_json(text) {
        let _ = project_point(&p, &vec![0.5; p.n_features()]);
    }
});
