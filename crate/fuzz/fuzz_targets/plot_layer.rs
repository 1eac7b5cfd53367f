#![no_main]

use isa_core::plot::Layer;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(layer) = text.parse::<Layer>() {
        let _ = layer.file_stem();
    }
});
