#![no_main]

use isa_core::boundary;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = boundary::parse_boundary_geojson(text);
});
