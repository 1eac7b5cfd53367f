#![no_main]

use isa_core::artifact;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = artifact::parse_coordinates(text) {
        let again = artifact::parse_coordinates(&artifact::write_coordinates(&c, None)).unwrap();
        assert_eq!(again, c);
    }
});
