#![no_main]

use isa_core::metadata;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(md) = metadata::parse_metadata(text) {
        let again = metadata::parse_metadata(&metadata::write_metadata_csv(&md, None)).unwrap();
        assert_eq!(again.instance_ids(), md.instance_ids());
        assert_eq!(again.features(), md.features());
        assert_eq!(again.performance(), md.performance());
    }
});
