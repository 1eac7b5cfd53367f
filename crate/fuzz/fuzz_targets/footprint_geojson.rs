#![no_main]

use isa_core::footprint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((fp, print)) = footprint::parse_footprint_geojson(text) {
        let (again, p2) = footprint::parse_footprint_geojson(&footprint::footprint_to_geojson(&fp, &print)).unwrap();
        assert_eq!(p2, print);
        assert_eq!(again.polygons, fp.polygons);
    }
});
