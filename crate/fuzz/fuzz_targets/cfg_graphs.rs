#![no_main]

use isa_core::cfgfeat;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(g) = cfgfeat::parse_class_graphs(text) else {
        return;
    };
    if g.methods.iter().all(|m| m.node_count <= 64) {
        let _ = cfgfeat::class_features(&g.methods);
    }
});
