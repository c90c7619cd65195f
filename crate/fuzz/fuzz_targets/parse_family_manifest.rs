#![no_main]

use krfactor::io::{parse_family_manifest, write_family_manifest, ParseLimits};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let limits = ParseLimits {
        max_vertices: 4096,
        max_family_graphs: 4096,
    };
    if let Ok(manifest) = parse_family_manifest(text, &limits) {
        let again = parse_family_manifest(&write_family_manifest(&manifest), &limits)
            .expect("written manifest parses");
        assert_eq!(again, manifest);
    }
});
