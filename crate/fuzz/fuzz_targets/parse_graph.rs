#![no_main]

use krfactor::io::{parse_graph, write_graph, ParseLimits};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let limits = ParseLimits {
        max_vertices: 4096,
        ..ParseLimits::default()
    };
    if let Ok(g) = parse_graph(text, &limits) {
        let again = parse_graph(&write_graph(&g), &limits).expect("written graph parses");
        assert_eq!(again, g);
    }
});
