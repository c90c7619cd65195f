#![no_main]

use krfactor::io::{parse_instance_json, write_instance_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(inst) = parse_instance_json(text) {
        let again =
            parse_instance_json(&write_instance_json(&inst)).expect("written instance parses");
        assert_eq!(again.host, inst.host);
        assert_eq!(again.clusters, inst.clusters);
    }
});
