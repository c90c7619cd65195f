#![no_main]

use krfactor::io::parse_cliques;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cliques) = parse_cliques(text) {
        let written: String = cliques
            .iter()
            .filter(|c| !c.is_empty())
            .map(|c| {
                c.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
                    + "\n"
            })
            .collect();
        assert_eq!(
            parse_cliques(&written).expect("written cliques parse"),
            cliques
        );
    }
});
