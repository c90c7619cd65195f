#![no_main]

use krfactor::io::parse_transversal_certificate;
use krfactor::transversal::{verify_transversal, GraphFamily};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cert) = parse_transversal_certificate(text) {
        // The verifier must reject garbage without panicking.
        let family = GraphFamily::complete(3, 2).expect("valid shape");
        let _ = verify_transversal(&family, &cert.cliques, &cert.assignment);
    }
});
