#![no_main]

use bregman_tda::io::{decode_diagram, encode_diagram};
use libfuzzer_sys::fuzz_target;

// Any diagram that decodes survives an encode/decode round trip unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(d) = decode_diagram(text) else { return };
    let again = decode_diagram(&encode_diagram(&d)).expect("encoded diagram decodes");
    assert_eq!(again, d);
});
