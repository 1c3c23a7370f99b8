#![no_main]

use bregman_tda::io::parse_csv;
use bregman_tda::GeneratorKind;
use libfuzzer_sys::fuzz_target;

const KINDS: [GeneratorKind; 4] = [
    GeneratorKind::SqEuclideanHalf,
    GeneratorKind::ShannonNegEntropy,
    GeneratorKind::BurgEntropy,
    GeneratorKind::Exponential,
];

// Accepted rows must be rectangular and finite; conversion may only fail on
// the domain.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(rows) = parse_csv(text) else { return };
    for kind in KINDS {
        match rows.clone().into_cloud(kind) {
            Ok((gen, cloud)) => assert!(cloud.iter().all(|p| gen.contains(p))),
            Err(e) => assert_eq!(e.kind(), "DomainViolation", "{e}"),
        }
    }
});
