#![no_main]

use libfuzzer_sys::fuzz_target;
use pencil_core::fixtures;
use pencil_core::formats::parse_family;
use pencil_core::inverse::ParameterFamily;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = parse_family(text) {
        if let Ok(fam) = ParameterFamily::new(spec.names, spec.bounds, fixtures::q_gamma()) {
            let mid: Vec<f64> = fam.bounds().iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect();
            let _ = fam.apply(&mid);
        }
    }
});
