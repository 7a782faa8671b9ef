#![no_main]

use libfuzzer_sys::fuzz_target;
use pencil_core::formats::parse_grid;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = parse_grid(text) {
        assert!(g.n > 0);
        if g.n <= 4096 {
            assert_eq!(g.points().len(), g.n);
        }
    }
});
