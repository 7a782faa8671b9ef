#![no_main]

use libfuzzer_sys::fuzz_target;
use pencil_core::formats::{parse_problem, problem_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for allow in [false, true] {
        if let Ok(p) = parse_problem(text, allow) {
            // accepted problems survive a round trip
            let again = parse_problem(&problem_to_json(&p), allow).expect("round trip");
            assert_eq!(again, p);
        }
    }
});
