#![no_main]

use libfuzzer_sys::fuzz_target;
use pencil_core::formats::{read_golden, write_golden};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_golden(data) {
        let mut buf = Vec::new();
        if write_golden(&mut buf, &rows).is_ok() {
            assert_eq!(read_golden(buf.as_slice()).expect("re-read").len(), rows.len());
        }
    }
});
