#![no_main]

use libfuzzer_sys::fuzz_target;
use pencil_core::formats::{read_weyl_samples, write_weyl_samples};

fuzz_target!(|data: &[u8]| {
    if let Ok(samples) = read_weyl_samples(data) {
        let mut buf = Vec::new();
        write_weyl_samples(&mut buf, &samples).unwrap();
        let again = read_weyl_samples(buf.as_slice()).expect("re-read");
        assert_eq!(again.len(), samples.len());
    }
});
