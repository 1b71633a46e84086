#![no_main]

use libfuzzer_sys::fuzz_target;
use vod_core::io::{parse_design_csv, write_design_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok((points, weights)) = parse_design_csv(text) {
            let again = parse_design_csv(&write_design_csv(&points, &weights)).unwrap();
            assert_eq!(again, (points, weights));
        }
    }
});
