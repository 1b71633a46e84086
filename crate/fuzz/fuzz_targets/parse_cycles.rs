#![no_main]

use libfuzzer_sys::fuzz_target;
use vod_core::io::{format_cycles, parse_cycles};

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    if let Ok(text) = std::str::from_utf8(rest) {
        let n = usize::from(n);
        if let Ok(p) = parse_cycles(text, n, 1) {
            assert_eq!(parse_cycles(&format_cycles(&p), n, 1).unwrap(), p);
        }
    }
});
