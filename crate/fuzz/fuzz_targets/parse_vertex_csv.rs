#![no_main]

use libfuzzer_sys::fuzz_target;
use vod_core::io::{parse_vertex_csv, write_vertex_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(vertices) = parse_vertex_csv(text) {
            assert_eq!(parse_vertex_csv(&write_vertex_csv(&vertices)).unwrap(), vertices);
        }
    }
});
