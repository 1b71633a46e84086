#![no_main]

use libfuzzer_sys::fuzz_target;
use vod_core::io::parse_vertex_json;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_vertex_json(text);
    }
});
