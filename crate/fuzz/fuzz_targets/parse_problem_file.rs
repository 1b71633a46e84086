#![no_main]

use libfuzzer_sys::fuzz_target;
use vod_core::io::parse_problem_file;

fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = parse_problem_file(text) {
            if spec.points.len() <= 16 {
                let _ = spec.into_model();
            }
        }
    }
});
