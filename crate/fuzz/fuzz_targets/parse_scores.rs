#![no_main]

use libfuzzer_sys::fuzz_target;
use redactkit::corpus::{parse_score_map_csv, parse_score_map_json};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    // Accepted score maps must carry finite scores only.
    if let Ok(map) = parse_score_map_json(src) {
        assert!(map.values().all(|s| s.is_finite()));
    }
    if let Ok(map) = parse_score_map_csv(src) {
        assert!(map.values().all(|s| s.is_finite()));
    }
});
