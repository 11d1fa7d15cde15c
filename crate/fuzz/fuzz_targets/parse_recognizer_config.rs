#![no_main]

use libfuzzer_sys::fuzz_target;
use redactkit::recognize::{parse_recognizer_config, ConfigFormat};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_recognizer_config(src, ConfigFormat::Toml);
    let _ = parse_recognizer_config(src, ConfigFormat::Json);
});
