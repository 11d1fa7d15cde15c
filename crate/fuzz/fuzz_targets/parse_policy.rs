#![no_main]

use libfuzzer_sys::fuzz_target;
use redactkit::recognize::ConfigFormat;
use redactkit::redact::parse_policy_file;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    // Accepted policies must be internally consistent.
    if let Ok(policy) = parse_policy_file(src, ConfigFormat::Toml) {
        policy.validate().expect("parsed policies validate");
    }
    if let Ok(policy) = parse_policy_file(src, ConfigFormat::Json) {
        policy.validate().expect("parsed policies validate");
    }
});
