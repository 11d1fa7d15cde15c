#![no_main]

use libfuzzer_sys::fuzz_target;
use redactkit::corpus::{parse_annotation_line, AnnotationSet};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    for line in src.lines() {
        let _ = parse_annotation_line(line);
    }
    let _ = AnnotationSet::read_from(data);
});
