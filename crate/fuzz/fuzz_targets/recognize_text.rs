#![no_main]

use libfuzzer_sys::fuzz_target;
use redactkit::model::Document;
use redactkit::recognize::{recognize_patterns, resolve_overlaps, RecognizerConfig};

fuzz_target!(|text: &str| {
    let doc = Document::new("fuzz", text);
    let n = doc.char_len();
    let cfg = RecognizerConfig::default();
    let spans = recognize_patterns(&doc, &cfg);
    for s in &spans {
        assert!(s.start < s.end && s.end <= n, "span out of range");
        assert!(!s.surface.is_empty(), "span with empty surface");
    }
    // Raw matches of different classes may overlap; the resolved set never does.
    let resolved = resolve_overlaps(&spans, &cfg.label_priority);
    for w in resolved.windows(2) {
        assert!(w[0].end <= w[1].start, "resolved spans overlap");
    }
});
