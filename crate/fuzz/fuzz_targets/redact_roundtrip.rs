#![no_main]

use arbitrary::Arbitrary;
use libfuzzer_sys::fuzz_target;
use redactkit::model::{AnnotatedDocument, Document, EntityLabel, EntitySpan};
use redactkit::redact::{build_policy, redact_document, PolicyMode, RemapMode};

#[derive(Debug, Arbitrary)]
struct Input {
    text: String,
    cuts: Vec<(u8, u8, u8)>,
    label_mask: u16,
}

fuzz_target!(|input: Input| {
    let n = input.text.chars().count();

    // Turn the raw cut list into disjoint ascending spans over the text.
    let mut spans = Vec::new();
    let mut pos = 0usize;
    for &(skip, len, label) in &input.cuts {
        let start = pos + skip as usize;
        let end = start + 1 + len as usize;
        if end > n {
            break;
        }
        let label = EntityLabel::ALL[label as usize % EntityLabel::ALL.len()];
        spans.push(
            EntitySpan::over("fuzz", &input.text, start, end, label)
                .expect("constructed spans are in range"),
        );
        pos = end;
    }

    let labels = EntityLabel::ALL
        .into_iter()
        .enumerate()
        .filter(|(i, _)| input.label_mask & (1 << i) != 0)
        .map(|(_, l)| l)
        .collect();
    let policy = build_policy(&PolicyMode::Limited(labels));

    let doc = AnnotatedDocument::new(Document::new("fuzz", input.text.clone()), spans)
        .expect("spans fit the text");
    let red = redact_document(&doc, &policy).expect("disjoint spans always redact");

    assert_eq!(red.map.orig_len, n);
    assert_eq!(red.map.new_len, red.text.chars().count());
    for offset in 0..=n {
        let mapped = red.map.remap(offset, RemapMode::Clamp).expect("clamp never fails");
        assert!(mapped <= red.map.new_len);
    }
});
