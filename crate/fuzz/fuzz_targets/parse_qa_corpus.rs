#![no_main]

use libfuzzer_sys::fuzz_target;
use redactkit::corpus::{parse_qa_line, read_corpus, CorpusFormat};
use redactkit::model::validate_corpus;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    for line in src.lines() {
        let _ = parse_qa_line(line);
    }
    // Whatever parses must also survive the structural checks.
    if let Ok(records) = read_corpus(data, CorpusFormat::Qa) {
        let _ = validate_corpus(&records);
    }
});
