#![no_main]

use libfuzzer_sys::fuzz_target;
use redactkit::corpus::{parse_plain_line, read_corpus, CorpusFormat};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    for line in src.lines() {
        let _ = parse_plain_line(line);
    }
    let _ = read_corpus(data, CorpusFormat::Plain);
});
