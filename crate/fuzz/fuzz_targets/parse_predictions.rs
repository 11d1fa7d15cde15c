#![no_main]

use libfuzzer_sys::fuzz_target;
use redactkit::corpus::{
    parse_gold_line, parse_prediction_line, read_gold_labels, read_predictions,
};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    for line in src.lines() {
        let _ = parse_prediction_line(line);
        let _ = parse_gold_line(line);
    }
    let _ = read_predictions(data);
    let _ = read_gold_labels(data);
});
