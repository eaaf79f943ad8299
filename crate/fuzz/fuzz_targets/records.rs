#![no_main]

use libfuzzer_sys::fuzz_target;
use vcd_core::io::*;

// First byte picks the record format.
fuzz_target!(|data: &[u8]| {
    let Some((&kind, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    match kind % 5 {
        0 => {
            if let Ok(v) = parse_truth(text) {
                let _ = encode_truth(&v);
            }
        }
        1 => {
            if let Ok(v) = parse_predictions(text) {
                let _ = encode_predictions(&v);
            }
        }
        2 => {
            if let Ok(v) = parse_decisions(text) {
                let _ = encode_decisions(&v);
            }
        }
        3 => {
            if let Ok(v) = parse_annotations(text) {
                let _ = encode_annotations(&v);
            }
        }
        _ => {
            if let Ok(v) = parse_features(text) {
                let _ = encode_features(&v);
            }
        }
    }
});
