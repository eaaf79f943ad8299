#![no_main]

use libfuzzer_sys::fuzz_target;
use vcd_core::io::parse_depth_text;
use vcd_core::vision::normalize_depth;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = parse_depth_text(text, 0.0) {
        if d.depths.len() <= 1 << 16 {
            let _ = normalize_depth(&d);
        }
    }
});
