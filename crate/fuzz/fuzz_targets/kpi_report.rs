#![no_main]

use libfuzzer_sys::fuzz_target;
use vcd_core::eval::KpiReport;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = KpiReport::from_text(text) {
        let _ = KpiReport::from_text(&r.to_text());
    }
});
