#![no_main]

use libfuzzer_sys::fuzz_target;
use vcd_core::asd::AdaBoostModel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = AdaBoostModel::from_text(text) {
        let _ = m.score(&vec![0.0; m.feature_dim]);
        assert_eq!(AdaBoostModel::from_text(&m.to_text()).expect("round trip"), m);
    }
});
