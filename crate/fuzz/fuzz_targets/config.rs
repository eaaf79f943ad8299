#![no_main]

use libfuzzer_sys::fuzz_target;
use vcd_core::pipeline::PipelineConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = PipelineConfig::from_toml(text) {
        assert_eq!(PipelineConfig::from_toml(&c.to_toml()).expect("round trip"), c);
    }
});
