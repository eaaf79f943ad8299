#![no_main]

use libfuzzer_sys::fuzz_target;
use vcd_core::sim::parse_scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // Whatever parses must survive its own canonical form.
    if let Ok(s) = parse_scenario(text) {
        let again = parse_scenario(&s.to_canonical()).expect("canonical scenario reparses");
        assert_eq!(again, s);
    }
});
