#![no_main]

use libfuzzer_sys::fuzz_target;
use vcd_core::io::decode_pgm;

fuzz_target!(|data: &[u8]| {
    let _ = decode_pgm(data, 0.0);
});
