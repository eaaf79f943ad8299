#![no_main]

use libfuzzer_sys::fuzz_target;
use vcd_core::io::decode_wav;

fuzz_target!(|data: &[u8]| {
    let _ = decode_wav(data);
});
