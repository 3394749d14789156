#![no_main]

use libfuzzer_sys::fuzz_target;
use rebound_core::formats::predictions;

fuzz_target!(|data: &str| {
    let _ = predictions::parse(data);
});
