#![no_main]

use libfuzzer_sys::fuzz_target;
use rebound_core::formats::splits;

fuzz_target!(|data: &str| {
    let _ = splits::parse(data);
});
