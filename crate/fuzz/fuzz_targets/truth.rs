#![no_main]

use libfuzzer_sys::fuzz_target;
use rebound_core::formats::truth;

fuzz_target!(|data: &str| {
    let _ = truth::parse(data);
});
