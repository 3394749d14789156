#![no_main]

use libfuzzer_sys::fuzz_target;
use rebound_core::formats::clips;

fuzz_target!(|data: &str| {
    let _ = clips::parse(data);
});
