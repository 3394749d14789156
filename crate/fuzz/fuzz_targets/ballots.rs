#![no_main]

use libfuzzer_sys::fuzz_target;
use rebound_core::formats::ballots;

fuzz_target!(|data: &str| {
    let _ = ballots::parse(data);
});
