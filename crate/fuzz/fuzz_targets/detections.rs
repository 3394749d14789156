#![no_main]

use libfuzzer_sys::fuzz_target;
use rebound_core::formats::detections;

fuzz_target!(|data: &str| {
    let _ = detections::parse(data);
});
