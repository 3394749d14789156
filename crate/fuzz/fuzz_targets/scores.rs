#![no_main]

use libfuzzer_sys::fuzz_target;
use rebound_core::formats::scores;

fuzz_target!(|data: &str| {
    let Ok(stream) = scores::parse(data, "v", 60.0, 1) else { return };
    for row in stream.scores() {
        assert!(row.iter().all(|p| p.is_finite()));
    }
});
