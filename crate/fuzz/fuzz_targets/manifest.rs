#![no_main]

use libfuzzer_sys::fuzz_target;
use rebound_core::formats::manifest;

fuzz_target!(|data: &str| {
    if let Ok(m) = manifest::parse(data) {
        // Whatever parses must survive a round trip.
        let again = manifest::parse(&manifest::render(&m)).expect("rendered manifest parses");
        assert_eq!(again, m);
    }
});
