#![no_main]

use libfuzzer_sys::fuzz_target;
use rebound_cli::range::{parse_range, RangeOutcome};

fuzz_target!(|input: (&str, u16)| {
    let (header, len) = input;
    let len = u64::from(len);
    if let RangeOutcome::Partial { start, end } = parse_range(header, len) {
        assert!(start <= end && end < len);
    }
});
