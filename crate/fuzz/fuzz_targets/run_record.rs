#![no_main]

use libfuzzer_sys::fuzz_target;
use rebound_cli::record::parse_record;

fuzz_target!(|data: &str| {
    let _ = parse_record(data);
});
