#![no_main]

use libfuzzer_sys::fuzz_target;
use rebound_cli::config::FileConfig;
use rebound_core::postprocess::PostProcessConfig;
use rebound_core::sampling::SamplingConfig;
use rebound_core::sim::SimConfig;

fuzz_target!(|data: &str| {
    let Ok(cfg) = FileConfig::parse(data) else { return };
    let _ = cfg.layer("sim", SimConfig::default());
    let _ = cfg.layer("sampling", SamplingConfig::default());
    let _ = cfg.layer("postprocess", PostProcessConfig::default());
});
