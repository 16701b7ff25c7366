#![no_main]

use dstrust_core::bench::{Attack, SweepConfig};
use dstrust_netsim::SimConfig;
use libfuzzer_sys::fuzz_target;

// One `key=value` per line, applied in order to both config kinds.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut sim = SimConfig::default();
    let mut sweep = SweepConfig::for_attack(Attack::Badmouth);
    for line in text.lines().take(16) {
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        if sim.apply_override(key, value).is_ok() {
            sim.validate().expect("override kept the config valid");
        }
        let _ = sweep.apply_override(key, value);
    }
});
