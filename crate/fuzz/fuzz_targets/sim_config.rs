#![no_main]

use dstrust_netsim::SimConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = SimConfig::from_toml(text) {
        cfg.validate().expect("accepted configs validate");
        let again = SimConfig::from_toml(&cfg.to_toml()).expect("round trip parses");
        assert_eq!(again, cfg);
    }
});
