#![no_main]

use dstrust_core::bench::parse_curves;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_curves(text) {
        assert!(rows.iter().all(|r| r.trust.is_finite()));
    }
});
