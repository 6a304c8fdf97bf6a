#![no_main]

use libfuzzer_sys::fuzz_target;
use optomech_cli::sweep::SweepSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(spec) = s.parse::<SweepSpec>() {
            assert!(!spec.values.is_empty());
        }
    }
});
