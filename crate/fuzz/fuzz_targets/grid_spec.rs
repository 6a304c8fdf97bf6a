#![no_main]

use libfuzzer_sys::fuzz_target;
use optomech_core::GridSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(spec) = s.parse::<GridSpec>() {
            // only build modest grids; huge counts are rejected, not allocated
            if (spec.max - spec.min) / spec.step < 1e5 {
                let _ = spec.build();
            }
        }
    }
});
