#![no_main]

use libfuzzer_sys::fuzz_target;
use optomech_core::InitKind;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(kind) = s.parse::<InitKind>() {
            // whatever parses must print back to an equal descriptor
            let again: InitKind = kind.to_string().parse().expect("display output parses");
            assert_eq!(kind, again);
        }
    }
});
