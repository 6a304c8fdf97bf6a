#![no_main]

use libfuzzer_sys::fuzz_target;
use optomech_core::{parse_spectrum_csv, spectrum_to_csv, Error};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(spec) = parse_spectrum_csv(s) {
            // 12 significant digits can merge detunings closer than that
            match parse_spectrum_csv(&spectrum_to_csv(&spec)) {
                Ok(back) => assert_eq!(back.len(), spec.len()),
                Err(Error::Parse { reason, .. }) => assert!(reason.contains("increase"), "{reason}"),
                Err(e) => panic!("{e}"),
            }
        }
    }
});
