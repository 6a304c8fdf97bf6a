#![no_main]

use libfuzzer_sys::fuzz_target;
use optomech_cli::config::{ConfigFile, RunConfig};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cfg) = ConfigFile::parse(s) {
            let _ = RunConfig::resolve(&cfg, false);
            let _ = RunConfig::resolve(&cfg, true);
        }
    }
});
