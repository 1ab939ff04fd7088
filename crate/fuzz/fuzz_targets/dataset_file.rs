#![no_main]

use libfuzzer_sys::fuzz_target;
use phaseret::datasets::{parse_spectral_str, write_spectral_string};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = parse_spectral_str(text) {
        let again = parse_spectral_str(&write_spectral_string(&d)).expect("rendered dataset parses");
        assert_eq!(again.omegas(), d.omegas());
        assert_eq!(again.len(), d.len());
    }
});
