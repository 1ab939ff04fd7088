#![no_main]

use libfuzzer_sys::fuzz_target;
use phaseret::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::from_toml_str(text) {
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).expect("rendered config parses");
        assert_eq!(again.train_sizes, cfg.train_sizes);
        assert_eq!(again.methods, cfg.methods);
    }
});
