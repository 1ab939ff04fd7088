#![no_main]

use libfuzzer_sys::fuzz_target;
use phaseret::bpnn::Checkpoint;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ckpt) = Checkpoint::parse(text) {
        let again = Checkpoint::parse(&ckpt.to_text()).expect("rendered checkpoint parses");
        assert_eq!(again.to_text(), ckpt.to_text());
        let _ = ckpt.into_model();
    }
});
