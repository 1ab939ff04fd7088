#![no_main]

use libfuzzer_sys::fuzz_target;
use phaseret::harness::{render_svg, ResultsTable};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = ResultsTable::from_csv_str(text) {
        let _ = render_svg(&table);
    }
});
