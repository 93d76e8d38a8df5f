#![no_main]

use libfuzzer_sys::fuzz_target;
use nca_core::hybridization::parse_tabulated;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = parse_tabulated(text, "fuzz") {
        let again = parse_tabulated(&table.to_csv_string(), "fuzz").expect("printed table parses");
        assert_eq!(again.steps(), table.steps());
    }
});
