#![no_main]

use condorcet::harness::RunTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = RunTable::read_csv(data) {
        let text = table.to_csv_string().unwrap();
        let again = RunTable::read_csv(text.as_bytes()).unwrap();
        assert_eq!(again.records.len(), table.records.len());
    }
});
