#![no_main]

use condorcet::env::GapMatrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = GapMatrix::from_json(text) {
        let report = m.validate();
        assert!(report.skew_symmetric && report.in_range);
        let again = GapMatrix::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(again, m);
    }
});
