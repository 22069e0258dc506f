#![no_main]

use libfuzzer_sys::fuzz_target;
use rankfit::report::{parse_fit_report_json, write_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = parse_fit_report_json(text) {
        let mut out = Vec::new();
        write_json(&report, &mut out).unwrap();
        let again = parse_fit_report_json(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(again.rows.len(), report.rows.len());
    }
});
