#![no_main]

use libfuzzer_sys::fuzz_target;
use rankfit::report::{parse_fit_report_csv, write_fit_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(report) = parse_fit_report_csv(data) {
        let mut out = Vec::new();
        write_fit_csv(&report, &mut out).unwrap();
        // writing is lossy (fixed decimals) but must stay parseable
        parse_fit_report_csv(out.as_slice()).unwrap();
    }
});
