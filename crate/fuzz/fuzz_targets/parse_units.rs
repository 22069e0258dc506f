#![no_main]

use libfuzzer_sys::fuzz_target;
use rankfit::data::{build_series, derive_indicator, group_strata, parse_units};
use rankfit::Indicator;

fuzz_target!(|data: &[u8]| {
    let Ok(report) = parse_units(data) else {
        return;
    };
    for rec in &report.records {
        // accepted rows must satisfy their own validation
        assert!(rec.validate().is_ok());
        for ind in [Indicator::Population, Indicator::Lr, Indicator::SrWpr] {
            if let Ok(v) = derive_indicator(rec, &ind) {
                assert!(v.is_finite() && v >= 0.0);
            }
        }
    }
    let Some(year) = report.records.first().map(|r| r.year) else {
        return;
    };
    for ds in group_strata(&report.records, year, 1) {
        if let Ok(series) = build_series(&ds, &Indicator::Lr) {
            assert!(series.is_size_ordered());
        }
    }
});
