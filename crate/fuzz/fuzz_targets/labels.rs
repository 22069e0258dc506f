#![no_main]

use libfuzzer_sys::fuzz_target;
use rankfit::{Indicator, UpConvention};

fuzz_target!(|data: &[u8]| {
    let raw = String::from_utf8_lossy(data);
    if let Ok(ind) = raw.parse::<Indicator>() {
        let back: Indicator = ind.to_string().parse().unwrap();
        assert_eq!(back, ind);
        assert!(!ind.slug().contains('/'));
    }
    if let Ok(conv) = raw.parse::<UpConvention>() {
        assert_eq!(conv.to_string().parse::<UpConvention>().unwrap(), conv);
    }
});
