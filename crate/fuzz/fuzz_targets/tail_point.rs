#![no_main]

use gibbs_dixmier::experiment::parse::parse_tail_point;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(x) = parse_tail_point(s) {
        assert!(!x.period().is_empty());
        let _ = x.prefix(x.preperiod().len() + 2 * x.period().len());
    }
});
