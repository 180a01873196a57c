#![no_main]

use gibbs_dixmier::experiment::parse::parse_index_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_index_list(s, 4096) {
        assert!(v.iter().all(|&i| i <= 4096));
    }
});
