#![no_main]

use gibbs_dixmier::experiment::parse::parse_s_grid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = parse_s_grid(s) {
        assert!(!grid.is_empty());
        assert!(grid.iter().all(|&v| v > 1.0 && v.is_finite()));
    }
});
