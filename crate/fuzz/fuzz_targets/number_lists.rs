#![no_main]

use gibbs_dixmier::experiment::parse::{parse_float_list, parse_probabilities};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_float_list(s) {
        assert!(v.iter().all(|x| x.is_finite()));
    }
    if let Ok(p) = parse_probabilities(s) {
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() <= 1e-9);
        assert!(p.iter().all(|&x| x >= 0.0));
    }
});
