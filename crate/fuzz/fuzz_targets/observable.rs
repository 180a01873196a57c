#![no_main]

use gibbs_dixmier::experiment::parse::parse_observable;
use gibbs_dixmier::experiment::ObservableSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = parse_observable(s) {
        match spec {
            ObservableSpec::Cylinders(terms) => {
                for (c, w) in terms {
                    assert!(c.is_finite());
                    assert!(w.len() <= 64);
                }
            }
            ObservableSpec::Series(r) => assert!(r.is_finite()),
        }
    }
});
