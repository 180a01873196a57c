#![no_main]

use gibbs_dixmier::experiment::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(c) = ExperimentConfig::from_toml_str(s) else { return };
    let _ = c.validate();
    if let Ok(text) = c.to_toml_string() {
        let again = ExperimentConfig::from_toml_str(&text).expect("serialized config parses");
        // text, not struct, equality: NaN parameters compare unequal
        assert_eq!(Some(text), again.to_toml_string().ok());
    }
});
