use std::fs;
use std::path::Path;

use gibbs_dixmier::experiment::{emit_plot_data, run, write_artifacts, ExperimentConfig};
use gibbs_dixmier::Error;

fn config(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::from_toml_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn shipped_configs_validate_and_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let c = ExperimentConfig::from_toml_str(&fs::read_to_string(&path).unwrap()).unwrap();
            c.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let again = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
            assert_eq!(c, again);
            seen += 1;
        }
    }
    assert!(seen >= 6);
}

#[test]
fn zeta_run_writes_tables_plots_and_manifest() {
    let c = config("bernoulli_zeta.toml");
    let out = run(&c).unwrap();
    let h = -(0.3f64 * 0.3f64.ln() + 0.7 * 0.7f64.ln());
    assert!((out.summary["limit_plus"] / (0.3 / h) - 1.0).abs() < 1e-8);
    let dir = tempfile::tempdir().unwrap();
    let series = emit_plot_data(&out);
    assert!(!series.is_empty());
    let files = write_artifacts(&out, &series, &c, dir.path()).unwrap();
    assert!(files.iter().all(|f| f.exists()));
    let manifest = fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    let parsed: toml::Table = manifest.parse().unwrap();
    assert_eq!(parsed["command"].as_str(), Some("zeta"));
    assert!(parsed["config"]["observable"].as_str() == Some("[1]"));
    for f in files.iter().filter(|f| f.extension().is_some_and(|e| e == "csv")) {
        let text = fs::read_to_string(f).unwrap();
        let mut lines = text.lines();
        let width = lines.next().unwrap().split(',').count();
        assert!(lines.all(|l| l.split(',').count() == width), "{}", f.display());
    }
}

#[test]
fn runs_are_deterministic() {
    for name in ["random_verify.toml", "countable.toml"] {
        let mut c = config(name);
        c.n = Some(1 << 14);
        let (a, b) = (run(&c).unwrap(), run(&c).unwrap());
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn hofbauer_run_reports_both_constants() {
    let out = run(&config("hofbauer.toml")).unwrap();
    assert!((out.summary["limit_ones_times_c"] - 1.0).abs() < 1e-4);
    assert!((out.summary["limit_ones_times_c_as_printed"] - 1.0).abs() > 0.4);
}

#[test]
fn invalid_configs_are_rejected_with_field_names() {
    let bad = [
        ("schema = 2\ncommand = \"zeta\"\n", "schema"),
        ("schema = 1\ncommand = \"zeta\"\nmodel = \"dyson\"\nobservable = \"[1]\"\n[parameters]\nalpha = 0.5\n", "parameters.alpha"),
        ("schema = 1\ncommand = \"hofbauer\"\nmodel = \"bernoulli\"\n", "model"),
        ("schema = 1\ncommand = \"zeta\"\nobservable = \"[1]\"\ns_grid = \"list:0.9,1.1\"\n[parameters]\np = \"0.5,0.5\"\n", "s_grid"),
        ("schema = 1\ncommand = \"zeta\"\nobservable = \"[1]\"\n[parameters]\np = \"0.5,0.6\"\n", "parameters.p"),
    ];
    for (text, field) in bad {
        let err = ExperimentConfig::from_toml_str(text).and_then(|c| c.validate().map(|_| ()));
        match err {
            Err(Error::Config { field: f, .. }) => assert_eq!(f, field, "{text}"),
            other => panic!("{text}: expected a config error on `{field}`, got {other:?}"),
        }
    }
    assert!(matches!(
        ExperimentConfig::from_toml_str("schema = 1\ncommand = \"zeta\"\nbogus = 3\n"),
        Err(Error::Parse(_))
    ));
}
