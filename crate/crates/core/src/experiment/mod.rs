//! Batch experiments: a versioned TOML config, per-model validation, and the
//! drivers that turn a config into CSV tables, plot series and a manifest.

mod output;
pub mod parse;
mod run;

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::countable::{sgp_example_potential, CountableShift};
use crate::error::{Error, Result};
use crate::potential::{
    bernoulli_potential, dyson_potential, hofbauer_potential, localize, localize_averaged, CoordinateSeries,
    GFunctionCertificate, LocallyConstant, Potential,
};
use crate::ruelle::normalize;
use crate::symbolic::{Alphabet, Symbol, TailPoint};

pub use output::{format_number, write_artifacts, Cell, PlotSeries, RunOutput, Table};
pub use parse::ObservableSpec;
pub use run::{emit_plot_data, run};

/// Version of the config schema understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

const MAX_DEPTH: usize = 24;
const MAX_TRUNCATION: usize = 4096;
const MAX_ENTRIES: usize = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Bernoulli,
    Hofbauer,
    Dyson,
    GeometricCountable,
    CustomDepthK,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Verify,
    Zeta,
    Dixmier,
    Hofbauer,
    Dyson,
    Gurevich,
    CountableVerify,
    Regularity,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Verify => "verify",
            CommandKind::Zeta => "zeta",
            CommandKind::Dixmier => "dixmier",
            CommandKind::Hofbauer => "hofbauer",
            CommandKind::Dyson => "dyson",
            CommandKind::Gurevich => "gurevich",
            CommandKind::CountableVerify => "countable-verify",
            CommandKind::Regularity => "regularity",
        }
    }

    /// Model used when the config leaves it out.
    pub fn default_model(&self) -> ModelKind {
        match self {
            CommandKind::Hofbauer => ModelKind::Hofbauer,
            CommandKind::Dyson => ModelKind::Dyson,
            CommandKind::Gurevich | CommandKind::CountableVerify => ModelKind::GeometricCountable,
            _ => ModelKind::Bernoulli,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderKind {
    Paper,
    Decreasing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    List(Vec<f64>),
    Text(String),
}

/// One experiment, as read from TOML. Text fields use the grammars in [`parse`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, ParamValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depths: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncations: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<OrderKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_metric: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn cfg_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config { field: field.to_string(), reason: reason.into() }
}

impl ExperimentConfig {
    /// A config with every optional field unset.
    pub fn new(command: CommandKind) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            command,
            model: None,
            parameters: BTreeMap::new(),
            observable: None,
            x: None,
            y: None,
            depth: None,
            depths: None,
            k_max: None,
            n: None,
            s_grid: None,
            truncations: None,
            order: None,
            alpha_metric: None,
            output: None,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        if s.len() > 1 << 20 {
            return Err(cfg_err("<file>", "config larger than 1 MiB"));
        }
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Parse(format!("config: {}", e.message())))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(cfg_err("schema", format!("expected {SCHEMA_VERSION}, got {}", cfg.schema)));
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(format!("config serialization: {e}")))
    }

    pub fn model_kind(&self) -> ModelKind {
        self.model.unwrap_or_else(|| self.command.default_model())
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.parameters.get(key) {
            None => Ok(None),
            Some(ParamValue::Number(v)) if v.is_finite() => Ok(Some(*v)),
            Some(_) => Err(cfg_err(&format!("parameters.{key}"), "expected a finite number")),
        }
    }

    fn integer(&self, key: &str, lo: usize, hi: usize) -> Result<Option<usize>> {
        match self.number(key)? {
            None => Ok(None),
            Some(v) if v.fract() == 0.0 && v >= lo as f64 && v <= hi as f64 => Ok(Some(v as usize)),
            Some(v) => {
                Err(cfg_err(&format!("parameters.{key}"), format!("expected an integer in {lo}..={hi}, got {v}")))
            }
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.parameters.get(key) {
            None => Ok(None),
            Some(ParamValue::List(v)) => Ok(Some(v.clone())),
            Some(ParamValue::Text(t)) => {
                parse::parse_float_list(t).map(Some).map_err(|e| cfg_err(&format!("parameters.{key}"), e.to_string()))
            }
            Some(ParamValue::Number(v)) => Ok(Some(vec![*v])),
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.parameters.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(cfg_err(
                    &format!("parameters.{key}"),
                    format!("unknown for model {:?}; allowed: {}", self.model_kind(), allowed.join(", ")),
                ));
            }
        }
        Ok(())
    }

    /// Checks every field against the model and command, before any computation.
    pub fn validate(&self) -> Result<Plan> {
        if self.schema != SCHEMA_VERSION {
            return Err(cfg_err("schema", format!("expected {SCHEMA_VERSION}, got {}", self.schema)));
        }
        let kind = self.model_kind();
        match (self.command, kind) {
            (CommandKind::Hofbauer, ModelKind::Hofbauer)
            | (CommandKind::Dyson, ModelKind::Dyson)
            | (CommandKind::CountableVerify, ModelKind::GeometricCountable)
            | (CommandKind::Gurevich, ModelKind::GeometricCountable | ModelKind::Hofbauer) => {}
            (CommandKind::Hofbauer | CommandKind::Dyson | CommandKind::CountableVerify | CommandKind::Gurevich, _) => {
                return Err(cfg_err("model", format!("{:?} cannot run `{}`", kind, self.command.name())));
            }
            _ => {}
        }

        let model = match kind {
            ModelKind::Bernoulli => {
                self.check_keys(&["p"])?;
                let p = self.list("p")?.ok_or_else(|| cfg_err("parameters.p", "required for bernoulli"))?;
                let text = p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
                parse::parse_probabilities(&text).map_err(|e| cfg_err("parameters.p", e.to_string()))?;
                Model::Bernoulli { p }
            }
            ModelKind::Hofbauer => {
                self.check_keys(&["gamma", "allow_low_gamma"])?;
                let gamma = self.number("gamma")?.unwrap_or(3.0);
                let low = self.integer("allow_low_gamma", 0, 1)?.unwrap_or(0) == 1;
                let floor = if low { 1.001 } else { 2.0 };
                if !(gamma > floor) {
                    return Err(cfg_err("parameters.gamma", format!("must exceed {floor}, got {gamma}")));
                }
                Model::Hofbauer { gamma }
            }
            ModelKind::Dyson => {
                self.check_keys(&["alpha"])?;
                let alpha = self.number("alpha")?.unwrap_or(3.0);
                if !(alpha > 1.0) {
                    return Err(cfg_err("parameters.alpha", format!("must exceed 1, got {alpha}")));
                }
                Model::Dyson { alpha }
            }
            ModelKind::GeometricCountable => {
                self.check_keys(&["kappa", "renewal_gamma"])?;
                let kappa = self.number("kappa")?.unwrap_or(1.0);
                if !(kappa > 0.0) {
                    return Err(cfg_err("parameters.kappa", format!("must be positive, got {kappa}")));
                }
                let renewal_gamma = self.number("renewal_gamma")?;
                if let Some(g) = renewal_gamma {
                    if !(g > 1.001) {
                        return Err(cfg_err("parameters.renewal_gamma", format!("must exceed 1, got {g}")));
                    }
                }
                Model::Geometric { kappa, renewal_gamma }
            }
            ModelKind::CustomDepthK => {
                self.check_keys(&["alphabet", "depth", "seed", "table"])?;
                let m = self.integer("alphabet", 2, 64)?.unwrap_or(3);
                let depth = self.integer("depth", 1, 12)?.unwrap_or(2);
                let len = m
                    .checked_pow(depth as u32)
                    .filter(|&l| l <= 1 << 20)
                    .ok_or_else(|| cfg_err("parameters.depth", format!("table of {m}^{depth} entries is too large")))?;
                let table = match self.list("table")? {
                    Some(t) => {
                        if t.len() != len {
                            return Err(cfg_err(
                                "parameters.table",
                                format!("expected {len} entries, got {}", t.len()),
                            ));
                        }
                        if self.parameters.contains_key("seed") {
                            return Err(cfg_err("parameters.seed", "give either seed or table"));
                        }
                        t
                    }
                    None => {
                        let seed = self.integer("seed", 0, u32::MAX as usize)?.unwrap_or(0) as u64;
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
                    }
                };
                Model::Custom { alphabet: m, depth, table }
            }
        };

        let observable = match &self.observable {
            Some(text) => parse::parse_observable(text).map_err(|e| cfg_err("observable", e.to_string()))?,
            None => match self.command {
                CommandKind::Hofbauer | CommandKind::Gurevich => ObservableSpec::Cylinders(vec![(1.0, vec![])]),
                _ => return Err(cfg_err("observable", "required for this command")),
            },
        };
        let labels = model.labels();
        let observable = match observable {
            ObservableSpec::Cylinders(terms) => {
                let mut out = Vec::with_capacity(terms.len());
                for (c, w) in terms {
                    let word =
                        w.iter().map(|&l| labels.symbol(l)).collect::<Option<Vec<Symbol>>>().ok_or_else(|| {
                            cfg_err("observable", format!("labels {w:?} are not valid for {kind:?} ({labels:?})"))
                        })?;
                    out.push((c, word));
                }
                Observable::Cylinders(out)
            }
            ObservableSpec::Series(r) => Observable::Series(r),
        };

        let tail = |field: &str, text: &Option<String>, default: Symbol| -> Result<TailPoint> {
            match text {
                Some(t) => parse::parse_tail_point(t).map_err(|e| cfg_err(field, e.to_string())),
                None => Ok(TailPoint::constant(default)),
            }
        };
        let x = tail("x", &self.x, 0)?;
        let y = tail("y", &self.y, 1)?;

        let depth = self.depth.unwrap_or(8);
        if depth == 0 || depth > MAX_DEPTH {
            return Err(cfg_err("depth", format!("must lie in 1..={MAX_DEPTH}")));
        }
        let depths = match &self.depths {
            Some(t) => parse::parse_index_list(t, MAX_DEPTH).map_err(|e| cfg_err("depths", e.to_string()))?,
            None => vec![4, 6, 8, 10],
        };
        let truncations = match &self.truncations {
            Some(t) => parse::parse_index_list(t, MAX_TRUNCATION).map_err(|e| cfg_err("truncations", e.to_string()))?,
            None => vec![4, 8, 16, 32],
        };
        if truncations.iter().any(|&m| m < 2) {
            return Err(cfg_err("truncations", "truncation levels must be >= 2"));
        }
        let mut s_grid = match &self.s_grid {
            Some(t) => parse::parse_s_grid(t).map_err(|e| cfg_err("s_grid", e.to_string()))?,
            None => crate::zeta::default_s_grid(),
        };
        // limits walk the grid towards 1
        s_grid.sort_by(|a, b| b.total_cmp(a));
        s_grid.dedup();
        let n = self.n.unwrap_or(1 << 18);
        if !(4..=MAX_ENTRIES).contains(&n) {
            return Err(cfg_err("n", format!("must lie in 4..={MAX_ENTRIES}")));
        }
        let k_max = self.k_max.unwrap_or(10_000);
        if !(2..=1_000_000).contains(&k_max) {
            return Err(cfg_err("k_max", "must lie in 2..=1000000"));
        }
        if let Some(a) = self.alpha_metric {
            if !(a > 0.0 && a < 1.0) {
                return Err(cfg_err("alpha_metric", format!("must lie in (0,1), got {a}")));
            }
        }
        Ok(Plan {
            command: self.command,
            model,
            observable,
            x,
            y,
            depth,
            depths,
            truncations,
            s_grid,
            n,
            k_max,
            order: self.order.unwrap_or(OrderKind::Decreasing),
            alpha_metric: self.alpha_metric,
        })
    }
}

/// How observable letters map to symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Labels {
    /// `1..=m`, matching the position in the probability vector.
    OneBased(usize),
    /// Spins `-1, +1` for symbols `0, 1`.
    Spin,
    /// Symbols themselves, `0..m` (`m = None` for countable alphabets).
    Raw(Option<usize>),
}

impl Labels {
    pub fn symbol(&self, label: i64) -> Option<Symbol> {
        match *self {
            Labels::OneBased(m) => (1..=m as i64).contains(&label).then(|| (label - 1) as Symbol),
            Labels::Spin => match label {
                -1 => Some(0),
                1 => Some(1),
                _ => None,
            },
            Labels::Raw(m) => {
                let ok = label >= 0 && m.map_or(label <= u32::MAX as i64, |m| label < m as i64);
                ok.then_some(label as Symbol)
            }
        }
    }
}

/// A validated model.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Bernoulli { p: Vec<f64> },
    Hofbauer { gamma: f64 },
    Dyson { alpha: f64 },
    Geometric { kappa: f64, renewal_gamma: Option<f64> },
    Custom { alphabet: usize, depth: usize, table: Vec<f64> },
}

impl Model {
    pub fn labels(&self) -> Labels {
        match self {
            Model::Bernoulli { p } => Labels::OneBased(p.len()),
            Model::Dyson { .. } => Labels::Spin,
            Model::Hofbauer { .. } => Labels::Raw(Some(2)),
            Model::Geometric { .. } => Labels::Raw(None),
            Model::Custom { alphabet, .. } => Labels::Raw(Some(*alphabet)),
        }
    }

    /// The potential on a finite alphabet, when the model has one.
    pub fn potential(&self) -> Result<Option<Box<dyn Potential>>> {
        Ok(match self {
            Model::Hofbauer { gamma } => Some(Box::new(hofbauer_potential(*gamma)?)),
            Model::Dyson { alpha } => Some(Box::new(dyson_potential(*alpha, 1e-13)?)),
            Model::Bernoulli { p } => Some(Box::new(bernoulli_potential(p)?.log_j)),
            Model::Custom { alphabet, depth, table } => {
                let a = Alphabet::full(*alphabet)?;
                let mut it = table.iter();
                Some(Box::new(LocallyConstant::from_fn(&a, *depth, |_| *it.next().expect("length checked"))?))
            }
            Model::Geometric { .. } => None,
        })
    }

    /// A g-function on a finite full shift: exact for Bernoulli, normalized for
    /// custom tables, localized at `depth` and normalized for Hofbauer and
    /// Dyson, renormalized at `truncation` for the geometric family.
    pub fn g_function(&self, depth: usize, truncation: usize) -> Result<GFunctionCertificate> {
        match self {
            Model::Bernoulli { p } => bernoulli_potential(p),
            Model::Custom { depth, .. } => {
                let f = self.potential()?.expect("finite model");
                normalize(f.as_ref(), depth.saturating_sub(1).max(1))
            }
            Model::Hofbauer { gamma } => {
                let f = hofbauer_potential(*gamma)?;
                let local = localize(&f, depth.max(2), &f.alphabet().default_tail(None))?;
                normalize(&local, depth.max(2) - 1)
            }
            Model::Dyson { alpha } => {
                let f = dyson_potential(*alpha, 1e-13)?;
                let anchors = [TailPoint::constant(0), TailPoint::constant(1)];
                let local = localize_averaged(&f, depth.max(2), &anchors)?;
                normalize(&local, depth.max(2) - 1)
            }
            Model::Geometric { kappa, .. } => sgp_example_potential(*kappa)?.normalized_truncation(truncation),
        }
    }

    /// Alphabet on which a g-function from [`Model::g_function`] lives.
    pub fn alphabet(&self, truncation: usize) -> Result<Alphabet> {
        match self {
            Model::Bernoulli { p } => Alphabet::full(p.len()),
            Model::Custom { alphabet, .. } => Alphabet::full(*alphabet),
            Model::Hofbauer { .. } | Model::Dyson { .. } => Alphabet::full(2),
            Model::Geometric { .. } => CountableShift::full().truncate(truncation),
        }
    }
}

/// A validated observable, letters already mapped to symbols.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    Cylinders(Vec<(f64, Vec<Symbol>)>),
    Series(f64),
}

impl Observable {
    pub fn potential(&self, alphabet: &Alphabet) -> Result<Box<dyn Potential>> {
        Ok(match self {
            Observable::Cylinders(terms) => Box::new(LocallyConstant::cylinder_combination(alphabet, terms)?),
            Observable::Series(r) => Box::new(CoordinateSeries::new(alphabet, *r)?),
        })
    }

    /// Locally constant version, localized at `depth` for the coordinate series.
    pub fn local(&self, alphabet: &Alphabet, depth: usize) -> Result<LocallyConstant> {
        match self {
            Observable::Cylinders(terms) => LocallyConstant::cylinder_combination(alphabet, terms),
            Observable::Series(r) => {
                localize(&CoordinateSeries::new(alphabet, *r)?, depth, &alphabet.default_tail(None))
            }
        }
    }
}

/// The validated contents of an [`ExperimentConfig`].
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub command: CommandKind,
    pub model: Model,
    pub observable: Observable,
    pub x: TailPoint,
    pub y: TailPoint,
    pub depth: usize,
    pub depths: Vec<usize>,
    pub truncations: Vec<usize>,
    pub s_grid: Vec<f64>,
    pub n: usize,
    pub k_max: usize,
    pub order: OrderKind,
    pub alpha_metric: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bernoulli_verify() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(CommandKind::Verify);
        c.model = Some(ModelKind::Bernoulli);
        c.parameters.insert("p".into(), ParamValue::List(vec![0.3, 0.7]));
        c.observable = Some("[1]".into());
        c.n = Some(1 << 12);
        c
    }

    #[test]
    fn toml_round_trip() {
        let mut c = bernoulli_verify();
        c.s_grid = Some("dyadic:3..14".into());
        c.alpha_metric = Some(0.1 + 0.2);
        c.output = Some("out/x".into());
        let text = c.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = "schema = 1\ncommand = \"verify\"\nobservabel = \"[1]\"\n";
        assert!(matches!(ExperimentConfig::from_toml_str(text), Err(Error::Parse(_))));
        let text = "schema = 2\ncommand = \"verify\"\n";
        assert!(matches!(ExperimentConfig::from_toml_str(text), Err(Error::Config { .. })));
        let mut c = bernoulli_verify();
        c.parameters.insert("gamma".into(), ParamValue::Number(3.0));
        match c.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "parameters.gamma"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn per_model_validation() {
        let c = bernoulli_verify();
        let plan = c.validate().unwrap();
        assert_eq!(plan.observable, Observable::Cylinders(vec![(1.0, vec![0])]));

        let mut bad = c.clone();
        bad.observable = Some("[3]".into());
        assert!(matches!(bad.validate(), Err(Error::Config { field, .. }) if field == "observable"));

        let mut bad = c.clone();
        bad.parameters.insert("p".into(), ParamValue::List(vec![0.3, 0.6]));
        assert!(matches!(bad.validate(), Err(Error::Config { field, .. }) if field == "parameters.p"));

        let mut h = ExperimentConfig::new(CommandKind::Hofbauer);
        h.parameters.insert("gamma".into(), ParamValue::Number(1.5));
        assert!(h.validate().is_err());
        h.parameters.insert("allow_low_gamma".into(), ParamValue::Number(1.0));
        assert!(h.validate().is_ok());

        let mut d = ExperimentConfig::new(CommandKind::Dyson);
        d.observable = Some("[+1,-1]".into());
        assert_eq!(d.validate().unwrap().observable, Observable::Cylinders(vec![(1.0, vec![1, 0])]));
        d.model = Some(ModelKind::Bernoulli);
        assert!(matches!(d.validate(), Err(Error::Config { field, .. }) if field == "model"));

        let mut k = ExperimentConfig::new(CommandKind::Verify);
        k.model = Some(ModelKind::CustomDepthK);
        k.observable = Some("[2,0]".into());
        k.parameters.insert("table".into(), ParamValue::List(vec![0.0; 8]));
        assert!(k.validate().is_err());
        k.parameters.insert("table".into(), ParamValue::List(vec![0.0; 9]));
        assert!(k.validate().is_ok());
    }

    #[test]
    fn custom_models_are_seeded() {
        let mut k = ExperimentConfig::new(CommandKind::Verify);
        k.model = Some(ModelKind::CustomDepthK);
        k.observable = Some("[0]".into());
        k.parameters.insert("seed".into(), ParamValue::Number(7.0));
        let a = k.validate().unwrap();
        let b = k.validate().unwrap();
        assert_eq!(a, b);
        k.parameters.insert("seed".into(), ParamValue::Number(8.0));
        assert_ne!(a.model, k.validate().unwrap().model);
        let g = a.model.g_function(a.depth, 0).unwrap();
        assert!(g.normalization_defect < 1e-12);
    }
}
