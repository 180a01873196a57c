use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gibbs_dixmier::experiment::{
    emit_plot_data, format_number, run, write_artifacts, CommandKind, ExperimentConfig, ModelKind, OrderKind,
    ParamValue,
};
use gibbs_dixmier::Error;

#[derive(Parser)]
#[command(
    name = "gibbs-dixmier",
    version,
    about = "Transfer operators, zeta functions and Dixmier-trace estimates on shift spaces"
)]
struct Cli {
    /// Worker threads for parallel parameter points (default: all cores).
    #[arg(long, global = true, env = "GIBBS_DIXMIER_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run whatever command a config file names.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Both sides of the representation formula (decreasing-weight order).
    Verify(Flags),
    /// lim (s-1) zeta_+(s) and zeta_-(s) by extrapolation along an s-grid.
    Zeta(Flags),
    /// Dixmier estimator trajectory in length-lex (`paper`) or decreasing-weight order.
    Dixmier(Flags),
    /// Hofbauer renewal recursion, closed forms and constants.
    Hofbauer(Flags),
    /// Localization pipeline for the Dyson potential.
    Dyson(Flags),
    /// Gurevich pressure across truncations of a countable shift.
    Gurevich(Flags),
    /// Representation check on truncations of the geometric countable model.
    CountableVerify(Flags),
    /// Variation, Walters modulus and commutator summability.
    Regularity(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Bernoulli,
    Hofbauer,
    Dyson,
    GeometricCountable,
    CustomDepthK,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Paper,
    Decreasing,
}

#[derive(Args)]
struct Flags {
    /// TOML config; flags given here override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Bernoulli probabilities, e.g. `0.3,0.7`.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Accept Hofbauer gamma in (1, 2].
    #[arg(long)]
    allow_low_gamma: bool,
    /// Dyson interaction exponent.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Use the renewal shift with these Hofbauer-type weights (gurevich).
    #[arg(long)]
    renewal_gamma: Option<f64>,
    /// Alphabet size of a custom model.
    #[arg(long)]
    alphabet: Option<usize>,
    /// Table depth of a custom model.
    #[arg(long)]
    table_depth: Option<usize>,
    /// Seed of a random custom model.
    #[arg(long)]
    seed: Option<u32>,
    /// Observable, e.g. `[1]`, `[+1,+1]`, `0.5*[0,1] + [2]`, `series(0.5)`.
    #[arg(long = "a", allow_hyphen_values = true)]
    observable: Option<String>,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    y: Option<String>,
    /// Localization depth (or longest word length for commutator sums).
    #[arg(long)]
    depth: Option<usize>,
    /// Depth list, e.g. `4,6,8,10` or `4..10`.
    #[arg(long)]
    depths: Option<String>,
    /// Recursion terms (hofbauer).
    #[arg(long)]
    k_max: Option<usize>,
    /// Number of eigenvalues in Dixmier estimates.
    #[arg(long = "n", visible_alias = "N")]
    n: Option<usize>,
    /// `dyadic:3..14` or a comma list.
    #[arg(long)]
    s_grid: Option<String>,
    /// Truncation levels, e.g. `4,8,16,32`.
    #[arg(long)]
    truncations: Option<String>,
    #[arg(long, value_enum)]
    order: Option<OrderArg>,
    /// Metric parameter of the spectral triple.
    #[arg(long)]
    alpha_metric: Option<f64>,
    /// Output directory (default `out/<command>`).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_toml_str(&text)
}

fn build(command: CommandKind, f: Flags) -> Result<ExperimentConfig, Error> {
    let mut c = match &f.config {
        Some(path) => {
            let c = load(path)?;
            if c.command != command {
                return Err(Error::Config {
                    field: "command".into(),
                    reason: format!("config runs `{}`, not `{}`", c.command.name(), command.name()),
                });
            }
            c
        }
        None => ExperimentConfig::new(command),
    };
    if let Some(m) = f.model {
        c.model = Some(match m {
            ModelArg::Bernoulli => ModelKind::Bernoulli,
            ModelArg::Hofbauer => ModelKind::Hofbauer,
            ModelArg::Dyson => ModelKind::Dyson,
            ModelArg::GeometricCountable => ModelKind::GeometricCountable,
            ModelArg::CustomDepthK => ModelKind::CustomDepthK,
        });
    }
    let params = &mut c.parameters;
    if let Some(p) = f.p {
        params.insert("p".into(), ParamValue::Text(p));
    }
    let mut num = |key: &str, v: Option<f64>| {
        if let Some(v) = v {
            params.insert(key.into(), ParamValue::Number(v));
        }
    };
    num("gamma", f.gamma);
    num("alpha", f.alpha);
    num("kappa", f.kappa);
    num("renewal_gamma", f.renewal_gamma);
    num("alphabet", f.alphabet.map(|v| v as f64));
    num("depth", f.table_depth.map(|v| v as f64));
    num("seed", f.seed.map(f64::from));
    if f.allow_low_gamma {
        num("allow_low_gamma", Some(1.0));
    }
    macro_rules! set {
        ($($field:ident),*) => { $( if f.$field.is_some() { c.$field = f.$field; } )* };
    }
    set!(observable, x, y, depth, depths, k_max, n, s_grid, truncations, alpha_metric, output);
    if let Some(o) = f.order {
        c.order = Some(match o {
            OrderArg::Paper => OrderKind::Paper,
            OrderArg::Decreasing => OrderKind::Decreasing,
        });
    }
    Ok(c)
}

fn execute(cli: Cli) -> Result<(), Error> {
    let (config, output) = match cli.command {
        Cmd::Run { config, output } => (load(&config)?, output),
        Cmd::Verify(f) => (build(CommandKind::Verify, f)?, None),
        Cmd::Zeta(f) => (build(CommandKind::Zeta, f)?, None),
        Cmd::Dixmier(f) => (build(CommandKind::Dixmier, f)?, None),
        Cmd::Hofbauer(f) => (build(CommandKind::Hofbauer, f)?, None),
        Cmd::Dyson(f) => (build(CommandKind::Dyson, f)?, None),
        Cmd::Gurevich(f) => (build(CommandKind::Gurevich, f)?, None),
        Cmd::CountableVerify(f) => (build(CommandKind::CountableVerify, f)?, None),
        Cmd::Regularity(f) => (build(CommandKind::Regularity, f)?, None),
    };
    let dir =
        output.or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("out").join(config.command.name()));
    log::info!("running `{}`, writing to {}", config.command.name(), dir.display());
    let out = run(&config)?;
    let series = emit_plot_data(&out);
    let files = write_artifacts(&out, &series, &config, &dir)?;
    println!("[{}]", out.command);
    for (k, v) in &out.summary {
        println!("{k} = {}", format_number(*v));
    }
    for (k, v) in &out.error_bounds {
        println!("error_bound.{k} = {}", format_number(*v));
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (Error::Config { .. } | Error::Parse(_))) => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
