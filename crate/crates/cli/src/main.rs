mod experiment;
mod inputs;
mod selfcheck;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use bp_core::circuit::{estimate_variance, CircuitSpec};
use bp_core::dla::{dla_report, GeneratorSet, QBasisFlavor};
use bp_core::fermion::fermion_report;
use bp_core::modules::{parity_sector_decompose, purity_spectrum, Parity};
use bp_core::variance::{variance_exact, variance_parity_basis, weingarten_oracle};
use bp_core::{BpError, PauliSumOperator};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use experiment::{run_experiment, write_rows, ExperimentConfig, ExperimentKind, Format};
use inputs::{parse_observable, parse_state};

/// Invalid configuration or input; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Parser)]
#[command(name = "bp", version, about = "Loss variances of matchgate circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a benchmark family and tabulate closed-form, exact and sampled variances.
    Experiment(ExperimentArgs),
    /// Lie closure, symmetries and commutator graph of a generator set.
    Dla(DlaArgs),
    /// Per-degree purities and coherences of a state or operator.
    Decompose(DecomposeArgs),
    /// Variance of one state/observable pair.
    Variance(VarianceArgs),
    /// Quick numerical self-check at small n.
    Selfcheck,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    /// Comma-separated qubit counts.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Comma-separated grid values (m, τ or j).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    grid: Option<Vec<f64>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    observable: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct DlaArgs {
    /// File with one Pauli string per line.
    #[arg(conflicts_with = "matchgate", required_unless_present = "matchgate")]
    generators: Option<PathBuf>,
    /// Use the nearest-neighbour matchgate generators on N qubits.
    #[arg(long, value_name = "N")]
    matchgate: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    max_dim: usize,
}

#[derive(Args)]
struct DecomposeArgs {
    /// State spec: zero, magic:<tau>, superposition:<a>,<b> or a JSON file.
    #[arg(long, conflicts_with = "operator", required_unless_present = "operator")]
    state: Option<String>,
    /// Operator spec, as accepted for observables.
    #[arg(long)]
    operator: Option<String>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Parity,
    Oracle,
    Mc,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Standard,
    Parity,
}

#[derive(Args)]
struct VarianceArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    state: String,
    #[arg(long)]
    observable: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    method: MethodArg,
    /// Commutant basis used by the oracle.
    #[arg(long, value_enum, default_value_t = FlavorArg::Standard)]
    flavor: FlavorArg,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn parse_config<T: std::str::FromStr<Err = ConfigError>>(text: &str) -> Result<T> {
    Ok(text.parse::<T>()?)
}

fn experiment_config(args: ExperimentArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
        }
        None => {
            let kind = args
                .experiment
                .as_deref()
                .ok_or_else(|| ConfigError("--experiment or --config is required".into()))?;
            let n = args.n.clone().ok_or_else(|| ConfigError("--n or --config is required".into()))?;
            ExperimentConfig::new(parse_config::<ExperimentKind>(kind)?, n)
        }
    };
    if let Some(kind) = &args.experiment {
        cfg.experiment = parse_config(kind)?;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(format) = &args.format {
        cfg.format = parse_config::<Format>(format)?;
    }
    cfg.grid = args.grid.or(cfg.grid);
    cfg.samples = args.samples.unwrap_or(cfg.samples);
    cfg.layers = args.layers.or(cfg.layers);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.output = args.output.or(cfg.output);
    cfg.alpha = args.alpha.or(cfg.alpha);
    cfg.beta = args.beta.or(cfg.beta);
    cfg.state = args.state.or(cfg.state);
    cfg.observable = args.observable.or(cfg.observable);
    cfg.workers = args.workers.unwrap_or(cfg.workers);
    cfg.validate()?;
    Ok(cfg)
}

fn output_sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json(value: &Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let cfg = experiment_config(args)?;
    let rows = run_experiment(&cfg)?;
    let mut out = output_sink(cfg.output.as_deref())?;
    write_rows(&rows, cfg.format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_dla(args: DlaArgs) -> Result<()> {
    let g = match (args.matchgate, &args.generators) {
        (Some(n), _) => GeneratorSet::matchgate(n)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            text.parse::<GeneratorSet>().with_context(|| format!("parsing {}", path.display()))?
        }
        (None, None) => unreachable!("clap requires one generator source"),
    };
    print_json(&serde_json::to_value(dla_report(&g, args.max_dim)?)?)
}

fn decomposition(m: &PauliSumOperator) -> Result<Value> {
    let n = m.n();
    let spectrum = purity_spectrum(m);
    // Adding zero turns -0.0 into 0.0 in the printed output.
    let clean = |v: &[f64]| v.iter().map(|x| x + 0.0).collect::<Vec<_>>();
    let mut sectors = Vec::new();
    for kappa in (0..=n).step_by(2) {
        let s = parity_sector_decompose(m, kappa)?;
        sectors.push(json!({
            "kappa": kappa,
            "even": s.purity(Parity::Even) + 0.0,
            "odd": s.purity(Parity::Odd) + 0.0,
        }));
    }
    Ok(json!({
        "n": n,
        "purities": clean(&spectrum.purities),
        "coherences": clean(&spectrum.coherences),
        "total": spectrum.total(),
        "sector_purities": sectors,
    }))
}

fn cmd_decompose(args: DecomposeArgs) -> Result<()> {
    let doc = if let Some(spec) = &args.state {
        let rho = parse_state(spec, args.n)?.density()?;
        let mut doc = decomposition(&rho)?;
        doc["fermion"] = serde_json::to_value(fermion_report(&rho)?)?;
        doc
    } else {
        let spec = args.operator.as_deref().unwrap_or_default();
        let n = match args.n {
            Some(n) => n,
            None => PauliSumOperator::load(Path::new(spec))
                .map_err(|_| ConfigError(format!("operator {spec:?} needs --n")))?
                .n(),
        };
        decomposition(&parse_observable(spec, n)?)?
    };
    print_json(&doc)
}

fn cmd_variance(args: VarianceArgs) -> Result<()> {
    let state = parse_state(&args.state, args.n)?;
    let n = state.n();
    let o = parse_observable(&args.observable, n)?;
    let flavor = match args.flavor {
        FlavorArg::Standard => QBasisFlavor::Standard,
        FlavorArg::Parity => QBasisFlavor::Parity,
    };
    let all = matches!(args.method, MethodArg::All);
    let methods: Vec<MethodArg> = if all {
        vec![MethodArg::Exact, MethodArg::Parity, MethodArg::Oracle, MethodArg::Mc]
    } else {
        vec![args.method]
    };
    let mut doc = json!({ "n": n, "state": args.state, "observable": args.observable });
    for method in methods {
        let (key, result) = match method {
            MethodArg::Exact => ("exact", state.density().and_then(|rho| Ok(serde_json::to_value(variance_exact(&rho, &o)?)?))),
            MethodArg::Parity => {
                ("parity", state.density().and_then(|rho| Ok(serde_json::to_value(variance_parity_basis(&rho, &o)?)?)))
            }
            MethodArg::Oracle => {
                ("oracle", state.density().and_then(|rho| Ok(serde_json::to_value(weingarten_oracle(&rho, &o, flavor)?)?)))
            }
            MethodArg::Mc => ("mc", monte_carlo(&args, &state, &o)),
            MethodArg::All => unreachable!("expanded above"),
        };
        doc[key] = match result {
            Ok(v) => v,
            // With --method all, one inapplicable route should not hide the others.
            Err(e) if all => json!({ "error": format!("{e:#}") }),
            Err(e) => return Err(e),
        };
    }
    print_json(&doc)
}

fn monte_carlo(args: &VarianceArgs, state: &inputs::State, o: &PauliSumOperator) -> Result<Value> {
    let spec = CircuitSpec::new(state.n(), args.layers, args.seed)?;
    let est = estimate_variance(&state.input()?, o, &spec, args.samples, args.workers)?;
    Ok(serde_json::to_value(est)?)
}

fn is_config_error(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause.is::<ConfigError>()
            || matches!(cause.downcast_ref::<BpError>(), Some(e) if !matches!(e, BpError::Io(_) | BpError::Tolerance(_)))
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Experiment(a) => cmd_experiment(a),
        Command::Dla(a) => cmd_dla(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Variance(a) => cmd_variance(a),
        Command::Selfcheck => {
            let failures = selfcheck::run();
            if failures > 0 {
                eprintln!("{failures} check(s) failed");
                return ExitCode::from(3);
            }
            return ExitCode::SUCCESS;
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_config_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
