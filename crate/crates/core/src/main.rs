use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gammaseq::harness::{
    execute, parse_with_path, run, to_csv, to_json, write_outputs, DecompositionJson, ExperimentConfig, ExperimentKind,
    Format, Inputs, NRange, OutputSpec, PolySource, PolynomialJson, RunReport, Suite, TensorJson,
};
use gammaseq::norm::{spectral_norm_strings, Engine, NormOptions};
use gammaseq::poisson::bracket;
use gammaseq::site::build_basis;
use gammaseq::symbolic::{decompose, quantize_strings, GammaPolynomial, LocalTensor};
use gammaseq::{Error, Result};

/// Quantized cyclically averaged spin-chain observables and their large-N scans.
#[derive(Parser)]
#[command(name = "gammaseq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// ‖Q_N(p)‖ over N.
    NormScan(ScanArgs),
    /// ‖Q_N({p,q}) − iN[Q_N(p), Q_N(q)]‖ over N.
    DgrScan(ScanArgs),
    /// ‖naive(p·q) − Q_N(p·q)‖ over N.
    RemainderScan(ScanArgs),
    /// Re-averaging a fixed-N sequence onto longer chains.
    ConsistencyScan(ScanArgs),
    /// Leibniz and Jacobi residuals over N.
    AxiomScan(ScanArgs),
    /// Periodic product-state lower bounds against ‖Q_N‖.
    LowerboundScan(ScanArgs),
    /// Materialize Q_N(p) and report its norm.
    Quantize(QuantizeArgs),
    /// Canonical components of a local tensor.
    Decompose(DecomposeArgs),
    /// The Poisson bracket {p, q}.
    Bracket(BracketArgs),
    /// Run a config file (one experiment or a suite).
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

/// JSON values are given inline or as `@path`.
#[derive(Args)]
struct ScanArgs {
    #[arg(long, conflicts_with_all = ["n_min", "n_max", "p", "tensor"])]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    kappa: usize,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, value_enum, default_value_t = Engine::Auto)]
    engine: Engine,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    tensor: Option<String>,
    #[arg(long)]
    base_sites: Option<usize>,
}

#[derive(Args)]
struct QuantizeArgs {
    #[arg(long)]
    p: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    kappa: usize,
    #[arg(long, value_enum, default_value_t = Engine::Auto)]
    engine: Engine,
    #[arg(long)]
    seed: Option<u64>,
    /// Also print the Pauli-string expansion.
    #[arg(long)]
    strings: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    tensor: String,
}

#[derive(Args)]
struct BracketArgs {
    #[arg(long)]
    p: String,
    #[arg(long)]
    q: String,
    #[arg(long, default_value_t = 2)]
    kappa: usize,
}

fn read_value(arg: &str) -> Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => Ok(std::fs::read_to_string(path)?),
        None => Ok(arg.to_string()),
    }
}

/// A bare polynomial object, or a tagged source (`tensor`, `random`, `hamiltonian`, `polynomial`).
fn poly_source(arg: &str) -> Result<PolySource> {
    let text = read_value(arg)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("words").is_some() || value.get("scalar").is_some() {
        Ok(PolySource::Polynomial(parse_with_path(&text)?))
    } else {
        parse_with_path(&text)
    }
}

fn tensor_json(arg: &str) -> Result<TensorJson> {
    parse_with_path(&read_value(arg)?)
}

fn polynomial(arg: &str, kappa: usize, seed: u64) -> Result<GammaPolynomial> {
    poly_source(arg)?.resolve(kappa, seed, 0)
}

fn inline_config(kind: ExperimentKind, a: &ScanArgs) -> Result<ExperimentConfig> {
    let missing = |flag: &str| Error::InvalidInput(format!("--{flag} is required without --config"));
    let n_range = NRange::new(a.n_min.ok_or_else(|| missing("n-min"))?, a.n_max.ok_or_else(|| missing("n-max"))?, a.stride)?;
    let opt = |s: &Option<String>| s.as_deref().map(poly_source).transpose();
    Ok(ExperimentConfig {
        name: None,
        kind,
        kappa: a.kappa,
        n_range,
        engine: a.engine,
        seed: a.seed.unwrap_or(NormOptions::default().seed),
        inputs: Inputs {
            p: opt(&a.p)?,
            q: opt(&a.q)?,
            r: opt(&a.r)?,
            tensor: a.tensor.as_deref().map(tensor_json).transpose()?,
            base_sites: a.base_sites,
        },
        output: a.out.clone().map(|path| OutputSpec { path, format: a.format }),
        assertions: Default::default(),
        leibniz_assertions: None,
    })
}

fn scan(kind: ExperimentKind, a: &ScanArgs) -> Result<i32> {
    if let Some(path) = &a.config {
        let suite = Suite::load(path)?;
        if let Some(other) = suite.experiments.iter().find(|e| e.kind != kind) {
            return Err(Error::InvalidInput(format!(
                "config contains a {} experiment; use `run` for mixed suites",
                other.kind.name()
            )));
        }
        return run_suite(&suite);
    }
    let cfg = inline_config(kind, a)?;
    cfg.validate()?;
    let outcome = execute(&cfg)?;
    if cfg.output.is_some() {
        write_outputs(&cfg, &outcome)?;
    } else {
        match a.format {
            Format::Csv => print!("{}", to_csv(&outcome)),
            Format::Json => println!("{}", to_json(&outcome)?),
        }
    }
    for f in &outcome.primary().failures {
        eprintln!("N={}: {}", f.n, f.message);
    }
    Ok(if outcome.passed() { 0 } else { 1 })
}

fn run_suite(suite: &Suite) -> Result<i32> {
    let report: RunReport = run(suite)?;
    print!("{}", report.summary());
    Ok(report.exit_code())
}

fn quantize_cmd(a: &QuantizeArgs) -> Result<i32> {
    let basis = build_basis(a.kappa)?;
    let mut opts = NormOptions::default().with_engine(a.engine);
    if let Some(seed) = a.seed {
        opts = opts.with_seed(seed);
    }
    let p = polynomial(&a.p, a.kappa, opts.seed)?;
    gammaseq::harness::validate_polynomial(&p, &basis)?;
    let q = quantize_strings(&p, a.n)?;
    let mut out = json!({
        "N": a.n,
        "kappa": a.kappa,
        "norm": spectral_norm_strings(&q, &basis, &opts)?,
        "hermitian": q.is_hermitian(gammaseq::tolerance::EXACT),
        "string_count": q.len(),
    });
    if a.strings {
        let strings: Vec<_> = q
            .iter()
            .map(|(key, c)| json!({"indices": gammaseq::strings::unpack(key, a.n), "coeff": [c.re, c.im]}))
            .collect();
        out["strings"] = json!(strings);
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn decompose_cmd(a: &DecomposeArgs) -> Result<i32> {
    let t = LocalTensor::try_from(&tensor_json(&a.tensor)?)?;
    println!("{}", serde_json::to_string_pretty(&DecompositionJson::from(&decompose(&t)))?);
    Ok(0)
}

fn bracket_cmd(a: &BracketArgs) -> Result<i32> {
    let basis = build_basis(a.kappa)?;
    let seed = NormOptions::default().seed;
    let p = polynomial(&a.p, a.kappa, seed)?;
    let q = poly_source(&a.q)?.resolve(a.kappa, seed, 1)?;
    gammaseq::harness::validate_polynomial(&p, &basis)?;
    gammaseq::harness::validate_polynomial(&q, &basis)?;
    let mut b = bracket(&p, &q, &basis)?;
    b.prune(gammaseq::tolerance::PRUNE);
    println!("{}", serde_json::to_string_pretty(&PolynomialJson::from(&b))?);
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::NormScan(a) => scan(ExperimentKind::NormScan, &a),
        Command::DgrScan(a) => scan(ExperimentKind::DgrScan, &a),
        Command::RemainderScan(a) => scan(ExperimentKind::RemainderScan, &a),
        Command::ConsistencyScan(a) => scan(ExperimentKind::ConsistencyScan, &a),
        Command::AxiomScan(a) => scan(ExperimentKind::AxiomScan, &a),
        Command::LowerboundScan(a) => scan(ExperimentKind::LowerboundScan, &a),
        Command::Quantize(a) => quantize_cmd(&a),
        Command::Decompose(a) => decompose_cmd(&a),
        Command::Bracket(a) => bracket_cmd(&a),
        Command::Run { config } => run_suite(&Suite::load(&config)?),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
