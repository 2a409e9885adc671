mod commands;
mod error;
mod input;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcontract::contraction::{ExperimentOptions, VariationalOptions, DEFAULT_SEED};
use qcontract::QuantumChannel;
use serde::Serialize;
use serde_json::{json, Value};

use commands::Rendered;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "qcontract", version, about = "Quantum f-divergences and SDPI contraction coefficients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CommandKind {
    Divergence,
    Sdpi,
    DbCheck,
    Experiment,
    Catalog,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate divergences between two states.
    Divergence(Common),
    /// Contraction coefficients of a channel: exact χ²_g values and optional variational f values.
    Sdpi(Common),
    /// Detailed-balance residuals and the GNS implication check.
    DbCheck(Common),
    /// Per-n contraction table and asymptotic verdicts.
    Experiment(Common),
    /// List shipped generators and weights.
    Catalog(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Channel spec JSON file (or inline JSON).
    #[arg(long)]
    channel: Option<String>,
    /// State JSON file (or inline JSON).
    #[arg(long)]
    rho: Option<String>,
    /// Reference state JSON file (or inline JSON); defaults to the channel fixed point.
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long = "f")]
    f: Vec<String>,
    #[arg(long = "g")]
    g: Vec<String>,
    #[arg(long = "family")]
    family: Vec<String>,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=32))]
    n_max: u32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Variational restarts per objective.
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    restarts: u64,
    /// Restrict the catalog to one name.
    #[arg(long)]
    name: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Serialize)]
struct ReportEnvelope {
    tool: &'static str,
    version: &'static str,
    config: Value,
    timestamp_unix: u64,
    payload: Value,
    diagnostics: Value,
}

struct Inputs {
    channel: Option<(Value, QuantumChannel)>,
    rho: Option<(Value, qcontract::DensityMatrix)>,
    sigma: Option<(Value, qcontract::DensityMatrix)>,
}

fn load_inputs(c: &Common) -> Result<Inputs, CliError> {
    let channel = match &c.channel {
        Some(arg) => {
            let v = input::load_json(arg)?;
            let (spec, ch) = input::parse_channel(&v)?;
            Some((serde_json::to_value(spec).expect("channel spec serializes"), ch))
        }
        None => None,
    };
    let state = |arg: &Option<String>| -> Result<_, CliError> {
        match arg {
            Some(a) => {
                let v = input::load_json(a)?;
                let s = input::parse_state(&v)?;
                Ok(Some((v, s)))
            }
            None => Ok(None),
        }
    };
    Ok(Inputs { channel, rho: state(&c.rho)?, sigma: state(&c.sigma)? })
}

fn require<T>(x: Option<T>, what: &str) -> Result<T, CliError> {
    x.ok_or_else(|| CliError::Input(format!("--{what} is required")))
}

fn run(kind: CommandKind, c: &Common) -> Result<(Value, Rendered), CliError> {
    let inputs = load_inputs(c)?;
    let config = json!({
        "command": kind,
        "channel": inputs.channel.as_ref().map(|(v, _)| v),
        "rho": inputs.rho.as_ref().map(|(v, _)| v),
        "sigma": inputs.sigma.as_ref().map(|(v, _)| v),
        "f": c.f,
        "g": c.g,
        "family": c.family,
        "n_max": c.n_max,
        "seed": c.seed,
        "restarts": c.restarts,
        "name": c.name,
        "format": c.format,
    });
    let variational = VariationalOptions { restarts: c.restarts as usize, seed: c.seed, ..Default::default() };
    let sigma = inputs.sigma.map(|(_, s)| s);
    let rendered = match kind {
        CommandKind::Divergence => {
            let rho = require(inputs.rho, "rho")?.1;
            let sigma = require(sigma, "sigma")?;
            let fs = commands::resolve_f(&c.f)?;
            let families = commands::resolve_families(&c.family)?;
            let gs = if c.g.is_empty() { Vec::new() } else { commands::resolve_g(&c.g)? };
            commands::divergence(&rho, &sigma, &fs, &families, &gs)?
        }
        CommandKind::Sdpi => {
            let channel = require(inputs.channel, "channel")?.1;
            let gs = commands::resolve_g(&c.g)?;
            let specs = if c.family.is_empty() && c.f.is_empty() {
                Vec::new()
            } else {
                let fs = commands::resolve_f(&c.f)?;
                let families = commands::resolve_families(&c.family)?;
                families.iter().flat_map(|&fam| fs.iter().map(move |f| f.clone().with_family(fam))).collect()
            };
            let (sigma, source) = commands::reference_state(&channel, sigma)?;
            commands::sdpi(&channel, &sigma, source, &commands::SdpiRequest { gs: &gs, specs, variational })?
        }
        CommandKind::DbCheck => {
            let channel = require(inputs.channel, "channel")?.1;
            let extra = if c.g.is_empty() { Vec::new() } else { commands::resolve_g(&c.g)? };
            let (sigma, source) = commands::reference_state(&channel, sigma)?;
            commands::db_check(&channel, &sigma, source, &extra)?
        }
        CommandKind::Experiment => {
            let channel = require(inputs.channel, "channel")?.1;
            let fs = commands::resolve_f(&c.f)?;
            let families = commands::resolve_families(&c.family)?;
            let specs: Vec<_> =
                families.iter().flat_map(|&fam| fs.iter().map(move |f| f.clone().with_family(fam))).collect();
            let gs = commands::resolve_g(&c.g)?;
            let opts = ExperimentOptions { n_max: c.n_max, variational, ..Default::default() };
            commands::experiment(&channel, &specs, &gs, &opts)?
        }
        CommandKind::Catalog => commands::catalog(c.name.as_deref()),
    };
    Ok((config, rendered))
}

fn configure_threads() -> Result<Option<usize>, CliError> {
    let Ok(raw) = std::env::var("QCONTRACT_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("QCONTRACT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    Ok(Some(n))
}

fn emit(c: &Common, body: &str) -> Result<(), CliError> {
    match &c.out {
        Some(path) => fs::write(path, body).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes()).map_err(|e| CliError::Input(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match &cli.command {
        Command::Divergence(c) => (CommandKind::Divergence, c),
        Command::Sdpi(c) => (CommandKind::Sdpi, c),
        Command::DbCheck(c) => (CommandKind::DbCheck, c),
        Command::Experiment(c) => (CommandKind::Experiment, c),
        Command::Catalog(c) => (CommandKind::Catalog, c),
    };
    let result = configure_threads().and_then(|threads| {
        let (config, rendered) = run(kind, common)?;
        let body = match common.format {
            Format::Json => {
                let mut diagnostics = rendered.diagnostics;
                if let Value::Object(map) = &mut diagnostics {
                    map.insert("threads".into(), json!(threads.unwrap_or_else(rayon::current_num_threads)));
                }
                let envelope = ReportEnvelope {
                    tool: "qcontract",
                    version: env!("CARGO_PKG_VERSION"),
                    config,
                    timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
                    payload: rendered.payload,
                    diagnostics,
                };
                let mut s = serde_json::to_string_pretty(&envelope).expect("envelope serializes");
                s.push('\n');
                s
            }
            Format::Csv => rendered.csv,
            Format::Text => rendered.text,
        };
        emit(common, &body)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
