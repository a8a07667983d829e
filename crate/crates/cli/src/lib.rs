//! `qillum` command-line front end: parameter sweeps over the quantum
//! illumination library with CSV output and a JSON run manifest.

pub mod commands;
pub mod config;
pub mod error;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ChernoffConfig, CorrelationsConfig, FfSfgConfig, Figure1Config, MonteCarloConfig, OpaConfig};
pub use crate::error::{CliError, Result};

pub const THREADS_ENV: &str = "QILLUM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qillum", version, about = "Hyperentangled quantum illumination studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for the CSV and the manifest.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Random seed; overrides the config value.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Print the configuration keys and CSV columns, then exit.
    #[arg(long)]
    pub schema: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Chernoff bound of the biphoton probe over (M, d, kappa, N_B) grids.
    Chernoff(RunArgs),
    /// Error probability of every receiver against N.
    Figure1(RunArgs),
    /// Photocounting Monte Carlo of the amplifier receivers.
    Montecarlo(RunArgs),
    /// Phase-sensitive correlation: closed form against its series.
    Correlations(RunArgs),
    /// Amplifier receiver statistics.
    Opa(RunArgs),
    /// Sum-frequency receiver exponents.
    Ffsfg(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Chernoff(_) => "chernoff",
            Command::Figure1(_) => "figure1",
            Command::Montecarlo(_) => "montecarlo",
            Command::Correlations(_) => "correlations",
            Command::Opa(_) => "opa",
            Command::Ffsfg(_) => "ffsfg",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Chernoff(a)
            | Command::Figure1(a)
            | Command::Montecarlo(a)
            | Command::Correlations(a)
            | Command::Opa(a)
            | Command::Ffsfg(a) => a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub tool_version: String,
    pub command: String,
    pub config: Value,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub started_at: String,
    pub duration_seconds: f64,
    pub output: OutputFile,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: RunManifest,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the resolved configuration. `serde_json` maps keep their keys
/// sorted, so the hash does not depend on the key order of the input file.
pub fn config_hash(config: &Value) -> String {
    sha256_hex(config.to_string().as_bytes())
}

fn to_csv<R: Serialize>(rows: &[R], header: &[&str]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner()
        .map_err(|e| CliError::io("writing CSV", std::io::Error::other(e.to_string())))
}

fn load_required<T: serde::de::DeserializeOwned>(args: &RunArgs) -> Result<T> {
    match &args.config {
        Some(path) => config::load(path),
        None => Err(CliError::Config("--config is required".into())),
    }
}

fn resolved<T: Serialize>(cfg: &T) -> Result<Value> {
    serde_json::to_value(cfg).map_err(|e| CliError::Config(e.to_string()))
}

struct Produced {
    config: Value,
    seed: Option<u64>,
    csv: Vec<u8>,
    rows: usize,
}

fn produce(command: &Command) -> Result<Produced> {
    let args = command.args();
    let schema = schema(command.name());
    let header: Vec<&str> = schema["columns"]
        .as_array()
        .expect("schema lists columns")
        .iter()
        .map(|c| c["name"].as_str().expect("column name"))
        .collect();
    macro_rules! done {
        ($cfg:expr, $seed:expr, $rows:expr) => {{
            let rows = $rows;
            Ok(Produced {
                config: resolved(&$cfg)?,
                seed: $seed,
                csv: to_csv(&rows, &header)?,
                rows: rows.len(),
            })
        }};
    }
    match command {
        Command::Chernoff(_) => {
            let cfg: ChernoffConfig = load_required(args)?;
            done!(cfg, args.seed, commands::chernoff_rows(&cfg)?)
        }
        Command::Figure1(_) => {
            let cfg: Figure1Config = match &args.config {
                Some(path) => config::load(path)?,
                None => Figure1Config::default(),
            };
            done!(cfg, args.seed, commands::figure1_rows(&cfg)?)
        }
        Command::Montecarlo(_) => {
            let mut cfg: MonteCarloConfig = load_required(args)?;
            if args.seed.is_some() {
                cfg.seed = args.seed;
            }
            let seed = cfg
                .seed
                .ok_or_else(|| CliError::Config("montecarlo needs a seed (config key or --seed)".into()))?;
            done!(cfg, Some(seed), commands::montecarlo_rows(&cfg, seed)?)
        }
        Command::Correlations(_) => {
            let cfg: CorrelationsConfig = load_required(args)?;
            done!(cfg, args.seed, commands::correlations_rows(&cfg)?)
        }
        Command::Opa(_) => {
            let cfg: OpaConfig = load_required(args)?;
            done!(cfg, args.seed, commands::opa_rows(&cfg)?)
        }
        Command::Ffsfg(_) => {
            let cfg: FfSfgConfig = load_required(args)?;
            done!(cfg, args.seed, commands::ffsfg_rows(&cfg)?)
        }
    }
}

/// Thread count from `--threads`, then `QILLUM_THREADS` (both handled by
/// clap), then the machine's parallelism.
pub fn resolve_threads(requested: Option<usize>) -> Result<usize> {
    match requested {
        Some(0) => Err(CliError::Config("thread count must be at least 1".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

/// Runs one subcommand. Returns `None` when only the schema was printed.
pub fn run(command: &Command) -> Result<Option<RunSummary>> {
    let args = command.args();
    if args.schema {
        let text = serde_json::to_string_pretty(&schema(command.name())).expect("schema serializes");
        let mut stdout = std::io::stdout().lock();
        match writeln!(stdout, "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(CliError::io("writing schema", e)),
            _ => return Ok(None),
        }
    }
    let threads = resolve_threads(args.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} threads: {e}")))?;
    qillum_core::fock::use_sequential_linalg();

    let started = chrono::Utc::now();
    let clock = Instant::now();
    let produced = pool.install(|| produce(command))?;
    let duration = clock.elapsed().as_secs_f64();

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::io(format!("creating {}", args.out.display()), e))?;
    let csv_name = format!("{}.csv", command.name());
    let csv_path = args.out.join(&csv_name);
    write_file(&csv_path, &produced.csv)?;

    let hash = config_hash(&produced.config);
    let run_id = format!("{}-{}", started.format("%Y%m%dT%H%M%S%.3fZ"), &hash[..12]);
    let manifest = RunManifest {
        run_id: run_id.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.name().to_string(),
        config: produced.config,
        config_hash: hash,
        seed: produced.seed,
        threads,
        started_at: started.to_rfc3339(),
        duration_seconds: duration,
        output: OutputFile {
            path: csv_name,
            rows: produced.rows,
            sha256: sha256_hex(&produced.csv),
        },
    };
    let manifest_path = args.out.join(format!("{run_id}.manifest.json"));
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&manifest_path, text.as_bytes())?;
    Ok(Some(RunSummary {
        csv_path,
        manifest_path,
        manifest,
    }))
}

fn columns(cols: &[(&str, &str)]) -> Value {
    Value::Array(cols.iter().map(|(n, d)| json!({"name": n, "description": d})).collect())
}

fn keys(keys: &[(&str, &str)]) -> Value {
    Value::Object(keys.iter().map(|(k, d)| (k.to_string(), json!(d))).collect())
}

const GRID: &str = "number, list, or {start, stop, points, scale: linear|log}";

/// Configuration keys and CSV columns of a subcommand.
pub fn schema(command: &str) -> Value {
    let (cfg, cols): (Value, Value) = match command {
        "chernoff" => (
            keys(&[
                ("M", "temporal modes (integer grid)"),
                ("d", "internal dimension, a power of two (integer grid); or give f"),
                ("f", "hyperentangled degrees of freedom, d = 2^f (integer grid)"),
                ("kappa", GRID),
                ("N_B", GRID),
                ("method", "closed | numeric | both (default both)"),
                ("N", "shot count for exponent_N and bound_N (default 1)"),
                ("tol", "golden-section tolerance on s (default 1e-6)"),
            ]),
            columns(&[
                ("M", "temporal modes"),
                ("d", "internal dimension"),
                ("kappa", "reflectance"),
                ("N_B", "thermal photons per mode"),
                ("method", "evaluation route"),
                ("s_star", "minimizing exponent"),
                ("Q", "minimized Tr[rho1^s rho0^(1-s)]"),
                ("one_minus_Q", "1 - Q at s_star"),
                ("N", "shot count"),
                ("exponent_N", "N (1 - Q)"),
                ("bound_N", "(1/2) Q^N"),
                ("residual", "closed minus numeric Q at s_star (method both)"),
                ("gain_over_d1", "(1 - Q) relative to d = 1 at the same M, kappa, N_B"),
            ]),
        ),
        "figure1" => (
            keys(&[
                ("N_S", "signal photons per mode (default 0.01)"),
                ("kappa", "reflectance (default 0.01)"),
                ("N_B", "thermal photons per mode (default 20)"),
                ("G", "amplifier gain (default 1.005); or give epsilon_sq"),
                ("epsilon_sq", "G - 1 (default 0.005)"),
                ("N", "iteration grid (default 1e3..1e7, 40 log points)"),
            ]),
            columns(&[
                ("N", "iterations"),
                ("HyperOpa", "hyperentangled amplifier receiver error probability"),
                ("LoneOpa", "lone amplifier receiver error probability"),
                ("CoherentHomodyne", "coherent state homodyne error probability"),
                ("TmsvQcb", "(1/2) exp(-kappa N N_S / N_B)"),
                ("LoneFfSfg", "lone sum-frequency receiver, (1/2) exp(-exponent)"),
                ("HyperFfSfg", "four hyperentangled sum-frequency receivers, (1/2) exp(-exponent)"),
                ("hyper_opa_exponent", "4 N R_exact"),
                ("lone_opa_exponent", "N R_exact"),
                ("hyper_opa_approx_exponent", "4 N kappa N_S / (4 N_B)"),
                ("lone_ffsfg_approx_exponent", "kappa N N_S / N_B"),
            ]),
        ),
        "montecarlo" => (
            keys(&[
                ("model", "HyperOpa | LoneOpa (default HyperOpa)"),
                ("N_S", GRID),
                ("kappa", GRID),
                ("N_B", GRID),
                ("G", "gain grid (default 1.005, applied as epsilon_sq = 0.005); or give epsilon_sq"),
                ("epsilon_sq", "G - 1 grid"),
                ("N", "iteration grid (integers)"),
                ("trials", "trials per row"),
                ("seed", "64-bit seed; --seed overrides"),
                ("hypothesis", "present | absent | both (default both)"),
            ]),
            columns(&[
                ("model", "receiver"),
                ("N_S", "signal photons per mode"),
                ("kappa", "reflectance"),
                ("N_B", "thermal photons per mode"),
                ("G", "amplifier gain"),
                ("N", "iterations per trial"),
                ("multiplicity", "photocounted modes per iteration"),
                ("seed", "run seed"),
                ("trials", "trials"),
                ("hypothesis", "simulated hypotheses"),
                ("threshold", "count threshold N_th"),
                ("false_alarms", "absent-target trials above threshold"),
                ("misses", "present-target trials at or below threshold"),
                ("empirical_pe", "errors over decisions"),
                ("ci_low", "Wilson 95% lower bound"),
                ("ci_high", "Wilson 95% upper bound"),
                ("mean_count_absent", "sample mean count without target"),
                ("var_count_absent", "sample variance without target"),
                ("mean_count_present", "sample mean count with target"),
                ("var_count_present", "sample variance with target"),
                ("analytic_pe", "(1/2) erfc(sqrt(multiplicity R N))"),
                ("abs_diff", "|empirical_pe - analytic_pe|"),
                ("within_3_sigma", "analytic_pe inside the 3-sigma Wilson interval"),
                ("validity_zone", "mode count times mean count at least 50"),
            ]),
        ),
        "correlations" => (
            keys(&[("N_S_prime", GRID), ("n_max", "series terms (default 500)")]),
            columns(&[
                ("N_S_prime", "photons per down-conversion source"),
                ("closed_form", "(1/2) sqrt(N_S' (N_S' + 1))"),
                ("series", "truncated thermal series"),
                ("tail_bound", "remaining series tail"),
                ("abs_diff", "|closed_form - series|"),
            ]),
        ),
        "opa" => (
            keys(&[
                ("variants", "list of hyper | lone (default both)"),
                ("N_S", GRID),
                ("kappa", GRID),
                ("N_B", GRID),
                ("G", "gain grid (default 1.005, applied as epsilon_sq = 0.005); or give epsilon_sq"),
                ("epsilon_sq", "G - 1 grid"),
                ("N", "iteration grid (default 1)"),
            ]),
            columns(&[
                ("variant", "hyper or lone"),
                ("N_S", "signal photons per mode"),
                ("kappa", "reflectance"),
                ("N_B", "thermal photons per mode"),
                ("G", "gain"),
                ("epsilon_sq", "G - 1"),
                ("N", "iterations"),
                ("N0", "mean output, target absent"),
                ("N1", "mean output, target present"),
                ("sigma0", "sqrt(N0 (N0 + 1))"),
                ("sigma1", "sqrt(N1 (N1 + 1))"),
                ("R_exact", "(N1 - N0)^2 / (2 (sigma0 + sigma1)^2)"),
                ("R_approx", "asymptotic SNR"),
                ("R_ratio", "R_exact / R_approx"),
                ("N_th", "count threshold"),
                ("exponent", "multiplicity N R_exact"),
                ("approx_exponent", "multiplicity N R_approx"),
                ("p_e", "(1/2) erfc(sqrt(exponent))"),
                ("p_e_bound", "exp(-x^2) / (2 sqrt(pi) x), x^2 = exponent"),
            ]),
        ),
        "ffsfg" => (
            keys(&[
                ("N_S", GRID),
                ("kappa", GRID),
                ("N_B", GRID),
                ("N", "iteration grid (default 1)"),
                ("K", "feed-forward cycles, recorded only (default 1)"),
            ]),
            columns(&[
                ("N_S", "signal photons per mode"),
                ("kappa", "reflectance"),
                ("N_B", "thermal photons per mode"),
                ("N", "iterations"),
                ("K", "feed-forward cycles"),
                ("lone_exact", "N kappa N_S (N_S + 1) / (1 + N_B)"),
                ("lone_approx", "kappa N N_S / N_B"),
                ("hyper_per_receiver_exact", "one of four hyperentangled receivers"),
                ("hyper_per_receiver_approx", "kappa N N_S / (2 N_B)"),
                ("hyper_total_exact", "four receivers"),
                ("hyper_total_approx", "2 kappa N N_S / N_B"),
                ("lone_p_e", "(1/2) exp(-lone_exact)"),
                ("hyper_p_e", "(1/2) exp(-hyper_total_exact)"),
            ]),
        ),
        other => panic!("no schema for {other}"),
    };
    json!({"command": command, "config": cfg, "columns": cols})
}
