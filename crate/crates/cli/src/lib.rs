//! Experiment runner behind the `flatlimit` binary.

pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use flatlimit::cubature::{optimal_rule_with_error, unisolvency_check, worst_case_error, Unisolvency};
use flatlimit::experiments::{run_optimal_study, run_sweep, OptimalStudyConfig, PrecisionPolicy, SweepConfig};
use flatlimit::gauss_optimal::{gauss_rule_from_moments, OptimizerOptions};
use flatlimit::points::CubatureRule;
use flatlimit::precision::PrecisionConfig;
use flatlimit::{BigReal, Precision, Scalar};
use thiserror::Error;

use crate::config::Config;
use crate::output::{Manifest, PrecisionDecision, Table};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const PRECISION_ENV: &str = "FLATLIMIT_PRECISION_BITS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(flatlimit::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<flatlimit::Error> for CliError {
    fn from(e: flatlimit::Error) -> Self {
        use flatlimit::Error as E;
        match e {
            E::InvalidArgument(_) | E::DimensionMismatch { .. } | E::DuplicatePoints { .. } | E::Unsupported(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "flatlimit", version, about = "Flat-limit kernel cubature experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: `[output] directory`, else the current one).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `auto`, `machine` or a bit count. Beats the environment and the config.
    #[arg(long, global = true)]
    pub precision: Option<String>,
    /// Optimizer seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal, polynomial and damped weights over a length-scale grid.
    Sweep,
    /// Jointly optimised nodes over a length-scale grid.
    Optimal,
    /// Gauss rule of a one-dimensional functional.
    Gauss,
    /// Worst-case error of a rule at one length scale.
    Wce,
    /// Unisolvency of the configured points for the configured degree.
    CheckUnisolvent,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::Optimal => "optimal",
            Command::Gauss => "gauss",
            Command::Wce => "wce",
            Command::CheckUnisolvent => "check-unisolvent",
        }
    }
}

/// Chosen precision policy and where it came from.
fn resolve_policy(common: &Common, cfg: &Config, env: Option<String>) -> Result<(PrecisionPolicy, &'static str), CliError> {
    if let Some(p) = &common.precision {
        return Ok((config::parse_policy(p)?, "flag"));
    }
    if let Some(v) = env.filter(|v| !v.trim().is_empty()) {
        return Ok((config::parse_policy(&v)?, "environment"));
    }
    match cfg.precision_policy()? {
        Some(p) => Ok((p, "config")),
        None => Ok((PrecisionPolicy::Auto, "default")),
    }
}

fn policy_name(p: PrecisionPolicy) -> String {
    match p {
        PrecisionPolicy::Auto => "auto".into(),
        PrecisionPolicy::Machine => "machine".into(),
        PrecisionPolicy::Bits(b) => b.to_string(),
    }
}

struct Run {
    cfg: Config,
    config_bytes: Vec<u8>,
    policy: PrecisionPolicy,
    policy_source: &'static str,
    out_dir: PathBuf,
    stem: String,
    seed: Option<u64>,
}

impl Run {
    fn manifest(&self, command: &str) -> Manifest {
        Manifest::new(command, &self.config_bytes, policy_name(self.policy), self.policy_source, self.seed)
    }

    fn write(&self, table: &Table, manifest: &Manifest) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out_dir)?;
        let csv = self.out_dir.join(format!("{}.csv", self.stem));
        table.write(&csv)?;
        manifest.write(&self.out_dir.join(format!("{}.manifest.toml", self.stem)))?;
        Ok(csv)
    }

    fn optimizer(&self) -> OptimizerOptions {
        let mut o = self.cfg.optimizer.clone().unwrap_or_default();
        if let Some(s) = self.seed {
            o.seed = s;
        }
        o
    }
}

/// Runs one invocation, printing a summary to stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    run_with_env(cli, std::env::var(PRECISION_ENV).ok())
}

pub fn run_with_env(cli: Cli, env_precision: Option<String>) -> Result<(), CliError> {
    let path = cli
        .common
        .config
        .clone()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let (cfg, config_bytes) = config::load(&path)?;
    let (policy, policy_source) = resolve_policy(&cli.common, &cfg, env_precision)?;
    let out_dir = cli
        .common
        .out
        .clone()
        .or_else(|| cfg.output.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let stem = cfg.output.name.clone().unwrap_or_else(|| cli.command.name().to_string());
    if stem.is_empty() || stem.contains(['/', '\\']) {
        return Err(CliError::Config(format!("invalid output name {stem:?}")));
    }
    let run = Run {
        cfg,
        config_bytes,
        policy,
        policy_source,
        out_dir,
        stem,
        seed: cli.common.seed,
    };
    match cli.command {
        Command::Sweep => sweep(&run),
        Command::Optimal => optimal(&run),
        Command::Gauss => gauss(&run),
        Command::Wce => wce(&run),
        Command::CheckUnisolvent => check_unisolvent(&run),
    }
}

fn sweep(run: &Run) -> Result<(), CliError> {
    let cfg = &run.cfg;
    let (grid, fit_window) = cfg.grid()?;
    let sweep_cfg = SweepConfig {
        kernel: cfg.kernel(None)?,
        functional: cfg.functional()?,
        points: cfg.point_set()?,
        degree: cfg.degree()?,
        grid,
        precision: run.policy,
        fit_window,
    };
    let result = run_sweep(&sweep_cfg)?;
    let n = sweep_cfg.points.len();
    let mut header = vec!["length_scale".to_string()];
    header.extend((1..=n).map(|i| format!("w{i}")));
    header.extend(
        ["wce", "optimal_to_polynomial", "phi_to_polynomial", "condition", "bits"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut table = Table::new(header);
    for r in &result.records {
        let mut row = vec![output::f64_cell(r.length_scale)];
        row.extend(r.decimals.weights.iter().cloned());
        row.push(r.decimals.wce.clone());
        row.push(r.decimals.optimal_to_polynomial.clone());
        row.push(r.decimals.phi_to_polynomial.clone());
        row.push(output::f64_cell(r.condition));
        row.push(r.bits.to_string());
        table.push(row);
    }
    let mut manifest = run.manifest("sweep");
    manifest.precision.decisions = result
        .records
        .iter()
        .map(|r| PrecisionDecision { length_scale: r.length_scale, bits: r.bits })
        .chain(result.failures.iter().map(|f| PrecisionDecision { length_scale: f.length_scale, bits: f.bits }))
        .collect();
    manifest.precision.decisions.sort_by(|a, b| a.length_scale.total_cmp(&b.length_scale));
    manifest.fit = result.fit.clone();
    manifest.failures = result.failures.clone();
    manifest.flat_limit_hypothesis_verified = Some(sweep_cfg.functional.flat_limit_hypothesis_verified());
    manifest.unisolvency = Some(result.unisolvency);
    manifest.polynomial_weights = Some(result.polynomial_weights.clone());
    let csv = run.write(&table, &manifest)?;

    println!("wrote {} ({} records, {} failures)", csv.display(), result.records.len(), result.failures.len());
    if let Some(fit) = &result.fit {
        let se = fit.std_error.map_or("n/a".to_string(), |s| format!("{s:.3}"));
        println!(
            "rate fit over [{}, {}]: slope {:.4} (std error {se}, {} points)",
            fit.window.0, fit.window.1, fit.slope, fit.points_used
        );
    }
    for f in &result.failures {
        eprintln!("warning: length scale {} failed at {} bits: {}", f.length_scale, f.bits, f.message);
    }
    if result.records.is_empty() {
        return Err(CliError::Numerical(flatlimit::Error::Internal("every length scale failed".into())));
    }
    Ok(())
}

fn optimal(run: &Run) -> Result<(), CliError> {
    let cfg = &run.cfg;
    let (grid, fit_window) = cfg.grid()?;
    let study_cfg = OptimalStudyConfig {
        kernel: cfg.kernel(None)?,
        functional: cfg.functional()?,
        nodes: cfg.count()?,
        grid,
        precision: run.policy,
        optimizer: run.optimizer(),
        fit_window,
    };
    let study = run_optimal_study(&study_cfg)?;
    let n = study_cfg.nodes;
    let mut header = vec!["length_scale".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=n).map(|i| format!("w{i}")));
    header.extend(
        ["wce", "node_distance", "weight_distance", "bits", "restarts", "multistart_spread"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut table = Table::new(header);
    for r in &study.records {
        let mut row = vec![output::f64_cell(r.length_scale)];
        row.extend(r.points.iter().map(|v| output::f64_cell(*v)));
        row.extend(r.weights.iter().map(|v| output::f64_cell(*v)));
        row.push(output::f64_cell(r.wce));
        row.push(output::f64_cell(r.node_distance));
        row.push(output::f64_cell(r.weight_distance));
        row.push(r.bits.to_string());
        row.push(r.restarts.to_string());
        row.push(output::f64_cell(r.multistart_spread));
        table.push(row);
    }
    let mut manifest = run.manifest("optimal");
    manifest.seed = Some(study_cfg.optimizer.seed);
    manifest.precision.decisions = study
        .records
        .iter()
        .map(|r| PrecisionDecision { length_scale: r.length_scale, bits: r.bits })
        .collect();
    manifest.fit = study.fit.clone();
    manifest.failures = study.failures.clone();
    manifest.gauss_nodes = Some(study.gauss_nodes.clone());
    manifest.gauss_weights = Some(study.gauss_weights.clone());
    manifest.flat_limit_hypothesis_verified = Some(study_cfg.functional.interval_bounds().is_some());
    let csv = run.write(&table, &manifest)?;
    println!("wrote {} ({} records, {} failures)", csv.display(), study.records.len(), study.failures.len());
    println!("Gauss nodes {:?}", study.gauss_nodes);
    if let Some(fit) = &study.fit {
        println!("wce slope over [{}, {}]: {:.4}", fit.window.0, fit.window.1, fit.slope);
    }
    for f in &study.failures {
        eprintln!("warning: length scale {} failed: {}", f.length_scale, f.message);
    }
    if study.records.is_empty() {
        return Err(CliError::Numerical(flatlimit::Error::Internal("every length scale failed".into())));
    }
    Ok(())
}

/// Precision for commands without a length scale.
fn fixed_precision(policy: PrecisionPolicy, auto_bits: u32) -> Result<PrecisionConfig, CliError> {
    Ok(match policy {
        PrecisionPolicy::Auto => PrecisionConfig::extended(auto_bits)?,
        PrecisionPolicy::Machine => PrecisionConfig::machine(),
        PrecisionPolicy::Bits(b) => PrecisionConfig::extended(b)?,
    })
}

fn gauss(run: &Run) -> Result<(), CliError> {
    let functional = run.cfg.functional()?;
    let n = run.cfg.count()?;
    // Hankel matrices lose roughly a bit per node and degree.
    let prec = fixed_precision(run.policy, 128 + 8 * n as u32)?;
    let digits = prec.precision.decimal_digits();
    let (nodes, weights): (Vec<String>, Vec<String>) = match prec.precision {
        Precision::Machine => {
            let g = gauss_rule_from_moments::<f64>(&functional, n, &prec)?;
            (
                g.nodes.iter().map(|x| x.to_decimal_string(digits)).collect(),
                g.weights().iter().map(|x| x.to_decimal_string(digits)).collect(),
            )
        }
        Precision::Extended(_) => {
            let g = gauss_rule_from_moments::<BigReal>(&functional, n, &prec)?;
            (
                g.nodes.iter().map(|x| x.to_decimal_string(digits)).collect(),
                g.weights().iter().map(|x| x.to_decimal_string(digits)).collect(),
            )
        }
    };
    let mut table = Table::new(vec!["index".into(), "node".into(), "weight".into()]);
    for (i, (x, w)) in nodes.iter().zip(&weights).enumerate() {
        table.push(vec![(i + 1).to_string(), x.clone(), w.clone()]);
        println!("{:>3}  {x}  {w}", i + 1);
    }
    let mut manifest = run.manifest("gauss");
    manifest.precision.fixed_bits = Some(prec.precision.bits());
    let csv = run.write(&table, &manifest)?;
    println!("wrote {}", csv.display());
    Ok(())
}

fn wce_at<S: Scalar>(run: &Run, prec: &PrecisionConfig) -> Result<(Vec<String>, String, Option<f64>), CliError> {
    let cfg = &run.cfg;
    let l = cfg.kernel_length_scale()?;
    let k = cfg.kernel(Some(l))?;
    let functional = cfg.functional()?;
    let points = cfg.point_set()?;
    let digits = prec.precision.decimal_digits();
    let p = prec.precision;
    let (weights, report, condition) = match &cfg.points.weights {
        Some(w) => {
            let w: Vec<S> = w.iter().map(|v| S::from_f64(*v, p)).collect();
            let rule = CubatureRule::new(points, w)?;
            let rep = worst_case_error(&k, &functional, &rule, prec)?;
            (rule.weights().to_vec(), rep, None)
        }
        None => {
            let (sol, rep) = optimal_rule_with_error::<S>(&k, &functional, &points, prec)?;
            (sol.weights().to_vec(), rep, Some(sol.condition_estimate))
        }
    };
    Ok((
        weights.iter().map(|w| w.to_decimal_string(digits)).collect(),
        report.wce.to_decimal_string(digits),
        condition,
    ))
}

fn wce(run: &Run) -> Result<(), CliError> {
    let l = run.cfg.kernel_length_scale()?;
    let n = run.cfg.point_set()?.len();
    let prec = run.policy.resolve(n, l)?;
    let (weights, wce, condition) = match prec.precision {
        Precision::Machine => wce_at::<f64>(run, &prec)?,
        Precision::Extended(_) => wce_at::<BigReal>(run, &prec)?,
    };
    let mut header = vec!["length_scale".to_string()];
    header.extend((1..=n).map(|i| format!("w{i}")));
    header.extend(["wce", "condition", "bits"].iter().map(|s| s.to_string()));
    let mut row = vec![output::f64_cell(l)];
    row.extend(weights.iter().cloned());
    row.push(wce.clone());
    row.push(condition.map_or(String::new(), output::f64_cell));
    row.push(prec.precision.bits().to_string());
    let mut table = Table::new(header);
    table.push(row);
    let mut manifest = run.manifest("wce");
    manifest.precision.decisions = vec![PrecisionDecision { length_scale: l, bits: prec.precision.bits() }];
    let csv = run.write(&table, &manifest)?;
    println!("wce = {wce}");
    println!("weights = [{}]", weights.join(", "));
    println!("wrote {}", csv.display());
    Ok(())
}

fn check_unisolvent(run: &Run) -> Result<(), CliError> {
    let points = run.cfg.point_set()?;
    let degree = run.cfg.degree()?;
    // Without a length scale, `auto` classifies at machine precision.
    let prec = match run.policy {
        PrecisionPolicy::Auto | PrecisionPolicy::Machine => PrecisionConfig::machine(),
        PrecisionPolicy::Bits(b) => PrecisionConfig::extended(b)?,
    };
    let status = match prec.precision {
        Precision::Machine => unisolvency_check::<f64>(&points, degree, &prec)?,
        Precision::Extended(_) => unisolvency_check::<BigReal>(&points, degree, &prec)?,
    };
    match status {
        Unisolvency::Unisolvent { condition } => {
            println!("unisolvent for degree {degree} at {} (condition {condition:.3e})", prec.precision);
            Ok(())
        }
        Unisolvency::IllConditioned { condition } => Err(CliError::Numerical(flatlimit::Error::Internal(format!(
            "ill-conditioned for degree {degree} at {}: condition {condition:.3e}",
            prec.precision
        )))),
        Unisolvency::NotUnisolvent => Err(CliError::Numerical(flatlimit::Error::NotUnisolvent { degree: degree as usize })),
    }
}

/// Convenience for tests: parse arguments and run.
pub fn run_args<I, T>(args: I, env_precision: Option<String>) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
    run_with_env(cli, env_precision)
}
