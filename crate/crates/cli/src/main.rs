//! Command-line front end: model construction, negativity, bounds, dynamics,
//! rate sweeps, experiment scans, and oracle cross-checks, driven by strict
//! JSON configs and emitting CSV/JSON with reproducibility metadata.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use fermineg::bounds::bound_report;
use fermineg::experiments::{
    dynamic_rate_sweep, static_area_law_sweep, temperature_sweep, trajectory_sweep, DynamicInit,
};
use fermineg::gaussian::{random_mixed_covariance, Bipartition};
use fermineg::lindblad::{dgamma_dt, evolve_exact};
use fermineg::negativity::{negativity, negativity_via_twisted};
use fermineg::oracle::{oracle_negativity, MAX_TRANSPOSE_MODES};
use fermineg::rate::{pab, rate_bounds, rate_given_pab};
use fermineg::Error as CoreError;

use config::*;
use output::{g17, opt_g17, sha256_hex, write_text, CsvDocument};

/// CLI-level error with the documented exit codes: 2 for configuration
/// problems, 3 for numerical failures.
#[derive(Debug)]
pub enum AppError {
    Config(String),
    Numerical(CoreError),
}

impl AppError {
    /// Core errors that arise while *building* inputs are config errors.
    fn config_from_core(e: CoreError) -> Self {
        AppError::Config(e.to_string())
    }

    fn exit_code(&self) -> ExitCode {
        match self {
            AppError::Config(_) => ExitCode::from(2),
            AppError::Numerical(_) => ExitCode::from(3),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            AppError::Config(_) => "config",
            AppError::Numerical(_) => "numerical",
        }
    }

    fn message(&self) -> String {
        match self {
            AppError::Config(msg) => msg.clone(),
            AppError::Numerical(e) => e.to_string(),
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::SizeCap { .. } => AppError::Config(e.to_string()),
            other => AppError::Numerical(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Pencil,
    Twisted,
    Oracle,
}

#[derive(Parser)]
#[command(
    name = "fermineg",
    version,
    about = "Entanglement negativity of fermionic Gaussian states"
)]
struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweep commands (output is identical for any count).
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Negativity of a single state (JSON: value, roots, bounds).
    Negativity {
        /// Computation route for the reported value.
        #[arg(long, value_enum, default_value_t = Method::Pencil)]
        method: Method,
    },
    /// Trace-log bounds against the exact value over a Gibbs beta grid (CSV).
    Bounds,
    /// Dissipative trajectory: t, negativity, purity, off-diagonal norm (CSV).
    Evolve,
    /// Negativity change rate and its LO/inter split across cut sizes (CSV).
    Rate,
    /// Simple-bound temperature sweep (CSV, one row per beta).
    SweepTemperature,
    /// Static area-law scan over system sizes (CSV).
    SweepAreaLaw,
    /// Dynamical rate scan over system sizes (CSV).
    SweepDynamic,
    /// Pencil-vs-dense-oracle comparison on random states (CSV).
    OracleCheck,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = serde_json::json!({
                "error": err.message(),
                "kind": err.kind(),
            });
            eprintln!("{payload}");
            err.exit_code()
        }
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<(String, String), AppError> {
    let path = path.ok_or_else(|| AppError::Config("--config PATH is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
    let hash = sha256_hex(text.as_bytes());
    Ok((text, hash))
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, AppError> {
    serde_json::from_str(text).map_err(|e| AppError::Config(format!("config schema error: {e}")))
}

fn run(cli: &Cli) -> Result<(), AppError> {
    if cli.workers == 0 {
        return Err(AppError::Config("--workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| AppError::Config(format!("cannot build worker pool: {e}")))?;
    let (text, hash) = load_config(cli.config.as_ref())?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Negativity { method } => cmd_negativity(&text, out, *method),
        Command::Bounds => pool.install(|| cmd_bounds(&text, &hash, out, cli.workers)),
        Command::Evolve => pool.install(|| cmd_evolve(&text, &hash, out, cli.workers)),
        Command::Rate => pool.install(|| cmd_rate(&text, &hash, out, cli.workers)),
        Command::SweepTemperature => {
            pool.install(|| cmd_sweep_temperature(&text, &hash, out, cli.workers))
        }
        Command::SweepAreaLaw => {
            pool.install(|| cmd_sweep_area_law(&text, &hash, out, cli.workers))
        }
        Command::SweepDynamic => pool.install(|| cmd_sweep_dynamic(&text, &hash, out, cli.workers)),
        Command::OracleCheck => pool.install(|| cmd_oracle_check(&text, &hash, out, cli.workers)),
    }
}

fn cmd_negativity(text: &str, out: Option<&Path>, method: Method) -> Result<(), AppError> {
    let cfg: NegativityConfig = parse(text)?;
    let gamma = cfg.state.build()?;
    let part = cfg.partition.build(gamma.n_modes())?;
    let pencil = negativity(&gamma, &part).map_err(AppError::from)?;
    let value = match method {
        Method::Pencil => pencil.value,
        Method::Twisted => negativity_via_twisted(&gamma, &part).map_err(AppError::from)?,
        Method::Oracle => oracle_negativity(&gamma, &part).map_err(AppError::from)?,
    };
    let bounds = bound_report(&gamma, &part).map_err(AppError::from)?;
    let method_name = match method {
        Method::Pencil => "pencil",
        Method::Twisted => "twisted",
        Method::Oracle => "oracle",
    };
    // Flat result shape: value (per the chosen method), pencil roots and
    // infinite count, then the bound report.
    let mut payload = serde_json::to_value(&pencil)
        .map_err(|e| AppError::Config(format!("cannot serialize output: {e}")))?;
    payload["method"] = serde_json::json!(method_name);
    payload["value"] = serde_json::json!(value);
    payload["bounds"] = serde_json::to_value(&bounds)
        .map_err(|e| AppError::Config(format!("cannot serialize output: {e}")))?;
    let rendered = serde_json::to_string_pretty(&payload)
        .map_err(|e| AppError::Config(format!("cannot serialize output: {e}")))?;
    write_text(out, &format!("{rendered}\n"))
}

fn cmd_bounds(text: &str, hash: &str, out: Option<&Path>, workers: usize) -> Result<(), AppError> {
    let cfg: BoundsConfig = parse(text)?;
    let h = cfg.model.build()?;
    let part = cfg.partition.build(h.n_modes())?;
    let betas = cfg.betas.build()?;
    let rows: Result<Vec<Vec<String>>, AppError> = betas
        .par_iter()
        .map(|&beta| {
            let g = fermineg::gaussian::gibbs_covariance(&h, beta).map_err(AppError::from)?;
            let e = negativity(&g, &part).map_err(AppError::from)?.value;
            let report = bound_report(&g, &part).map_err(AppError::from)?;
            Ok(vec![
                g17(beta),
                g17(report.lower),
                g17(e),
                opt_g17(report.upper),
                report.upper_applicable.to_string(),
            ])
        })
        .collect();
    let doc = CsvDocument {
        command: "bounds".into(),
        config_sha256: hash.into(),
        seed: None,
        workers,
        header: ["beta", "lower", "exact", "upper", "applicable"]
            .map(String::from)
            .to_vec(),
        rows: rows?,
    };
    write_text(out, &doc.render())
}

fn cmd_evolve(text: &str, hash: &str, out: Option<&Path>, workers: usize) -> Result<(), AppError> {
    let cfg: EvolveConfig = parse(text)?;
    let gamma0 = cfg.state.build()?;
    let gen = cfg.generator.build(gamma0.n_modes())?;
    let part = cfg.partition.build(gamma0.n_modes())?;
    let mut times = cfg.times.build()?;
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let parts = gen.parts();
    let chunk = times.len().div_ceil(workers.max(1));
    let rows: Result<Vec<Vec<Vec<String>>>, AppError> = times
        .par_chunks(chunk.max(1))
        .map(|window| {
            let rows = trajectory_sweep(&gamma0, &parts, window, &part).map_err(AppError::from)?;
            Ok(rows
                .into_iter()
                .map(|r| {
                    vec![
                        g17(r.t),
                        g17(r.negativity),
                        g17(r.purity),
                        g17(r.gamma_ab_frobenius),
                    ]
                })
                .collect())
        })
        .collect();
    let doc = CsvDocument {
        command: "evolve".into(),
        config_sha256: hash.into(),
        seed: cfg.state.seed(),
        workers,
        header: ["t", "negativity", "purity", "gamma_ab_frobenius"]
            .map(String::from)
            .to_vec(),
        rows: rows?.into_iter().flatten().collect(),
    };
    write_text(out, &doc.render())
}

fn cmd_rate(text: &str, hash: &str, out: Option<&Path>, workers: usize) -> Result<(), AppError> {
    let cfg: RateConfig = parse(text)?;
    let gamma0 = cfg.state.build()?;
    let n = gamma0.n_modes();
    let gen = cfg.generator.build(n)?;
    let cuts: Vec<usize> = match &cfg.cuts {
        Some(cuts) => cuts.clone(),
        None => (1..n).collect(),
    };
    if cuts.is_empty() {
        return Err(AppError::Config(
            "rate sweep needs a non-empty cut list".into(),
        ));
    }
    if cuts.iter().any(|&c| c == 0 || c >= n) {
        return Err(AppError::Config(format!("cuts must lie in 1..{n}")));
    }
    let gamma = if cfg.evolve_time > 0.0 {
        evolve_exact(&gamma0, &gen.parts(), cfg.evolve_time).map_err(AppError::from)?
    } else {
        gamma0
    };
    let parts = gen.parts();
    let rows: Result<Vec<Vec<String>>, AppError> = cuts
        .par_iter()
        .map(|&n_a| {
            let part = Bipartition::contiguous(n, n_a).map_err(AppError::config_from_core)?;
            let p = pab(&gamma, &part).map_err(AppError::from)?;
            let total = rate_given_pab(&p, &dgamma_dt(&gamma, &parts)).map_err(AppError::from)?;
            let lo = rate_given_pab(&p, &dgamma_dt(&gamma, &parts.block_diagonal(&part)))
                .map_err(AppError::from)?;
            let bounds = rate_bounds(&gen, &part).map_err(AppError::from)?;
            Ok(vec![
                n_a.to_string(),
                g17(total),
                g17(lo),
                g17(total - lo),
                g17(bounds.increase_bound),
                g17(bounds.magnitude_bound),
            ])
        })
        .collect();
    let doc = CsvDocument {
        command: "rate".into(),
        config_sha256: hash.into(),
        seed: cfg.state.seed(),
        workers,
        header: [
            "n_a",
            "rate_total",
            "rate_lo",
            "rate_inter",
            "increase_bound",
            "magnitude_bound",
        ]
        .map(String::from)
        .to_vec(),
        rows: rows?,
    };
    write_text(out, &doc.render())
}

fn cmd_sweep_temperature(
    text: &str,
    hash: &str,
    out: Option<&Path>,
    workers: usize,
) -> Result<(), AppError> {
    let cfg: SweepTemperatureConfig = parse(text)?;
    let h = cfg.model.build()?;
    let n = h.n_modes();
    let part = match cfg.cut {
        Some(cut) => Bipartition::contiguous(n, cut).map_err(AppError::config_from_core)?,
        None => Bipartition::half_chain(n).map_err(AppError::config_from_core)?,
    };
    let betas = cfg.betas.build()?;
    let rows: Result<Vec<Vec<String>>, AppError> = betas
        .par_iter()
        .map(|&beta| {
            let rows = temperature_sweep(&h, &[beta], &part).map_err(AppError::from)?;
            let r = &rows[0];
            Ok(vec![
                g17(r.beta),
                g17(r.lower),
                g17(r.exact),
                opt_g17(r.upper),
                r.applicable.to_string(),
            ])
        })
        .collect();
    let doc = CsvDocument {
        command: "sweep-temperature".into(),
        config_sha256: hash.into(),
        seed: None,
        workers,
        header: ["beta", "lower", "exact", "upper", "applicable"]
            .map(String::from)
            .to_vec(),
        rows: rows?,
    };
    write_text(out, &doc.render())
}

fn cmd_sweep_area_law(
    text: &str,
    hash: &str,
    out: Option<&Path>,
    workers: usize,
) -> Result<(), AppError> {
    let cfg: SweepAreaLawConfig = parse(text)?;
    if cfg.sizes.is_empty() {
        return Err(AppError::Config(
            "area-law sweep needs a non-empty size list".into(),
        ));
    }
    let rows: Result<Vec<Vec<String>>, AppError> = cfg
        .sizes
        .par_iter()
        .map(|&n| {
            let rows =
                static_area_law_sweep(&[n], cfg.alpha, cfg.t, cfg.beta).map_err(AppError::from)?;
            let r = &rows[0];
            Ok(vec![
                n.to_string(),
                g17(r.exact),
                g17(r.gamma_ab_frobenius_sq),
                g17(r.clustering_c),
                g17(r.frobenius_certificate),
            ])
        })
        .collect();
    let doc = CsvDocument {
        command: "sweep-area-law".into(),
        config_sha256: hash.into(),
        seed: None,
        workers,
        header: [
            "n",
            "exact",
            "gamma_ab_frobenius_sq",
            "clustering_c",
            "frobenius_certificate",
        ]
        .map(String::from)
        .to_vec(),
        rows: rows?,
    };
    write_text(out, &doc.render())
}

fn cmd_sweep_dynamic(
    text: &str,
    hash: &str,
    out: Option<&Path>,
    workers: usize,
) -> Result<(), AppError> {
    let cfg: SweepDynamicConfig = parse(text)?;
    if cfg.sizes.is_empty() {
        return Err(AppError::Config(
            "dynamic sweep needs a non-empty size list".into(),
        ));
    }
    let init = match cfg.init {
        DynamicInitSpec::Cdw => DynamicInit::Cdw,
        DynamicInitSpec::Random { nu_max } => DynamicInit::Random { nu_max },
    };
    let rows: Result<Vec<Vec<String>>, AppError> = cfg
        .sizes
        .par_iter()
        .map(|&n| {
            let rows = dynamic_rate_sweep(
                &[n],
                cfg.alpha,
                cfg.t,
                cfg.loss_rate,
                init,
                cfg.samples,
                cfg.seed,
            )
            .map_err(AppError::from)?;
            let r = &rows[0];
            Ok(vec![
                n.to_string(),
                r.samples.to_string(),
                g17(r.rate_mean),
                g17(r.rate_min),
                g17(r.rate_max),
                g17(r.lo_mean),
                g17(r.inter_mean),
                g17(r.increase_bound),
                g17(r.magnitude_bound),
                r.flagged.to_string(),
            ])
        })
        .collect();
    let doc = CsvDocument {
        command: "sweep-dynamic".into(),
        config_sha256: hash.into(),
        seed: Some(cfg.seed),
        workers,
        header: [
            "n",
            "samples",
            "rate_mean",
            "rate_min",
            "rate_max",
            "lo_mean",
            "inter_mean",
            "increase_bound",
            "magnitude_bound",
            "flagged",
        ]
        .map(String::from)
        .to_vec(),
        rows: rows?,
    };
    write_text(out, &doc.render())
}

fn cmd_oracle_check(
    text: &str,
    hash: &str,
    out: Option<&Path>,
    workers: usize,
) -> Result<(), AppError> {
    let cfg: OracleCheckConfig = parse(text)?;
    if cfg.n_modes < 2 || cfg.n_modes > MAX_TRANSPOSE_MODES {
        return Err(AppError::Config(format!(
            "oracle check supports 2..={MAX_TRANSPOSE_MODES} modes, got {}",
            cfg.n_modes
        )));
    }
    if cfg.samples == 0 {
        return Err(AppError::Config(
            "oracle check needs at least one sample".into(),
        ));
    }
    let rows: Result<Vec<Vec<String>>, AppError> = (0..cfg.samples)
        .into_par_iter()
        .map(|sample| {
            let seed = cfg.seed.wrapping_add(sample as u64);
            let g = random_mixed_covariance(cfg.n_modes, seed, cfg.nu_max)
                .map_err(AppError::config_from_core)?;
            // deterministic per-sample cut: rotate through the nontrivial ones
            let n_a = 1 + sample % (cfg.n_modes - 1);
            let part =
                Bipartition::contiguous(cfg.n_modes, n_a).map_err(AppError::config_from_core)?;
            let e_pencil = negativity(&g, &part).map_err(AppError::from)?.value;
            let e_oracle = oracle_negativity(&g, &part).map_err(AppError::from)?;
            Ok(vec![
                sample.to_string(),
                n_a.to_string(),
                g17(e_pencil),
                g17(e_oracle),
                g17((e_pencil - e_oracle).abs()),
            ])
        })
        .collect();
    let rows = rows?;
    let max_diff = rows
        .iter()
        .map(|r| r[4].parse::<f64>().unwrap_or(f64::NAN))
        .fold(0.0f64, f64::max);
    let mut doc = CsvDocument {
        command: "oracle-check".into(),
        config_sha256: hash.into(),
        seed: Some(cfg.seed),
        workers,
        header: ["sample", "n_a", "e_pencil", "e_oracle", "abs_diff"]
            .map(String::from)
            .to_vec(),
        rows,
    };
    doc.rows.push(vec![
        "max".to_string(),
        "-".to_string(),
        "-".to_string(),
        "-".to_string(),
        g17(max_diff),
    ]);
    write_text(out, &doc.render())
}
