use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use dcws_core::harness::{
    aliasing_selftest, oracle_agreement, output, rate_table, sweep_k, ExperimentConfig, NoiseSpec,
};
use dcws_core::Error;

#[derive(Parser)]
#[command(name = "dcws", version, about = "Distributed compressed wideband spectrum sensing simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; missing fields take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output directory for CSVs; without it results go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Comma-separated node counts.
    #[arg(long, global = true, value_delimiter = ',')]
    nodes: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pu_count: Option<usize>,
    #[arg(long, global = true, conflicts_with = "sigma_w")]
    snr_db: Option<f64>,
    #[arg(long, global = true)]
    sigma_w: Option<f64>,
    /// Fixed operating threshold instead of the pilot's choice.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    fold_symmetry: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Full campaign: trials, aggregate, ROC and rate CSVs.
    Run,
    /// Per-trial and per-K aggregate CSVs.
    SweepK,
    /// ROC curves per K.
    Roc,
    /// Sampling-rate table.
    Rates,
    /// Time-domain sampler against the aliasing model.
    SelftestAliasing {
        #[arg(long, default_value_t = 15)]
        subbands: usize,
        #[arg(long, default_value_t = 2)]
        users: usize,
        #[arg(long, default_value_t = 64)]
        oversample: usize,
        #[arg(long, default_value_t = 3)]
        periods: usize,
        #[arg(long, default_value_t = 100)]
        seeds: usize,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Solver against exhaustive support enumeration.
    OracleCheck {
        #[arg(long, default_value_t = 15)]
        subbands: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        users: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        seeds: usize,
        #[arg(long, default_value_t = 99)]
        min_agree: usize,
    },
    /// Print the effective config as JSON.
    Config,
}

enum Failure {
    Lib(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn load_config(c: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.master_seed = s;
    }
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    if let Some(n) = &c.nodes {
        cfg.nodes = n.clone();
    }
    if let Some(j) = c.pu_count {
        cfg.pu_count = j;
    }
    if let Some(db) = c.snr_db {
        cfg.noise = NoiseSpec::SnrDb(db);
    }
    if let Some(s) = c.sigma_w {
        cfg.noise = NoiseSpec::SigmaW(s);
    }
    if c.lambda.is_some() {
        cfg.lambda.operating = c.lambda;
    }
    if c.fold_symmetry {
        cfg.solver.fold_symmetry = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(
    out: Option<&Path>,
    name: &str,
    write: impl FnOnce(&mut dyn Write) -> dcws_core::Result<()>,
) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(name);
            let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
            write(&mut f)?;
            f.flush()?;
            info!("wrote {}", path.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let c = &cli.common;
    if let Some(n) = c.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    }
    let out = c.out.as_deref();

    match cli.command {
        Command::Config => {
            println!("{}", load_config(c)?.to_json());
        }
        Command::Rates => {
            let t = rate_table(&load_config(c)?)?;
            emit(out, "rates.csv", |w| output::write_rates(w, &t))?;
        }
        Command::Run => {
            let report = sweep_k(&load_config(c)?)?;
            match out {
                Some(dir) => output::write_campaign(dir, &report)?,
                None => output::write_aggregate(std::io::stdout().lock(), &report.per_k)?,
            }
        }
        Command::SweepK => {
            let report = sweep_k(&load_config(c)?)?;
            if out.is_some() {
                emit(out, "trials.csv", |w| output::write_trials(w, &report.trials))?;
            }
            emit(out, "aggregate.csv", |w| output::write_aggregate(w, &report.per_k))?;
        }
        Command::Roc => {
            let report = sweep_k(&load_config(c)?)?;
            emit(out, "roc.csv", |w| output::write_roc(w, &report.roc))?;
        }
        Command::SelftestAliasing {
            subbands,
            users,
            oversample,
            periods,
            seeds,
            tolerance,
        } => {
            let start = std::time::Instant::now();
            let s = aliasing_selftest(subbands, users, oversample, periods, seeds)?;
            let pass = s.max_rel_error <= tolerance;
            println!(
                "subbands={} seeds={} max_rel_error={} mean_rel_error={} elapsed_s={:.3} {}",
                s.subbands,
                s.seeds,
                output::fmt_g9(s.max_rel_error),
                output::fmt_g9(s.mean_rel_error),
                start.elapsed().as_secs_f64(),
                if pass { "PASS" } else { "FAIL" }
            );
            if !pass {
                return Err(Failure::Check(format!(
                    "aliasing error {} above {tolerance}",
                    s.max_rel_error
                )));
            }
        }
        Command::OracleCheck {
            subbands,
            users,
            seeds,
            min_agree,
        } => {
            let mut failed = Vec::new();
            for j in users {
                let s = oracle_agreement(subbands, j, seeds)?;
                let pass = s.support_matches >= min_agree && s.max_value_diff <= 1e-6;
                println!(
                    "subbands={} J={} K={} agree={}/{} max_value_diff={} {}",
                    s.subbands,
                    j,
                    8 * j,
                    s.support_matches,
                    s.instances,
                    output::fmt_g9(s.max_value_diff),
                    if pass { "PASS" } else { "FAIL" }
                );
                if !pass {
                    failed.push(j);
                }
            }
            if !failed.is_empty() {
                return Err(Failure::Check(format!("oracle disagreement for J in {failed:?}")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("dcws: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("dcws: {e}");
            ExitCode::from(match e {
                Error::Config(_)
                | Error::InvalidPartition(_)
                | Error::TooManyUsers { .. }
                | Error::InvalidParameter(_) => 2,
                Error::Io(_) => 1,
                Error::Numerical(_) | Error::DimensionMismatch { .. } | Error::CombinatorialGuard(_) => 3,
            })
        }
    }
}
