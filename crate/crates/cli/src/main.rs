use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;

use config::RunConfig;
use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "heatwave", version, about = "Fit, simulate and check a Markov-switching heat-wave model")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Maximum worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Station file -> JJA segment CSV and seasonal-curve CSV.
    Preprocess {
        /// ECA&D TX file or two-column CSV (date, °C).
        input: Option<PathBuf>,
        #[arg(long)]
        from: Option<i32>,
        #[arg(long)]
        to: Option<i32>,
        /// Treat suspect-quality values as missing.
        #[arg(long)]
        drop_suspect: bool,
        /// Skip de-seasonalization.
        #[arg(long)]
        raw: bool,
        /// Fixed spline smoothing parameter.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Segment CSV -> posterior samples, state probabilities, traces.
    Fit {
        segments: PathBuf,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        burnin: Option<usize>,
        #[arg(long)]
        thin: Option<usize>,
    },
    /// Posterior samples -> simulated summers and heat-wave definition comparison.
    Simulate {
        samples: PathBuf,
        /// Observed segments; fixes the Huth thresholds.
        #[arg(long)]
        observed: Option<PathBuf>,
        /// State draws from `fit`, for retrospective summaries of the record.
        #[arg(long, requires = "observed")]
        states: Option<PathBuf>,
        #[arg(long)]
        summers_per_draw: Option<usize>,
        #[arg(long)]
        huth_t1: Option<f64>,
        #[arg(long)]
        huth_t2: Option<f64>,
        /// Also write every simulated day and detected event.
        #[arg(long)]
        write_summers: bool,
    },
    /// Exploratory dependence diagnostics; with samples, a posterior predictive check.
    Diagnose {
        segments: PathBuf,
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        ppc_summers_per_draw: Option<usize>,
    },
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(cli.global.config.as_deref())?;
    let g = &cli.global;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(o) = &g.out {
        cfg.out = o.clone();
    }
    if let Some(t) = g.threads {
        cfg.threads = t;
    }
    match &cli.command {
        Command::Preprocess { input, from, to, drop_suspect, raw, lambda } => {
            let p = &mut cfg.preprocess;
            if input.is_some() {
                p.input = input.clone();
            }
            p.year_from = from.unwrap_or(p.year_from);
            p.year_to = to.unwrap_or(p.year_to);
            p.drop_suspect |= drop_suspect;
            if *raw {
                p.deseasonalize = false;
            }
            if lambda.is_some() {
                p.lambda = *lambda;
            }
        }
        Command::Fit { iterations, burnin, thin, .. } => {
            let m = &mut cfg.mcmc;
            m.n_iterations = iterations.unwrap_or(m.n_iterations);
            m.n_burnin = burnin.unwrap_or(m.n_burnin);
            m.thinning = thin.unwrap_or(m.thinning);
        }
        Command::Simulate { summers_per_draw, huth_t1, huth_t2, write_summers, .. } => {
            let s = &mut cfg.generator;
            s.summers_per_draw = summers_per_draw.unwrap_or(s.summers_per_draw);
            if huth_t1.is_some() {
                s.huth_t1 = *huth_t1;
            }
            if huth_t2.is_some() {
                s.huth_t2 = *huth_t2;
            }
            s.write_summers |= write_summers;
        }
        Command::Diagnose { ppc_summers_per_draw, .. } => {
            let d = &mut cfg.diagnostics;
            d.ppc_summers_per_draw = ppc_summers_per_draw.unwrap_or(d.ppc_summers_per_draw);
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = resolve(&cli)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Preprocess { .. } => commands::preprocess(&cfg),
        Command::Fit { segments, .. } => commands::fit(&cfg, &segments),
        Command::Simulate { samples, observed, states, .. } => {
            commands::simulate(&cfg, &samples, observed.as_deref(), states.as_deref())
        }
        Command::Diagnose { segments, samples, .. } => commands::diagnose(&cfg, &segments, samples.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
