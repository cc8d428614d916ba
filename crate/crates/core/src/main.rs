//! Command-line front end for the two-hop SWIPT interference-network simulator.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use swipt_ia::channel::RawNetworkConfig;
use swipt_ia::optimizer::{InitMode, OptimizerSettings};
use swipt_ia::sim::{
    run_sweep, run_trial, sweep_csv, trace_csv, Scheme, SweepSpec, SweepVariable,
    DEFAULT_IA_MAX_ITERS, DEFAULT_IA_TOL,
};
use swipt_ia::{
    compute_aggregates, feasible_streams, optimize_ps, run_iterative_ia, sample_channels,
    NetworkConfig,
};

#[derive(Parser)]
#[command(name = "swipt-ia", about = "Two-hop SWIPT interference network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON scenario file; defaults to the built-in symmetric K=3, M=N=L=4 scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and print the report as JSON.
    Single {
        #[command(flatten)]
        common: Common,
        /// Scheme: proposed, random_ps, fixed_ps, or no_ia.
        #[arg(long, default_value = "proposed")]
        scheme: String,
    },
    /// Sweep the per-source transmit power.
    SweepPower {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Comma-separated schemes.
        #[arg(long, default_value = "proposed,random_ps,fixed_ps,no_ia")]
        schemes: String,
        /// Comma-separated power grid (watts).
        #[arg(long, default_value = "0.1,0.25,0.5,1,2,4,8,16")]
        powers: String,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the number of links.
    SweepLinks {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value = "proposed,random_ps,fixed_ps,no_ia")]
        schemes: String,
        /// Comma-separated link counts.
        #[arg(long, default_value = "2,3,4,5,6")]
        links: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace the split-ratio iteration from several initializations on one realization.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Output stem; traces are written as <stem>-<init>.csv. Stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>) -> anyhow::Result<(NetworkConfig, OptimizerSettings)> {
    let Some(path) = path else {
        return Ok((
            NetworkConfig::symmetric(3, 4, 4, 4, 1.0),
            OptimizerSettings::default(),
        ));
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut value: serde_json::Value = serde_json::from_str(&text).context("parsing config JSON")?;
    let optimizer = match value
        .as_object_mut()
        .and_then(|obj| obj.remove("optimizer"))
    {
        Some(v) => serde_json::from_value(v).context("parsing optimizer settings")?,
        None => OptimizerSettings::default(),
    };
    let raw: RawNetworkConfig = serde_json::from_value(value).context("parsing network config")?;
    Ok((raw.build()?, optimizer))
}

fn parse_list<T: FromStr>(text: &str, what: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| anyhow::anyhow!("bad {what} entry '{s}': {e}"))
        })
        .collect()
}

fn write_or_print(csv: &str, out: &Option<PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, csv)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn sweep(
    common: &Common,
    variable: SweepVariable,
    values: Vec<f64>,
    trials: usize,
    schemes: &str,
    out: &Option<PathBuf>,
) -> anyhow::Result<()> {
    let (base, _) = load_config(&common.config)?;
    let spec = SweepSpec {
        variable,
        values,
        trials,
        base,
        schemes: parse_list(schemes, "scheme")?,
    };
    let rows = run_sweep(&spec, common.seed)?;
    write_or_print(&sweep_csv(&rows)?, out)
}

fn convergence(common: &Common, out: &Option<PathBuf>) -> anyhow::Result<()> {
    let (cfg, settings) = load_config(&common.config)?;
    let d = feasible_streams(cfg.m, cfg.n, cfg.k);
    if d == 0 {
        bail!("scenario has no feasible stream count");
    }
    let ch = sample_channels(&cfg, common.seed)?;
    let sol = run_iterative_ia(&cfg, &ch, d, DEFAULT_IA_MAX_ITERS, DEFAULT_IA_TOL)?;
    let agg = compute_aggregates(&cfg, &ch, &sol);
    let inits: [(&str, InitMode, u64); 4] = [
        ("high_snr", InitMode::HighSnr, 0),
        ("fixed_0.5", InitMode::Fixed(0.5), 0),
        ("random_a", InitMode::Random, common.seed.wrapping_add(1)),
        ("random_b", InitMode::Random, common.seed.wrapping_add(2)),
    ];
    for (label, mode, seed) in inits {
        let run_settings = OptimizerSettings {
            init_mode: mode,
            ..settings.clone()
        };
        let (_, trace) = optimize_ps(&cfg, &agg, &run_settings, seed)?;
        let csv = trace_csv(&cfg, &agg, &trace);
        match out {
            Some(stem) => {
                let path = trace_path(stem, label);
                std::fs::write(&path, csv)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            None => {
                println!("# init={label}");
                print!("{csv}");
            }
        }
    }
    Ok(())
}

fn trace_path(stem: &Path, label: &str) -> PathBuf {
    let base = stem.with_extension("");
    let ext = stem.extension().and_then(|e| e.to_str()).unwrap_or("csv");
    PathBuf::from(format!("{}-{label}.{ext}", base.display()))
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Single { common, scheme } => {
            let (cfg, _) = load_config(&common.config)?;
            let scheme = Scheme::from_str(&scheme)?;
            let report = run_trial(&cfg, common.seed, scheme)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::SweepPower {
            common,
            trials,
            schemes,
            powers,
            out,
        } => sweep(
            &common,
            SweepVariable::TransmitPower,
            parse_list(&powers, "power")?,
            trials,
            &schemes,
            &out,
        ),
        Command::SweepLinks {
            common,
            trials,
            schemes,
            links,
            out,
        } => sweep(
            &common,
            SweepVariable::LinkCount,
            parse_list(&links, "link count")?,
            trials,
            &schemes,
            &out,
        ),
        Command::Convergence { common, out } => convergence(&common, &out),
    }
}
