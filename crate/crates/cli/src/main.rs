use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use trigzeros::harness::{
    run_rate_curve, run_theta_convergence, run_validate, run_zero_count_law, with_threads,
    write_outputs, zero_count_table, ExperimentConfig, Kind,
};

/// Zero counts of random trigonometric polynomials.
#[derive(Parser)]
#[command(name = "trigzeros", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample zero counts for every (law, m) and tabulate their means.
    Simulate(Common),
    /// Distances to the limit law against m, with a fitted log-log slope.
    Rate(Common),
    /// Run every validation suite; exits with status 1 if any fails.
    Validate(Common),
    /// Convergence of the discrete map to the continuous one.
    Theta(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config (optional for `validate`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; a `.json` companion is written next to it. Overrides `output_path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn load(args: &Common, kind: Kind) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_path(path)
            .with_context(|| format!("reading config {}", path.display()))?,
        None if kind == Kind::Validate => ExperimentConfig::new(kind),
        None => bail!("--config is required"),
    };
    if cfg.kind != kind {
        bail!(
            "config kind {:?} does not match the subcommand ({:?})",
            cfg.kind,
            kind
        );
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_path = out.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

fn output_path(cfg: &ExperimentConfig) -> Result<&Path> {
    if cfg.output_path.is_empty() {
        bail!("no output path: pass --out or set output_path");
    }
    Ok(Path::new(&cfg.output_path))
}

fn simulate(cfg: &ExperimentConfig) -> Result<()> {
    let path = output_path(cfg)?;
    let samples = run_zero_count_law(cfg)?;
    let table = zero_count_table(&samples, cfg.level);
    let details: Vec<_> = samples
        .iter()
        .map(|s| json!({"law": s.law, "m": s.m(), "flagged": s.flagged, "endpoint_zeros": s.endpoint_zeros, "kac_mean": s.kac_mean}))
        .collect();
    write_outputs(path, cfg, &table, json!({ "samples": details }))?;
    for r in &table.rows {
        println!(
            "{:>16} m={:<6} mean {:.6} ± {:.6}",
            r.law, r.m, r.mean_count, r.se_count
        );
    }
    Ok(())
}

fn rate(cfg: &ExperimentConfig) -> Result<()> {
    let path = output_path(cfg)?;
    let curve = run_rate_curve(cfg)?;
    let fits: Vec<_> = curve
        .fits
        .iter()
        .map(|(law, f)| json!({"law": law, "fit": f}))
        .collect();
    let reference = json!({"surrogate_M": cfg.surrogate_m, "n": curve.reference_n, "mean_count": curve.reference_mean});
    write_outputs(
        path,
        cfg,
        &curve.table,
        json!({ "fits": fits, "reference": reference }),
    )?;
    for r in &curve.table.rows {
        println!(
            "{:>16} m={:<6} {} {:.6} [{:.6}, {:.6}]",
            r.law, r.m, r.metric, r.value, r.ci_low, r.ci_high
        );
    }
    for (law, f) in &curve.fits {
        println!(
            "{law:>16} slope {:.4} [{:.4}, {:.4}] r² {:.4}",
            f.slope, f.slope_ci.0, f.slope_ci.1, f.r_squared
        );
    }
    Ok(())
}

fn theta(cfg: &ExperimentConfig) -> Result<()> {
    let path = output_path(cfg)?;
    let report = run_theta_convergence(cfg)?;
    let extra = json!({"walk_holder_alpha": report.walk_holder_alpha, "walk_holder_seminorm": report.walk_holder_seminorm});
    write_outputs(path, cfg, &report.table, extra)?;
    for r in &report.table.rows {
        println!("{:>12} m={:<6} {:.3e}", r.law, r.m, r.value);
    }
    Ok(())
}

fn validate(cfg: &ExperimentConfig) -> Result<bool> {
    let report = run_validate(cfg)?;
    let text = report.render();
    print!("{text}");
    if !cfg.output_path.is_empty() {
        std::fs::write(&cfg.output_path, &text)
            .with_context(|| format!("writing {}", cfg.output_path))?;
    }
    Ok(report.all_passed())
}

fn run(cli: Cli) -> Result<bool> {
    let (args, kind) = match &cli.command {
        Command::Simulate(a) => (a, Kind::ZeroCountLaw),
        Command::Rate(a) => (a, Kind::RateCurve),
        Command::Validate(a) => (a, Kind::Validate),
        Command::Theta(a) => (a, Kind::ThetaConvergence),
    };
    let cfg = load(args, kind)?;
    with_threads(args.threads, || match kind {
        Kind::ZeroCountLaw => simulate(&cfg).map(|_| true),
        Kind::RateCurve => rate(&cfg).map(|_| true),
        Kind::ThetaConvergence => theta(&cfg).map(|_| true),
        Kind::Validate => validate(&cfg),
    })?
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
