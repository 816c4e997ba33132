//! Command-line front end.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::optimizer::stationarity;

use super::config::{RunConfig, Scheme};
use super::io::{write_goldens, write_metrics, write_soundness, write_sweep, write_timing, write_traces, MetricsWriter};
use super::outage::estimate_outage;
use super::validation::{bernstein_soundness, channel_goldens, scalar_boundaries};
use super::{realize_drop, run_baseline, sweep};

#[derive(Parser, Debug)]
#[command(name = "ris-secrecy", version, about = "Secrecy-outage design and evaluation for hybrid RIS downlinks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Run configuration (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overrides `experiment.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte-Carlo trials, overrides `experiment.trials`.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads (default: RAYON_NUM_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Full-size antenna and surface dimensions instead of the desk-scale ones.
    #[arg(long, global = true)]
    full_scale: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize the proposed scheme on one drop and estimate its outage.
    Run,
    /// Run the configured experiment sweep.
    Sweep,
    /// Monte-Carlo soundness suite of the Bernstein surrogate.
    ValidateBernstein,
    /// Check pathloss and building-entry-loss test vectors.
    ChannelGoldens,
}

fn load_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.experiment.seed = s;
    }
    if let Some(t) = c.trials {
        cfg.experiment.trials = t;
    }
    if let Some(o) = &c.out {
        cfg.output.dir = o.clone();
    }
    if c.full_scale {
        cfg.full_scale = true;
        cfg.apply_full_scale();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn out_dir(c: &Common, cfg: Option<&RunConfig>) -> Result<PathBuf> {
    let dir = c.out.clone().or_else(|| cfg.map(|c| c.output.dir.clone())).unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn cmd_run(c: &Common) -> Result<i32> {
    let cfg = load_config(c)?;
    let dir = out_dir(c, Some(&cfg))?;
    let start = Instant::now();
    let seed = cfg.experiment.seed;
    let drop = realize_drop(&cfg, seed, 0)?;
    let problem = cfg.problem(drop.ensemble.user_count());
    let res = run_baseline(Scheme::Proposed, &drop.ensemble, &cfg, drop.seed)?;
    let mut report = res.report.ok_or_else(|| Error::Solver("optimizer produced no report".into()))?;
    report.stationarity = Some(stationarity(&report, &drop.ensemble, &problem, &cfg.optimizer)?);
    let est = estimate_outage(&report.design, &drop.ensemble, &problem.params, cfg.experiment.trials, drop.seed)?;
    let wall = start.elapsed();

    fs::write(dir.join("report.json"), report.to_json()?)?;
    report.write_history(create(&dir, "history.csv")?)?;
    let mut m = MetricsWriter::new(create(&dir, "outage.csv")?, seed)?;
    m.estimate(cfg.impairments.p_max_dbm, Scheme::Proposed.name(), &est)?;
    m.record(cfg.impairments.p_max_dbm, Scheme::Proposed.name(), None, "iterations", report.iterations as f64, None)?;
    m.finish()?;
    fs::write(dir.join("timing.csv"), format!("stage,wall_time_s\nrun,{:.6}\n", wall.as_secs_f64()))?;

    println!("surrogate cost {:.6} -> {:.6} in {} iterations (converged: {})", report.initial_cost, report.final_cost, report.iterations, report.converged);
    println!("certified users: {}/{}", report.certified.iter().filter(|c| **c).count(), report.certified.len());
    println!("weighted outage {:.4} +- {:.4} over {} trials", est.weighted, est.weighted_stderr, est.trials);
    for (k, p) in est.p_out.iter().enumerate() {
        println!("  user {k}: p_out {p:.4} (secrecy {:.4}, qos {:.4})", est.secrecy[k], est.qos[k]);
    }
    println!("outputs in {}", dir.display());
    Ok(0)
}

fn cmd_sweep(c: &Common) -> Result<i32> {
    let cfg = load_config(c)?;
    let dir = out_dir(c, Some(&cfg))?;
    let res = sweep(&cfg);
    write_sweep(create(&dir, "sweep.csv")?, &res.points)?;
    write_metrics(create(&dir, "metrics.csv")?, &res.points, cfg.experiment.seed)?;
    write_timing(create(&dir, "timing.csv")?, &res.points)?;
    if !res.traces.is_empty() {
        write_traces(create(&dir, "traces.csv")?, &res.traces)?;
    }
    let mut failed = false;
    for p in &res.points {
        let w = p.estimate.as_ref().map(|e| format!("{:.4} +- {:.4}", e.weighted, e.weighted_stderr)).unwrap_or_else(|| "-".into());
        println!("{:>8} {:<13} weighted outage {w}", if p.grid.is_nan() { "-".into() } else { p.grid.to_string() }, p.scheme.name());
        if let Some(e) = &p.error {
            eprintln!("  failure: {e}");
            failed = true;
        }
    }
    println!("outputs in {}", dir.display());
    Ok(if failed { 3 } else { 0 })
}

fn cmd_bernstein(c: &Common) -> Result<i32> {
    let dir = out_dir(c, None)?;
    let samples = c.trials.unwrap_or(100_000);
    let cases = bernstein_soundness(100, samples, c.seed.unwrap_or(1))?;
    write_soundness(create(&dir, "bernstein.csv")?, &cases)?;
    let mut ok = true;
    for b in scalar_boundaries()? {
        let pass = (b.located - b.bernstein).abs() <= 1e-6;
        ok &= pass;
        println!("scalar eps={}: boundary c >= {:.6} (exact chance constraint c >= {:.6}) {}", b.epsilon, b.bernstein, b.exact, if pass { "ok" } else { "MISMATCH" });
    }
    let fails: Vec<_> = cases.iter().filter(|c| !c.pass).collect();
    for f in &fails {
        println!("block {} (n={}, eps={}): violation {:.5} > {:.5}", f.index, f.n, f.epsilon, f.violation, f.epsilon + 3.0 * f.stderr);
    }
    println!("{}/{} random boundary blocks within eps + 3 stderr", cases.len() - fails.len(), cases.len());
    ok &= fails.is_empty();
    Ok(if ok { 0 } else { 1 })
}

fn cmd_goldens(c: &Common) -> Result<i32> {
    let dir = out_dir(c, None)?;
    let checks = channel_goldens()?;
    write_goldens(create(&dir, "channel_goldens.csv")?, &checks)?;
    for g in &checks {
        println!("{:<26} fc={:<5} expected {:>9.4} dB computed {:>9.4} dB {}", g.kind, g.fc_ghz, g.expected_db, g.computed_db, if g.pass { "ok" } else { "MISMATCH" });
    }
    Ok(if checks.iter().all(|g| g.pass) { 0 } else { 1 })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        _ => 3,
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns 0 on success, 2 on usage or configuration errors and 3 on solver
/// failures.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = cli.common.threads {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("error: cannot start {n} worker threads");
            return 2;
        }
    }
    let res = match cli.command {
        Command::Run => cmd_run(&cli.common),
        Command::Sweep => cmd_sweep(&cli.common),
        Command::ValidateBernstein => cmd_bernstein(&cli.common),
        Command::ChannelGoldens => cmd_goldens(&cli.common),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
