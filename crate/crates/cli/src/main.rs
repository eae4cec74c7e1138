use anyhow::{Context, Result};
use clap::Parser;
use gramscope_cli::output::{manifest, report, write_all, RunInfo};
use gramscope_cli::{run, Experiment, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

/// Runs one gramscope experiment and writes CSVs, a report and a manifest.
///
/// The worker thread count is read from GRAMSCOPE_THREADS.
#[derive(Parser, Debug)]
#[command(name = "gramscope", version)]
struct Args {
    experiment: Experiment,
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: gramscope-out/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seeds, overriding the config.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
}

fn threads() -> Result<usize> {
    match std::env::var("GRAMSCOPE_THREADS") {
        Ok(v) => {
            let n: usize = v.trim().parse().with_context(|| format!("GRAMSCOPE_THREADS=`{v}` is not a thread count"))?;
            anyhow::ensure!(n >= 1, "GRAMSCOPE_THREADS must be at least 1");
            Ok(n)
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn main_inner(args: Args) -> Result<bool> {
    let t = Instant::now();
    let threads = threads()?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("starting thread pool")?;
    let bytes = std::fs::read(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seeds) = args.seeds {
        cfg = cfg.with_seeds(seeds)?;
    }
    let outcome = run(args.experiment, &cfg)?;
    let name = args.experiment.name();
    let info = RunInfo { experiment: name, config_bytes: &bytes, seeds: &cfg.seeds, threads, seconds: t.elapsed().as_secs_f64() };
    let mut files: Vec<(String, String)> = Vec::new();
    for s in &outcome.seeds {
        files.extend(s.files.iter().cloned());
    }
    files.extend(outcome.files.iter().cloned());
    files.push(("manifest.txt".into(), manifest(&info)));
    files.push(("report.txt".into(), report(&info, &outcome)));
    let out = args.out.unwrap_or_else(|| PathBuf::from("gramscope-out").join(name));
    write_all(&out, &files)?;
    println!("{name}: {} ({} files in {})", if outcome.pass { "pass" } else { "fail" }, files.len(), out.display());
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
