//! CSV formatting, the flat report and staged writes into the output directory.

use crate::experiments::Outcome;
use anyhow::{Context, Result};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// 17 significant digits, round-trips every f64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { text: format!("{}\n", header.join(",")) }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let cells: Vec<String> = cells.into_iter().collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub struct RunInfo<'a> {
    pub experiment: &'a str,
    pub config_bytes: &'a [u8],
    pub seeds: &'a [u64],
    pub threads: usize,
    pub seconds: f64,
}

fn seed_list(seeds: &[u64]) -> String {
    seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

pub fn manifest(info: &RunInfo<'_>) -> String {
    format!(
        "version={}\nexperiment={}\nconfig_sha256={}\nseeds={}\n",
        env!("CARGO_PKG_VERSION"),
        info.experiment,
        sha256_hex(info.config_bytes),
        seed_list(info.seeds)
    )
}

/// Flat `key=value` report. Timing keys are kept out of the CSVs so those
/// stay byte-identical across reruns.
pub fn report(info: &RunInfo<'_>, outcome: &Outcome) -> String {
    let mut s = String::new();
    let status = |p: bool| if p { "pass" } else { "fail" };
    let _ = writeln!(s, "experiment={}", info.experiment);
    let _ = writeln!(s, "status={}", status(outcome.pass));
    let _ = writeln!(s, "seeds={}", seed_list(info.seeds));
    let _ = writeln!(s, "threads={}", info.threads);
    let _ = writeln!(s, "wall_seconds={:.3}", info.seconds);
    for (k, v) in &outcome.summary {
        let _ = writeln!(s, "summary.{k}={v}");
    }
    for r in &outcome.seeds {
        let _ = writeln!(s, "seed.{}.status={}", r.seed, status(r.pass));
        let _ = writeln!(s, "seed.{}.wall_seconds={:.3}", r.seed, r.seconds);
        for (k, v) in &r.values {
            let _ = writeln!(s, "seed.{}.{k}={v}", r.seed);
        }
    }
    s
}

/// Writes every file into a staging directory inside `out`, then renames
/// them into place. Any error removes the staging directory, so a failed
/// run leaves no partial artifacts behind.
pub fn write_all(out: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let staging = out.join(format!(".staging-{}", std::process::id()));
    let result = (|| -> Result<Vec<PathBuf>> {
        fs::create_dir_all(&staging)?;
        for (name, body) in files {
            fs::write(staging.join(name), body).with_context(|| format!("writing {name}"))?;
        }
        let mut done = Vec::new();
        for (name, _) in files {
            let dest = out.join(name);
            fs::rename(staging.join(name), &dest).with_context(|| format!("moving {name} into place"))?;
            done.push(dest);
        }
        Ok(done)
    })();
    let _ = fs::remove_dir_all(&staging);
    result
}
