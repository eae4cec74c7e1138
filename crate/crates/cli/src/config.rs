//! Line-oriented `key = value` configuration with `[section]` headers.

use gramscope_core::network::InitScheme;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, message: message.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    Spectrum,
    Approx,
    Kill,
    Train,
    Predict,
    Depth,
    Smoothed,
    Trace,
    Multiclass,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Approx => "approx",
            Experiment::Kill => "kill",
            Experiment::Train => "train",
            Experiment::Predict => "predict",
            Experiment::Depth => "depth",
            Experiment::Smoothed => "smoothed",
            Experiment::Trace => "trace",
            Experiment::Multiclass => "multiclass",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Experiment as clap::ValueEnum>::from_str(s, true).map_err(|_| format!("unknown experiment `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    Circle,
    Random,
    Embed,
    Equiangular,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSpec {
    pub kind: DataKind,
    pub n: usize,
    pub d: usize,
    pub d_prime: usize,
    pub min_delta: f64,
    pub rho: f64,
    pub path: Option<PathBuf>,
    /// Fixed data seed; when absent each run seed generates its own data.
    pub seed: Option<u64>,
    pub duplicate_first: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub p: usize,
    pub order: usize,
    pub eta: Option<f64>,
    pub steps: usize,
    pub batch: Option<usize>,
    pub record_every: usize,
    pub layers: usize,
    pub sigma: f64,
    pub classes: usize,
    pub eps: Vec<f64>,
    pub tau: Vec<f64>,
    pub target_ratio: Option<f64>,
    pub tolerance: Option<f64>,
    pub threshold: Option<f64>,
    pub train_output: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub data: DataSpec,
    pub activations: Vec<String>,
    pub m: usize,
    pub init: InitScheme,
    pub seeds: Vec<u64>,
    pub run: RunParams,
}

const TOP_KEYS: &[&str] = &["experiment"];
const DATA_KEYS: &[&str] = &["kind", "n", "d", "d_prime", "min_delta", "rho", "path", "seed", "duplicate_first"];
const MODEL_KEYS: &[&str] = &["activation", "m", "init", "seeds"];
const RUN_KEYS: &[&str] = &[
    "p", "order", "eta", "steps", "batch", "record_every", "layers", "sigma", "classes", "eps", "tau",
    "target_ratio", "tolerance", "threshold", "train_output",
];

fn allowed(section: &str) -> Option<&'static [&'static str]> {
    match section {
        "" => Some(TOP_KEYS),
        "data" => Some(DATA_KEYS),
        "model" => Some(MODEL_KEYS),
        "run" => Some(RUN_KEYS),
        _ => None,
    }
}

type Entries = BTreeMap<(String, String), (String, usize)>;

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut section = String::new();
    let mut out = Entries::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = match rest.strip_suffix(']') {
                Some(n) => n.trim(),
                None => return err(line, format!("unterminated section header `{body}`")),
            };
            if allowed(name).is_none() || name.is_empty() {
                return err(line, format!("unknown section `[{name}]` (expected data, model or run)"));
            }
            section = name.to_string();
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return err(line, format!("expected `key = value`, found `{body}`"));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return err(line, "empty key");
        }
        if value.is_empty() {
            return err(line, format!("empty value for `{key}`"));
        }
        let keys = allowed(&section).unwrap_or(&[]);
        if !keys.contains(&key) {
            let place = if section.is_empty() { "top level".to_string() } else { format!("[{section}]") };
            return err(line, format!("unknown key `{key}` in {place}; allowed: {}", keys.join(", ")));
        }
        if let Some((_, first)) = out.insert((section.clone(), key.to_string()), (value.to_string(), line)) {
            return err(line, format!("duplicate key `{key}` (first set on line {first})"));
        }
    }
    Ok(out)
}

struct Reader {
    entries: Entries,
}

impl Reader {
    fn raw(&self, section: &str, key: &str) -> Option<&(String, usize)> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn parse<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<T>()
                .map(Some)
                .or_else(|_| err(*line, format!("`{key}`: cannot parse `{v}`"))),
        }
    }

    fn or<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.parse(section, key)?.unwrap_or(default))
    }

    fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(str::trim)
                .map(|t| t.parse::<T>().or_else(|_| err(*line, format!("`{key}`: cannot parse `{t}`"))))
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    fn line(&self, section: &str, key: &str) -> usize {
        self.raw(section, key).map_or(0, |r| r.1)
    }

    fn check(&self, ok: bool, section: &str, key: &str, what: &str) -> Result<(), ConfigError> {
        if ok {
            Ok(())
        } else {
            err(self.line(section, key), format!("`{key}` {what}"))
        }
    }
}

/// Splits an activation list on commas outside parentheses.
fn split_activations(v: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in v.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur.trim().to_string());
    out
}

impl ExperimentConfig {
    /// Parses config text; relative data paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let r = Reader { entries: tokenize(text)? };
        let experiment = r.parse::<Experiment>("", "experiment")?;

        let kind = match r.raw("data", "kind") {
            None => DataKind::Random,
            Some((v, line)) => match v.as_str() {
                "circle" => DataKind::Circle,
                "random" => DataKind::Random,
                "embed" => DataKind::Embed,
                "equiangular" => DataKind::Equiangular,
                "csv" => DataKind::Csv,
                other => return err(*line, format!("unknown data kind `{other}` (circle, random, embed, equiangular, csv)")),
            },
        };
        let data = DataSpec {
            kind,
            n: r.or("data", "n", 10)?,
            d: r.or("data", "d", 10)?,
            d_prime: r.or("data", "d_prime", 3)?,
            min_delta: r.or("data", "min_delta", 0.05)?,
            rho: r.or("data", "rho", 0.15)?,
            path: r.raw("data", "path").map(|(v, _)| base.join(v)),
            seed: r.parse("data", "seed")?,
            duplicate_first: r.or("data", "duplicate_first", false)?,
        };
        r.check(data.n >= 1, "data", "n", "must be at least 1")?;
        r.check(data.d >= 1, "data", "d", "must be at least 1")?;
        r.check(data.d_prime >= 1 && data.d_prime <= data.d, "data", "d_prime", "must lie in [1, d]")?;
        r.check((0.0..=1.0).contains(&data.min_delta), "data", "min_delta", "must lie in [0, 1]")?;
        r.check(data.rho > -1.0 && data.rho < 1.0, "data", "rho", "must lie in (-1, 1)")?;
        if kind == DataKind::Csv && data.path.is_none() {
            return err(r.line("data", "kind"), "data kind `csv` needs `path`");
        }
        r.check(!data.duplicate_first || data.n >= 2, "data", "duplicate_first", "needs n >= 2")?;

        let activations = match r.raw("model", "activation") {
            None => vec!["tanh".to_string()],
            Some((v, line)) => {
                let list = split_activations(v);
                for a in &list {
                    if let Err(e) = gramscope_core::catalog(a) {
                        return err(*line, e.to_string());
                    }
                }
                list
            }
        };
        let init = match r.raw("model", "init") {
            None => InitScheme::Dzps,
            Some((v, line)) => match v.parse::<InitScheme>() {
                Ok(s) => s,
                Err(e) => return err(*line, e.to_string()),
            },
        };
        let m: usize = r.or("model", "m", 1000)?;
        r.check((1..=10_000_000).contains(&m), "model", "m", "must lie in [1, 1e7]")?;
        let seeds = r.list::<u64>("model", "seeds")?.unwrap_or_else(|| vec![1]);

        let run = RunParams {
            p: r.or("run", "p", 2)?,
            order: r.or("run", "order", 60)?,
            eta: r.parse("run", "eta")?,
            steps: r.or("run", "steps", 1000)?,
            batch: r.parse("run", "batch")?,
            record_every: r.or("run", "record_every", 10)?,
            layers: r.or("run", "layers", 8)?,
            sigma: r.or("run", "sigma", 0.05)?,
            classes: r.or("run", "classes", 3)?,
            eps: r.list("run", "eps")?.unwrap_or_else(|| vec![0.1, 0.01, 0.001]),
            tau: r.list("run", "tau")?.unwrap_or_else(|| vec![3.0, 6.0, 9.0]),
            target_ratio: r.parse("run", "target_ratio")?,
            tolerance: r.parse("run", "tolerance")?,
            threshold: r.parse("run", "threshold")?,
            train_output: r.or("run", "train_output", false)?,
        };
        r.check(run.p <= 64, "run", "p", "must be at most 64")?;
        r.check(run.order <= 10_000, "run", "order", "must be at most 10000")?;
        r.check(run.eta.is_none_or(|e| e.is_finite() && e >= 0.0), "run", "eta", "must be finite and >= 0")?;
        r.check(run.batch.is_none_or(|b| b >= 1 && b <= data.n), "run", "batch", "must lie in [1, n]")?;
        r.check(run.record_every >= 1, "run", "record_every", "must be at least 1")?;
        r.check(run.layers <= gramscope_core::depth::MAX_LAYERS, "run", "layers", "must be at most 16")?;
        r.check(run.sigma > 0.0 && run.sigma.is_finite(), "run", "sigma", "must be positive")?;
        r.check(run.classes >= 1, "run", "classes", "must be at least 1")?;
        r.check(run.eps.iter().all(|e| *e > 0.0 && *e < 1.0), "run", "eps", "entries must lie in (0, 1)")?;
        r.check(run.tau.iter().all(|t| *t > 0.0 && t.is_finite()), "run", "tau", "entries must be positive")?;
        r.check(run.target_ratio.is_none_or(|t| t > 0.0 && t < 1.0), "run", "target_ratio", "must lie in (0, 1)")?;
        r.check(run.tolerance.is_none_or(|t| t > 0.0), "run", "tolerance", "must be positive")?;

        let cfg = ExperimentConfig { experiment, data, activations, m, init, seeds, run };
        cfg.validate_seeds(r.line("model", "seeds"))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .or_else(|e| err(0, format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn with_seeds(mut self, seeds: Vec<u64>) -> Result<Self, ConfigError> {
        self.seeds = seeds;
        self.validate_seeds(0)?;
        Ok(self)
    }

    fn validate_seeds(&self, line: usize) -> Result<(), ConfigError> {
        if self.seeds.is_empty() {
            return err(line, "seed list is empty");
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return err(line, "seed list contains duplicates");
        }
        Ok(())
    }
}
