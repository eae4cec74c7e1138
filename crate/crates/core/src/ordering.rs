//! Activation orderings by smallest G-eigenvalue across matched runs.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct OrderingRun {
    pub activation: String,
    pub seed: u64,
    pub data_fingerprint: u64,
    pub lambda_min: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Greater,
    Less,
    Tie,
}

pub const TIE_TOL: f64 = 1e-12;

pub fn relation(a: f64, b: f64) -> Relation {
    let scale = a.abs().max(b.abs());
    if (a - b).abs() <= TIE_TOL * scale {
        Relation::Tie
    } else if a > b {
        Relation::Greater
    } else {
        Relation::Less
    }
}

#[derive(Clone, Debug)]
pub struct SeedVerdict {
    pub seed: u64,
    /// (left, right, relation of λ_min(left) to λ_min(right)).
    pub pairs: Vec<(String, String, Relation)>,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct OrderingVerdict {
    pub per_seed: Vec<SeedVerdict>,
    pub seeds_holding: usize,
    pub majority: bool,
}

/// Expected strict orderings λ_min(left) > λ_min(right).
pub const EXPECTED: [(&str, &str); 4] = [("relu", "elu"), ("elu", "tanh"), ("elu", "swish"), ("relu", "swish")];

/// Checks the expected pairs among the activations present, per seed and by
/// seed majority. Runs sharing a seed must share the data.
pub fn compare_orderings(runs: &[OrderingRun]) -> Result<OrderingVerdict> {
    let mut by_seed: BTreeMap<u64, BTreeMap<String, &OrderingRun>> = BTreeMap::new();
    for r in runs {
        let entry = by_seed.entry(r.seed).or_default();
        if let Some(other) = entry.values().next() {
            if other.data_fingerprint != r.data_fingerprint {
                return Err(Error::InvalidArgument(format!(
                    "seed {}: {} and {} were run on different data",
                    r.seed, other.activation, r.activation
                )));
            }
        }
        entry.insert(r.activation.clone(), r);
    }
    let activations: std::collections::BTreeSet<&str> = runs.iter().map(|r| r.activation.as_str()).collect();
    if activations.len() < 2 {
        return Err(Error::InvalidArgument("need at least two activations to compare".into()));
    }
    let mut per_seed = Vec::new();
    for (seed, acts) in &by_seed {
        let mut pairs = Vec::new();
        for (l, r) in EXPECTED {
            if let (Some(a), Some(b)) = (acts.get(l), acts.get(r)) {
                pairs.push((l.to_string(), r.to_string(), relation(a.lambda_min, b.lambda_min)));
            }
        }
        let holds = !pairs.is_empty() && pairs.iter().all(|p| p.2 == Relation::Greater);
        per_seed.push(SeedVerdict { seed: *seed, pairs, holds });
    }
    let seeds_holding = per_seed.iter().filter(|s| s.holds).count();
    let majority = 2 * seeds_holding > per_seed.len();
    Ok(OrderingVerdict { per_seed, seeds_holding, majority })
}
