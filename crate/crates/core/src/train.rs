//! Gradient descent, SGD and multiclass training of the hidden layer.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::network::{preacts_and_outputs, NetworkState};
use crate::reduce::CHUNK;
use crate::rng::{substream, Stream};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loss {
    Quadratic,
    CrossEntropy,
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub eta: f64,
    pub steps: usize,
    /// Minibatch size; `None` is full-batch gradient descent.
    pub batch: Option<usize>,
    pub record_every: usize,
    /// Failure-probability budget, carried for reporting only.
    pub kappa: f64,
    pub loss: Loss,
    pub train_output: bool,
    /// Seed of the batch sampler.
    pub seed: u64,
    /// Steps at which a copy of the network is kept.
    pub snapshot_steps: Vec<usize>,
    /// Stop once loss ≤ ratio · L(0).
    pub target_loss_ratio: Option<f64>,
}

impl TrainConfig {
    pub fn gd(eta: f64, steps: usize) -> Self {
        TrainConfig {
            eta,
            steps,
            batch: None,
            record_every: 1,
            kappa: 0.1,
            loss: Loss::Quadratic,
            train_output: false,
            seed: 0,
            snapshot_steps: Vec::new(),
            target_loss_ratio: None,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("learning rate must be finite and >= 0, got {}", self.eta)));
        }
        if let Some(b) = self.batch {
            if b == 0 || b > n {
                return Err(Error::InvalidArgument(format!("batch size {b} outside [1, {n}]")));
            }
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Record {
    pub step: usize,
    pub loss: f64,
    /// u − y (quadratic) or ũ − ỹ (cross-entropy).
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub max_drift: f64,
    pub movement_ok: Option<bool>,
    pub predicted_residual: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub records: Vec<Record>,
    /// Loss before every update, index = step.
    pub step_losses: Vec<f64>,
    /// max_k ‖w_k^(t) − w_k^(0)‖, index = step.
    pub step_drifts: Vec<f64>,
    pub snapshots: Vec<(usize, NetworkState)>,
}

impl Trajectory {
    pub fn final_loss(&self) -> f64 {
        *self.step_losses.last().expect("empty trajectory")
    }

    pub fn initial_loss(&self) -> f64 {
        self.step_losses[0]
    }

    /// Last step index reached.
    pub fn last_step(&self) -> usize {
        self.step_losses.len() - 1
    }

    pub fn max_drift(&self) -> f64 {
        self.step_drifts.iter().copied().fold(0.0, f64::max)
    }
}

/// 0.1 · λ_min / (c_φ² n²).
pub fn default_eta(lambda_min: f64, c_phi: f64, n: usize) -> f64 {
    0.1 * lambda_min / (c_phi * c_phi * (n * n) as f64)
}

/// b / (2 n λ_max c_φ²): per-sample updates stay well inside the stable range.
pub fn default_sgd_eta(lambda_max: f64, c_phi: f64, n: usize, b: usize) -> f64 {
    b as f64 / (2.0 * n as f64 * lambda_max * c_phi * c_phi)
}

/// λ / (4αβn); infinite when αβ = 0.
pub fn movement_threshold(alpha: f64, beta: f64, n: usize, lambda_min: f64) -> f64 {
    let ab = alpha * beta;
    if ab == 0.0 {
        f64::INFINITY
    } else {
        lambda_min / (4.0 * ab * n as f64)
    }
}

/// Per-step flag drift ≤ λ_min / (4αβn).
pub fn movement_condition(traj: &Trajectory, alpha: f64, beta: f64, n: usize, lambda_min: f64) -> Vec<bool> {
    let thr = movement_threshold(alpha, beta, n, lambda_min);
    traj.step_drifts.iter().map(|d| *d <= thr).collect()
}

fn batch_indices(n: usize, b: usize, seed: u64, step: usize) -> Vec<usize> {
    if b == n {
        return (0..n).collect();
    }
    let mut rng = substream(seed, Stream::Batch, step as u64);
    let mut idx = rand::seq::index::sample(&mut rng, n, b).into_vec();
    idx.sort_unstable();
    idx
}

fn softmax(row: &[f64]) -> Vec<f64> {
    let mx = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = row.iter().map(|v| (v - mx).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Cross-entropy −Σ log softmax(f_i)_{y_i} and ∂/∂f (n × C row-major).
pub fn cross_entropy(f: &[f64], labels: &[usize], classes: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let mut loss = 0.0;
    let mut grad = vec![0.0; f.len()];
    let mut probs = vec![0.0; f.len()];
    for (i, &y) in labels.iter().enumerate() {
        let row = &f[i * classes..(i + 1) * classes];
        let p = softmax(row);
        loss -= p[y].ln();
        for q in 0..classes {
            probs[i * classes + q] = p[q];
            grad[i * classes + q] = p[q] - if q == y { 1.0 } else { 0.0 };
        }
    }
    (loss, grad, probs)
}

struct Targets<'a> {
    y: &'a [f64],
    labels: Option<&'a [usize]>,
}

fn run(net: &mut NetworkState, data: &Dataset, cfg: &TrainConfig, targets: Targets<'_>) -> Result<Trajectory> {
    net.check_data(data)?;
    let n = data.n();
    cfg.validate(n)?;
    let classes = net.classes();
    let (m, d) = (net.m(), net.d());
    let points = data.points();
    let w0 = net.w.clone();
    let mut z = vec![0.0; m * n];
    let mut traj = Trajectory::default();
    let mut drift = 0.0;
    let b = cfg.batch.unwrap_or(n);
    let factor = n as f64 / b as f64;
    let scale = net.output_scale();
    for t in 0..=cfg.steps {
        let f = preacts_and_outputs(net, &points, &mut z);
        let (loss, dldf, residual) = match (cfg.loss, targets.labels) {
            (Loss::Quadratic, _) => {
                let r: Vec<f64> = f.iter().zip(targets.y).map(|(u, y)| u - y).collect();
                (0.5 * r.iter().map(|v| v * v).sum::<f64>(), r.clone(), r)
            }
            (Loss::CrossEntropy, Some(labels)) => {
                let (l, g, probs) = cross_entropy(&f, labels, classes);
                let mut res = probs;
                for (i, &y) in labels.iter().enumerate() {
                    res[i * classes + y] -= 1.0;
                }
                (l, g, res)
            }
            (Loss::CrossEntropy, None) => {
                return Err(Error::InvalidArgument("cross-entropy training needs class labels".into()))
            }
        };
        if !loss.is_finite() {
            return Err(Error::Divergence { step: t, loss });
        }
        traj.step_losses.push(loss);
        traj.step_drifts.push(drift);
        let done = t == cfg.steps || cfg.target_loss_ratio.is_some_and(|r| loss <= r * traj.step_losses[0]);
        if t % cfg.record_every == 0 || done {
            traj.records.push(Record {
                step: t,
                loss,
                residual_norm: norm(&residual),
                residual,
                max_drift: drift,
                movement_ok: None,
                predicted_residual: None,
            });
        }
        if cfg.snapshot_steps.contains(&t) {
            traj.snapshots.push((t, net.clone()));
        }
        if done {
            break;
        }
        let batch = match cfg.batch {
            Some(b) => batch_indices(n, b, cfg.seed, t),
            None => (0..n).collect(),
        };
        let step = cfg.eta * factor * scale;
        let spec = &net.spec;
        let train_output = cfg.train_output;
        let a = &mut net.a;
        let w = &mut net.w;
        let drifts: Vec<f64> = w
            .data
            .par_chunks_mut(CHUNK * d)
            .zip(a.data.par_chunks_mut(CHUNK * classes))
            .enumerate()
            .map(|(ci, (wc, ac))| {
                let mut worst = 0.0f64;
                let mut g = vec![0.0; d];
                for (r, (wk, ak)) in wc.chunks_mut(d).zip(ac.chunks_mut(classes)).enumerate() {
                    let k = ci * CHUNK + r;
                    let zk = &z[k * n..(k + 1) * n];
                    g.iter_mut().for_each(|v| *v = 0.0);
                    for &i in &batch {
                        let mut s = 0.0;
                        for q in 0..classes {
                            s += dldf[i * classes + q] * ak[q];
                        }
                        let t = s * spec.eval1(zk[i]);
                        g.iter_mut().zip(&points[i]).for_each(|(gv, xv)| *gv += t * xv);
                    }
                    if train_output {
                        for q in 0..classes {
                            let ga: f64 = batch.iter().map(|&i| dldf[i * classes + q] * spec.eval0(zk[i])).sum();
                            ak[q] -= step * ga;
                        }
                    }
                    let w0k = &w0.data[k * d..(k + 1) * d];
                    let mut dd = 0.0;
                    for ((wv, gv), w0v) in wk.iter_mut().zip(&g).zip(w0k) {
                        *wv -= step * gv;
                        dd += (*wv - w0v).powi(2);
                    }
                    worst = worst.max(dd.sqrt());
                }
                worst
            })
            .collect();
        drift = drifts.into_iter().fold(0.0, f64::max);
    }
    Ok(traj)
}

/// Full-batch gradient descent on the quadratic loss.
pub fn train_gd(net: &mut NetworkState, data: &Dataset, cfg: &TrainConfig) -> Result<Trajectory> {
    let mut cfg = cfg.clone();
    cfg.batch = None;
    cfg.loss = Loss::Quadratic;
    run(net, data, &cfg, Targets { y: &data.labels, labels: None })
}

/// Minibatch SGD: b points without replacement per step, gradient scaled by n/b.
pub fn train_sgd(net: &mut NetworkState, data: &Dataset, cfg: &TrainConfig) -> Result<Trajectory> {
    let b = cfg.batch.ok_or_else(|| Error::InvalidArgument("SGD needs a batch size".into()))?;
    let mut cfg = cfg.clone();
    cfg.batch = Some(b);
    cfg.loss = Loss::Quadratic;
    run(net, data, &cfg, Targets { y: &data.labels, labels: None })
}

/// Softmax cross-entropy training of a C-output network.
pub fn train_multiclass(net: &mut NetworkState, data: &Dataset, labels: &[usize], cfg: &TrainConfig) -> Result<Trajectory> {
    if labels.len() != data.n() {
        return Err(Error::Shape(format!("{} labels for {} points", labels.len(), data.n())));
    }
    if let Some(bad) = labels.iter().find(|&&l| l >= net.classes()) {
        return Err(Error::InvalidArgument(format!("label {bad} outside [0, {})", net.classes())));
    }
    let mut cfg = cfg.clone();
    cfg.loss = Loss::CrossEntropy;
    run(net, data, &cfg, Targets { y: &data.labels, labels: Some(labels) })
}

/// ∇_W of the cross-entropy loss (m × d), for gradient checks.
pub fn grad_w_multiclass(net: &NetworkState, data: &Dataset, labels: &[usize]) -> Result<crate::linalg::Mat> {
    net.check_data(data)?;
    let (m, n, d, c) = (net.m(), data.n(), net.d(), net.classes());
    let points = data.points();
    let mut z = vec![0.0; m * n];
    let f = preacts_and_outputs(net, &points, &mut z);
    let (_, g, _) = cross_entropy(&f, labels, c);
    let s = net.output_scale();
    let mut out = crate::linalg::Mat::zeros(m, d);
    for k in 0..m {
        for (i, x) in points.iter().enumerate() {
            let mut t = 0.0;
            for q in 0..c {
                t += g[i * c + q] * net.a[(k, q)];
            }
            let t = s * t * net.spec.eval1(z[k * n + i]);
            for r in 0..d {
                out[(k, r)] += t * x[r];
            }
        }
    }
    Ok(out)
}

pub fn multiclass_loss(net: &NetworkState, data: &Dataset, labels: &[usize]) -> Result<f64> {
    let f = crate::network::forward(net, data)?;
    Ok(cross_entropy(&f, labels, net.classes()).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::catalog;
    use crate::data::random_unit;
    use crate::network::{init_net, InitScheme};

    #[test]
    fn zero_rate_keeps_loss() {
        let spec = catalog("tanh").unwrap();
        let data = random_unit(4, 3, 1).unwrap();
        let mut net = init_net(InitScheme::Dzps, 64, 3, 1, &spec).unwrap();
        let tr = train_gd(&mut net, &data, &TrainConfig::gd(0.0, 5)).unwrap();
        assert!(tr.step_losses.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn full_batch_sgd_is_gd() {
        let spec = catalog("tanh").unwrap();
        let data = random_unit(5, 4, 2).unwrap();
        let net = init_net(InitScheme::Dzps, 5000, 4, 2, &spec).unwrap();
        let cfg = TrainConfig { batch: Some(5), seed: 9, ..TrainConfig::gd(0.01, 20) };
        let (mut a, mut b) = (net.clone(), net);
        let ga = train_gd(&mut a, &data, &cfg).unwrap();
        let sb = train_sgd(&mut b, &data, &cfg).unwrap();
        assert_eq!(a.w, b.w);
        assert_eq!(ga.step_losses, sb.step_losses);
    }

    #[test]
    fn uniform_logits() {
        let (l, g, p) = cross_entropy(&[0.3, 0.3, 0.3], &[1], 3);
        assert!(p.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert!((l - 3f64.ln()).abs() < 1e-15);
        assert!((g[1] + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn binary_cross_entropy_closed_form() {
        let f = [0.7, -0.4];
        let (_, g, _) = cross_entropy(&f, &[0], 2);
        let s = 1.0 / (1.0 + (-(f[0] - f[1])).exp());
        assert!((g[0] - (s - 1.0)).abs() < 1e-15);
        assert!((g[1] - (1.0 - s)).abs() < 1e-15);
    }

    #[test]
    fn movement_threshold_infinite_for_relu() {
        let spec = catalog("relu").unwrap();
        assert!(movement_threshold(spec.lipschitz_alpha, spec.smooth_beta, 10, 0.1).is_infinite());
    }

    #[test]
    fn rejects_bad_batch() {
        let spec = catalog("tanh").unwrap();
        let data = random_unit(4, 3, 1).unwrap();
        let mut net = init_net(InitScheme::Dzps, 8, 3, 1, &spec).unwrap();
        let cfg = TrainConfig { batch: Some(5), ..TrainConfig::gd(0.1, 2) };
        assert!(train_sgd(&mut net, &data, &cfg).is_err());
    }
}
