//! Datasets on the unit sphere.

use crate::error::{Error, Result};
use crate::linalg::{dot, effective_rank, norm, span_basis, Mat};
use crate::rng::{fill_normal, normal, substream, substream2, Stream};
use rand::Rng;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::{BufRead, Write};
use std::path::Path;

pub const RANK_TOL: f64 = 1e-10;
pub const UNIT_TOL: f64 = 1e-12;
pub const REJECTION_BUDGET: usize = 1000;

#[derive(Clone, Debug)]
pub struct Dataset {
    /// d × n, unit-norm columns.
    pub x: Mat,
    pub labels: Vec<f64>,
    pub delta: f64,
    pub d_eff: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct SmoothedSpec {
    pub sigma: f64,
    pub seed: u64,
    /// Largest distance from an injected noise vector to the base span.
    pub span_residual: f64,
}

impl Dataset {
    /// Wraps unit-norm columns, measuring δ and d′.
    pub fn new(x: Mat, labels: Vec<f64>, seed: u64) -> Result<Self> {
        if labels.len() != x.cols {
            return Err(Error::Shape(format!("{} labels for {} points", labels.len(), x.cols)));
        }
        for j in 0..x.cols {
            let nj = norm(&x.col(j));
            if (nj - 1.0).abs() > UNIT_TOL {
                return Err(Error::Assumption(format!("column {j} has norm {nj}, expected 1")));
            }
        }
        let delta = separation(&x);
        let d_eff = effective_rank(&x, RANK_TOL)?;
        Ok(Dataset { x, labels, delta, d_eff, seed })
    }

    pub fn n(&self) -> usize {
        self.x.cols
    }

    pub fn d(&self) -> usize {
        self.x.rows
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.x.col(i)
    }

    /// Points as rows (n × d), convenient for inner loops.
    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.point(i)).collect()
    }

    /// XᵀX.
    pub fn inner_products(&self) -> Mat {
        self.x.gram()
    }

    /// Identity of the data for matched-run checks.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for v in self.x.data.iter().chain(&self.labels) {
            for b in v.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
        h
    }

    pub fn with_labels(mut self, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::Shape(format!("{} labels for {} points", labels.len(), self.n())));
        }
        self.labels = labels;
        Ok(self)
    }
}

/// min over ordered pairs i ≠ j of ‖(I − x_i x_iᵀ) x_j‖; 1 when n < 2.
pub fn separation(x: &Mat) -> f64 {
    let cols: Vec<Vec<f64>> = (0..x.cols).map(|j| x.col(j)).collect();
    let mut best = f64::INFINITY;
    for (i, xi) in cols.iter().enumerate() {
        for (j, xj) in cols.iter().enumerate() {
            if i == j {
                continue;
            }
            let h = dot(xi, xj);
            let r: f64 = xj.iter().zip(xi).map(|(b, a)| (b - h * a).powi(2)).sum::<f64>().sqrt();
            best = best.min(r);
        }
    }
    if best.is_finite() {
        best
    } else {
        1.0
    }
}

fn sign_labels(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = substream(seed, Stream::Labels, 0);
    (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let nv = norm(v);
    v.iter_mut().for_each(|x| *x /= nv);
    nv
}

/// Random orthonormal k-frame in R^d (columns), from keyed Gaussian draws.
pub fn random_frame(d: usize, k: usize, seed: u64, index: u64) -> Result<Mat> {
    if k > d {
        return Err(Error::InvalidArgument(format!("cannot fit a {k}-frame in R^{d}")));
    }
    let mut rng = substream(seed, Stream::DataFrame, index);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    while cols.len() < k {
        let mut v = vec![0.0; d];
        fill_normal(&mut rng, &mut v, 1.0);
        for _ in 0..2 {
            for q in &cols {
                let h = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= h * b);
            }
        }
        if norm(&v) > 1e-6 {
            normalize(&mut v);
            cols.push(v);
        }
    }
    Ok(Mat::from_fn(d, k, |i, j| cols[j][i]))
}

/// Scales columns to norm ≤ 1/√2, appends a coordinate completing each norm
/// to 1/√2 and a constant 1/√2 coordinate.
pub fn preprocess_unit(raw: &Mat, labels: Vec<f64>, seed: u64) -> Result<Dataset> {
    let norms: Vec<f64> = (0..raw.cols).map(|j| norm(&raw.col(j))).collect();
    if let Some(j) = norms.iter().position(|v| *v == 0.0 || !v.is_finite()) {
        return Err(Error::DegenerateInput(format!("column {j} has norm {}", norms[j])));
    }
    let scale = FRAC_1_SQRT_2 / norms.iter().copied().fold(0.0, f64::max);
    let d = raw.rows;
    let mut x = Mat::zeros(d + 2, raw.cols);
    for j in 0..raw.cols {
        let mut sq = 0.0;
        for i in 0..d {
            let v = raw[(i, j)] * scale;
            x[(i, j)] = v;
            sq += v * v;
        }
        x[(d, j)] = (0.5 - sq).max(0.0).sqrt();
        x[(d + 1, j)] = FRAC_1_SQRT_2;
        let mut c = x.col(j);
        normalize(&mut c);
        for (i, v) in c.into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    Dataset::new(x, labels, seed)
}

/// n equally spaced points on a circle embedded by a random 2-frame.
pub fn circle_lift(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("circle_lift needs n >= 2, got {n}")));
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!("circle_lift needs d >= 2, got {d}")));
    }
    let frame = random_frame(d, 2, seed, 0)?;
    let mut x = Mat::zeros(d, n);
    for j in 0..n {
        let t = 2.0 * PI * j as f64 / n as f64;
        let mut c: Vec<f64> = (0..d).map(|i| t.cos() * frame[(i, 0)] + t.sin() * frame[(i, 1)]).collect();
        normalize(&mut c);
        for (i, v) in c.into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    Dataset::new(x, sign_labels(n, seed), seed)
}

/// Unit vectors spanning exactly `d_prime` dimensions with δ ≥ `min_delta`.
pub fn low_dim_embed(n: usize, d_prime: usize, d: usize, min_delta: f64, seed: u64) -> Result<Dataset> {
    if d_prime == 0 || d_prime > d {
        return Err(Error::InvalidArgument(format!("need 1 <= d' <= d, got d'={d_prime}, d={d}")));
    }
    if n < d_prime {
        return Err(Error::InvalidArgument(format!("need n >= d', got n={n}, d'={d_prime}")));
    }
    if min_delta >= 1.0 {
        if n > d_prime || min_delta > 1.0 {
            return Err(Error::Infeasible(format!("delta >= {min_delta} needs n <= d' pairwise orthogonal points")));
        }
        let frame = random_frame(d, d_prime, seed, 0)?;
        return Dataset::new(frame, sign_labels(n, seed), seed);
    }
    for attempt in 0..REJECTION_BUDGET {
        let frame = random_frame(d, d_prime, seed, attempt as u64)?;
        let mut x = Mat::zeros(d, n);
        for j in 0..n {
            let mut rng = substream2(seed, Stream::DataColumn, attempt as u64, j as u64);
            let mut c = vec![0.0; d_prime];
            fill_normal(&mut rng, &mut c, 1.0);
            let mut v: Vec<f64> = (0..d).map(|i| (0..d_prime).map(|k| frame[(i, k)] * c[k]).sum()).collect();
            normalize(&mut v);
            for (i, val) in v.into_iter().enumerate() {
                x[(i, j)] = val;
            }
        }
        let ds = Dataset::new(x, sign_labels(n, seed), seed)?;
        if ds.delta >= min_delta && ds.d_eff == d_prime {
            return Ok(ds);
        }
    }
    Err(Error::Infeasible(format!(
        "no sample with delta >= {min_delta} for n={n}, d'={d_prime} in {REJECTION_BUDGET} attempts"
    )))
}

/// Uniform random unit vectors in R^d.
pub fn random_unit(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    let mut x = Mat::zeros(d, n);
    for j in 0..n {
        let mut rng = substream(seed, Stream::DataColumn, j as u64);
        let mut v = vec![0.0; d];
        fill_normal(&mut rng, &mut v, 1.0);
        normalize(&mut v);
        for (i, val) in v.into_iter().enumerate() {
            x[(i, j)] = val;
        }
    }
    Dataset::new(x, sign_labels(n, seed), seed)
}

/// n unit vectors with all pairwise inner products equal to `rho`,
/// rotated into R^d by a random frame (d ≥ n + 1).
pub fn equiangular(n: usize, rho: f64, d: usize, seed: u64) -> Result<Dataset> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!("rho must lie in [0, 1), got {rho}")));
    }
    if d < n + 1 {
        return Err(Error::InvalidArgument(format!("equiangular data needs d >= n + 1, got d={d}, n={n}")));
    }
    let frame = random_frame(d, n + 1, seed, 0)?;
    let (a, b) = ((1.0 - rho).sqrt(), rho.sqrt());
    let x = Mat::from_fn(d, n, |i, j| a * frame[(i, j)] + b * frame[(i, n)]);
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| x.col(j)).collect();
    cols.iter_mut().for_each(|c| {
        normalize(c);
    });
    Dataset::new(Mat::from_fn(d, n, |i, j| cols[j][i]), sign_labels(n, seed), seed)
}

/// Adds N(0, σ²) noise projected onto the span of the base data, then
/// renormalizes.
pub fn smoothed(base: &Dataset, sigma: f64, seed: u64) -> Result<(Dataset, SmoothedSpec)> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let b = span_basis(&base.x, RANK_TOL)?;
    let (d, n) = (base.d(), base.n());
    let mut x = Mat::zeros(d, n);
    let mut span_residual = 0.0f64;
    for j in 0..n {
        let mut rng = substream(seed, Stream::Noise, j as u64);
        let g: Vec<f64> = (0..d).map(|_| sigma * normal(&mut rng)).collect();
        let coords: Vec<f64> = (0..b.cols).map(|k| (0..d).map(|i| b[(i, k)] * g[i]).sum()).collect();
        let noise: Vec<f64> = (0..d).map(|i| (0..b.cols).map(|k| b[(i, k)] * coords[k]).sum()).collect();
        let back: Vec<f64> = (0..b.cols).map(|k| (0..d).map(|i| b[(i, k)] * noise[i]).sum()).collect();
        let in_span: f64 = norm(&back);
        span_residual = span_residual.max((norm(&noise).powi(2) - in_span * in_span).max(0.0).sqrt());
        let mut v: Vec<f64> = (0..d).map(|i| base.x[(i, j)] + noise[i]).collect();
        normalize(&mut v);
        for (i, val) in v.into_iter().enumerate() {
            x[(i, j)] = val;
        }
    }
    let ds = Dataset::new(x, base.labels.clone(), seed)?;
    Ok((ds, SmoothedSpec { sigma, seed, span_residual }))
}

/// One line per point: d coordinates then the label.
pub fn write_csv<W: Write>(ds: &Dataset, mut w: W) -> Result<()> {
    for j in 0..ds.n() {
        let mut fields: Vec<String> = ds.point(j).iter().map(|v| format!("{v:.16e}")).collect();
        fields.push(format!("{:.16e}", ds.labels[j]));
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R, seed: u64) -> Result<Dataset> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("line {}: bad number `{t}`", lineno + 1))))
            .collect::<Result<_>>()?;
        if vals.len() < 2 {
            return Err(Error::Parse(format!("line {}: need coordinates and a label", lineno + 1)));
        }
        if let Some(first) = cols.first() {
            if first.len() != vals.len() - 1 {
                return Err(Error::Parse(format!("line {}: {} coordinates, expected {}", lineno + 1, vals.len() - 1, first.len())));
            }
        }
        labels.push(*vals.last().unwrap());
        cols.push(vals[..vals.len() - 1].to_vec());
    }
    if cols.is_empty() {
        return Err(Error::Parse("empty dataset".into()));
    }
    let d = cols[0].len();
    Dataset::new(Mat::from_fn(d, cols.len(), |i, j| cols[j][i]), labels, seed)
}

pub fn save_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_csv(ds, std::io::BufWriter::new(f))
}

pub fn load_csv(path: &Path, seed: u64) -> Result<Dataset> {
    read_csv(std::io::BufReader::new(std::fs::File::open(path)?), seed)
}
