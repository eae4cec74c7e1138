//! Two-layer networks: initialization, forward pass, hidden-layer gradient.

use crate::activation::ActivationSpec;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, Mat};
use crate::reduce::CHUNK;
use crate::rng::{fill_normal, substream, Stream};
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitScheme {
    /// W, a ~ N(0, 1); output scaled by c_φ/√m.
    Dzps,
    /// W ~ N(0, 1/d), a ~ N(0, 1/m), b ~ N(0, 0.01).
    FanIn,
    /// W ~ N(0, 1/m), a ~ N(0, 1), b ~ N(0, 1/m).
    FanOut,
}

impl FromStr for InitScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dzps" => Ok(InitScheme::Dzps),
            "fanin" => Ok(InitScheme::FanIn),
            "fanout" => Ok(InitScheme::FanOut),
            other => Err(Error::InvalidArgument(format!("unknown init scheme `{other}`"))),
        }
    }
}

impl fmt::Display for InitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitScheme::Dzps => "dzps",
            InitScheme::FanIn => "fanin",
            InitScheme::FanOut => "fanout",
        })
    }
}

#[derive(Clone, Debug)]
pub struct NetworkState {
    /// m × d, row k is w_k.
    pub w: Mat,
    /// m × C output weights.
    pub a: Mat,
    pub b: Option<Vec<f64>>,
    pub scheme: InitScheme,
    pub seed: u64,
    pub spec: ActivationSpec,
    pub c_phi: f64,
}

impl NetworkState {
    pub fn m(&self) -> usize {
        self.w.rows
    }

    pub fn d(&self) -> usize {
        self.w.cols
    }

    pub fn classes(&self) -> usize {
        self.a.cols
    }

    /// Factor in front of Σ_k a_k φ(·).
    pub fn output_scale(&self) -> f64 {
        match self.scheme {
            InitScheme::Dzps => self.c_phi / (self.m() as f64).sqrt(),
            InitScheme::FanIn | InitScheme::FanOut => 1.0,
        }
    }

    /// Normalization of Σ_k a_k² φ′φ′⟨x_i,x_j⟩ so that G stays O(1) in m.
    pub fn gram_scale(&self) -> f64 {
        match self.scheme {
            InitScheme::Dzps | InitScheme::FanOut => 1.0 / self.m() as f64,
            InitScheme::FanIn => 1.0,
        }
    }

    pub fn bias(&self, k: usize) -> f64 {
        self.b.as_ref().map_or(0.0, |b| b[k])
    }

    /// Pre-activation w_kᵀx + b_k.
    pub fn preact(&self, k: usize, x: &[f64]) -> f64 {
        dot(self.w.row(k), x) + self.bias(k)
    }

    pub fn output_column(&self, q: usize) -> Vec<f64> {
        self.a.col(q)
    }

    pub fn check_data(&self, data: &Dataset) -> Result<()> {
        if data.d() != self.d() {
            return Err(Error::Shape(format!("network expects d = {}, data has d = {}", self.d(), data.d())));
        }
        Ok(())
    }
}

/// Samples a single-output network.
pub fn init_net(scheme: InitScheme, m: usize, d: usize, seed: u64, spec: &ActivationSpec) -> Result<NetworkState> {
    init_multi(scheme, m, d, 1, seed, spec)
}

/// Samples a network with `classes` outputs. Row k of every weight array is
/// drawn from its own keyed stream.
pub fn init_multi(
    scheme: InitScheme,
    m: usize,
    d: usize,
    classes: usize,
    seed: u64,
    spec: &ActivationSpec,
) -> Result<NetworkState> {
    if m == 0 || d == 0 || classes == 0 {
        return Err(Error::InvalidArgument(format!("need m, d, C >= 1, got m={m}, d={d}, C={classes}")));
    }
    let (mf, df) = (m as f64, d as f64);
    let (w_sd, a_sd, b_sd) = match scheme {
        InitScheme::Dzps => (1.0, 1.0, None),
        InitScheme::FanIn => (1.0 / df.sqrt(), 1.0 / mf.sqrt(), Some(0.1)),
        InitScheme::FanOut => (1.0 / mf.sqrt(), 1.0, Some(1.0 / mf.sqrt())),
    };
    let mut w = Mat::zeros(m, d);
    w.data.par_chunks_mut(d).enumerate().for_each(|(k, row)| {
        let mut rng = substream(seed, Stream::Hidden, k as u64);
        fill_normal(&mut rng, row, w_sd);
    });
    let mut a = Mat::zeros(m, classes);
    a.data.par_chunks_mut(classes).enumerate().for_each(|(k, row)| {
        let mut rng = substream(seed, Stream::Output, k as u64);
        fill_normal(&mut rng, row, a_sd);
    });
    let b = b_sd.map(|sd| {
        let mut b = vec![0.0; m];
        b.par_iter_mut().enumerate().for_each(|(k, v)| {
            let mut rng = substream(seed, Stream::Bias, k as u64);
            let mut one = [0.0];
            fill_normal(&mut rng, &mut one, sd);
            *v = one[0];
        });
        b
    });
    Ok(NetworkState { w, a, b, scheme, seed, spec: spec.clone(), c_phi: spec.c_phi_shallow })
}

/// Combines per-chunk partial vectors in a fixed pairwise tree.
pub(crate) fn tree_combine(mut parts: Vec<Vec<f64>>, width: usize) -> Vec<f64> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut x) = it.next() {
            if let Some(y) = it.next() {
                x.iter_mut().zip(&y).for_each(|(p, q)| *p += q);
            }
            next.push(x);
        }
        parts = next;
    }
    parts.pop().unwrap_or_else(|| vec![0.0; width])
}

/// Fills `z` (m × n, row-major) with pre-activations and returns the
/// network outputs f (n × C, row-major).
pub(crate) fn preacts_and_outputs(net: &NetworkState, points: &[Vec<f64>], z: &mut [f64]) -> Vec<f64> {
    let n = points.len();
    let c = net.classes();
    let parts: Vec<Vec<f64>> = z
        .par_chunks_mut(CHUNK * n)
        .enumerate()
        .map(|(ci, zc)| {
            let mut acc = vec![0.0; n * c];
            for (r, zrow) in zc.chunks_mut(n).enumerate() {
                let k = ci * CHUNK + r;
                let wk = net.w.row(k);
                let bk = net.bias(k);
                let ak = net.a.row(k);
                for (i, x) in points.iter().enumerate() {
                    let zi = dot(wk, x) + bk;
                    zrow[i] = zi;
                    let phi = net.spec.eval0(zi);
                    for q in 0..c {
                        acc[i * c + q] += ak[q] * phi;
                    }
                }
            }
            acc
        })
        .collect();
    let s = net.output_scale();
    tree_combine(parts, n * c).into_iter().map(|v| s * v).collect()
}

/// Network outputs; for C outputs the result is n × C row-major.
pub fn forward(net: &NetworkState, data: &Dataset) -> Result<Vec<f64>> {
    net.check_data(data)?;
    let points = data.points();
    let mut z = vec![0.0; net.m() * data.n()];
    Ok(preacts_and_outputs(net, &points, &mut z))
}

/// ∇_W of ½Σ(y_i − u_i)² for a single-output network (m × d).
pub fn grad_w(net: &NetworkState, data: &Dataset, y: &[f64]) -> Result<Mat> {
    net.check_data(data)?;
    if y.len() != data.n() {
        return Err(Error::Shape(format!("{} targets for {} points", y.len(), data.n())));
    }
    if net.classes() != 1 {
        return Err(Error::Shape("grad_w expects a single-output network".into()));
    }
    let u = forward(net, data)?;
    let r: Vec<f64> = u.iter().zip(y).map(|(u, y)| u - y).collect();
    let points = data.points();
    let s = net.output_scale();
    let d = net.d();
    let mut g = Mat::zeros(net.m(), d);
    g.data.par_chunks_mut(d).enumerate().for_each(|(k, row)| {
        let coef = s * net.a[(k, 0)];
        for (i, x) in points.iter().enumerate() {
            let t = coef * r[i] * net.spec.eval1(net.preact(k, x));
            row.iter_mut().zip(x).for_each(|(gv, xv)| *gv += t * xv);
        }
    });
    Ok(g)
}

pub fn quadratic_loss(u: &[f64], y: &[f64]) -> f64 {
    0.5 * u.iter().zip(y).map(|(u, y)| (u - y).powi(2)).sum::<f64>()
}
