//! Kill vectors: coefficient vectors ζ with Σ_i ζ_i x_i^β x_i = 0 for all
//! low-degree multi-indices β, which annihilate Mζ for polynomial φ′.

use crate::activation::{ActivationSpec, Parity};
use crate::data::{Dataset, RANK_TOL};
use crate::error::Result;
use crate::gram::m_times_norm;
use crate::linalg::{norm, span_basis, svd_jacobi, Mat};
use crate::network::NetworkState;

pub const NULL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeParity {
    Any,
    /// φ′ even: only odd-degree monomials constrain ζ.
    Even,
    /// φ′ odd: only even-degree monomials constrain ζ.
    Odd,
}

impl From<Parity> for DerivativeParity {
    fn from(p: Parity) -> Self {
        match p {
            Parity::Even => DerivativeParity::Even,
            Parity::Odd => DerivativeParity::Odd,
            Parity::Neither => DerivativeParity::Any,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KillBasis {
    /// Orthonormal null vectors, each of length n.
    pub vectors: Vec<Vec<f64>>,
    pub p: usize,
    pub parity: DerivativeParity,
    /// C(d′+p, p) − 1, the full number of moment constraints.
    pub constraint_count: usize,
    /// Rows actually imposed after the parity reduction.
    pub rows_used: usize,
    pub d_eff: usize,
    /// C(d′+p, p) < n + 1: a nonzero kill vector must exist.
    pub condition_holds: bool,
    /// C(d′+p, p) − 1 ≤ n/d′, the stronger small-polynomial regime.
    pub small_poly_condition: bool,
    /// max_ζ ‖Aζ‖ over the constraint matrix A.
    pub moment_residual: f64,
}

impl KillBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Exponent vectors of total degree `deg` in `vars` variables, graded-lex
/// (larger exponent on earlier variables first).
pub fn monomials_of_degree(vars: usize, deg: usize) -> Vec<Vec<usize>> {
    fn rec(vars: usize, deg: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if vars == 1 {
            prefix.push(deg);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=deg).rev() {
            prefix.push(e);
            rec(vars - 1, deg - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if vars > 0 {
        rec(vars, deg, &mut Vec::new(), &mut out);
    }
    out
}

/// Kill basis for moment constraints of degree 1..=p, with the data first
/// reduced to coordinates in its effective span.
pub fn kill_nullspace(data: &Dataset, p: usize) -> Result<KillBasis> {
    kill_nullspace_parity(data, p, DerivativeParity::Any)
}

pub fn kill_nullspace_parity(data: &Dataset, p: usize, parity: DerivativeParity) -> Result<KillBasis> {
    let n = data.n();
    let frame = span_basis(&data.x, RANK_TOL)?;
    let d_eff = frame.cols;
    let coords = frame.transpose().matmul(&data.x)?;
    let degrees: Vec<usize> = (1..=p)
        .filter(|deg| match parity {
            DerivativeParity::Any => true,
            DerivativeParity::Even => deg % 2 == 1,
            DerivativeParity::Odd => deg % 2 == 0,
        })
        .collect();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for &deg in &degrees {
        for mono in monomials_of_degree(d_eff, deg) {
            rows.push(
                (0..n)
                    .map(|i| mono.iter().enumerate().map(|(v, e)| coords[(v, i)].powi(*e as i32)).product())
                    .collect(),
            );
        }
    }
    let full = binomial(d_eff + p, p);
    let constraint_count = full - 1;
    let a = Mat::from_fn(rows.len(), n, |r, i| rows[r][i]);
    let vectors: Vec<Vec<f64>> = if rows.is_empty() {
        (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect()
    } else {
        let svd = svd_jacobi(&a)?;
        let thr = NULL_TOL * svd.sigma_max();
        (0..n).filter(|&j| svd.values[j] <= thr).map(|j| svd.v.col(j)).collect()
    };
    let moment_residual = vectors.iter().map(|z| norm(&a.matvec(z))).fold(0.0, f64::max);
    Ok(KillBasis {
        vectors,
        p,
        parity,
        constraint_count,
        rows_used: rows.len(),
        d_eff,
        condition_holds: full < n + 1,
        small_poly_condition: d_eff > 0 && constraint_count * d_eff <= n,
        moment_residual,
    })
}

/// Kill degree for a spec: p − 1 ≥ deg φ′ for polynomial derivatives.
pub fn kill_degree(spec: &ActivationSpec) -> Option<usize> {
    spec.derivative_degree().map(|d| d + 1)
}

/// max over the basis of ‖Mζ‖·√(gram scale), i.e. √(ζᵀGζ).
pub fn kill_residual_smooth(data: &Dataset, net: &NetworkState, basis: &KillBasis) -> Result<f64> {
    let s = net.gram_scale().sqrt();
    let mut worst = 0.0f64;
    for z in &basis.vectors {
        worst = worst.max(s * m_times_norm(data, net, z)?);
    }
    Ok(worst)
}
