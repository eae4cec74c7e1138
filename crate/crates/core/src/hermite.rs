//! Hermite expansions under the standard Gaussian measure.

use crate::activation::ActivationSpec;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_legendre, gauss_hermite_prob, normal_pdf};
use std::f64::consts::{PI, SQRT_2};

pub const MAX_DEGREE: usize = 10_000;
pub const DEFAULT_NODES: usize = 400;
/// Coefficients may move by less than this when the node count doubles.
pub const DOUBLING_TOL: f64 = 1e-7;
/// Coefficients below this are treated as quadrature noise in slope fits.
pub const NOISE_FLOOR: f64 = 1e-14;

/// Orthonormal probabilists' Hermite polynomial He_k(x).
pub fn hermite_prob(k: usize, x: f64) -> Result<f64> {
    if k > MAX_DEGREE {
        return Err(Error::DegreeLimit { degree: k, limit: MAX_DEGREE });
    }
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..k {
        let jf = j as f64;
        let next = (x * cur - jf.sqrt() * prev) / (jf + 1.0).sqrt();
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Orthonormal physicists' Hermite polynomial under e^{-x²}/√π, H_m(x) = He_m(√2 x).
pub fn hermite_phys(m: usize, x: f64) -> Result<f64> {
    hermite_prob(m, SQRT_2 * x)
}

/// He_0..He_p at x.
pub fn hermite_prob_all(p: usize, x: f64, out: &mut [f64]) {
    debug_assert!(out.len() > p);
    out[0] = 1.0;
    if p >= 1 {
        out[1] = x;
    }
    for j in 1..p {
        let jf = j as f64;
        out[j + 1] = (x * out[j] - jf.sqrt() * out[j - 1]) / (jf + 1.0).sqrt();
    }
}

#[derive(Clone, Debug)]
pub struct HermiteSeries {
    /// c̄_0..c̄_p.
    pub coeffs: Vec<f64>,
    /// Gauss–Hermite nodes used, or integrand evaluations for split integrals.
    pub quad_nodes: usize,
    pub target: String,
    /// Quadrature estimate of E f(z)².
    pub second_moment: f64,
}

impl HermiteSeries {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

fn gh_coeffs<F: Fn(f64) -> f64>(f: &F, p: usize, nodes: usize) -> Result<(Vec<f64>, f64)> {
    let rule = gauss_hermite_prob(nodes)?;
    let mut coeffs = vec![0.0; p + 1];
    let mut m2 = 0.0;
    let mut s = vec![0.0; p + 1];
    for (z, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(*z);
        if !v.is_finite() {
            return Err(Error::NonFinite { x: *z, value: v });
        }
        m2 += w * v * v;
        // √w-scaled recurrence keeps the outer nodes from overflowing.
        let sw = w.sqrt();
        if sw == 0.0 {
            continue;
        }
        s[0] = sw;
        if p >= 1 {
            s[1] = sw * z;
        }
        for j in 1..p {
            let jf = j as f64;
            s[j + 1] = (z * s[j] - jf.sqrt() * s[j - 1]) / (jf + 1.0).sqrt();
        }
        let fv = sw * v;
        for (c, sk) in coeffs.iter_mut().zip(&s) {
            *c += fv * sk;
        }
    }
    Ok((coeffs, m2))
}

/// c̄_k = E[f(z) He_k(z)] for k ≤ p by Gauss–Hermite quadrature, checked
/// against a rule with twice the nodes.
pub fn hermite_expand<F: Fn(f64) -> f64>(f: F, p: usize, quad_nodes: usize, target: &str) -> Result<HermiteSeries> {
    if p > MAX_DEGREE {
        return Err(Error::DegreeLimit { degree: p, limit: MAX_DEGREE });
    }
    if quad_nodes < 4 * (p + 1) {
        return Err(Error::InvalidArgument(format!("{quad_nodes} nodes < 4(p+1) = {}", 4 * (p + 1))));
    }
    let (coeffs, m2) = gh_coeffs(&f, p, quad_nodes)?;
    let (check, _) = gh_coeffs(&f, p, 2 * quad_nodes)?;
    if let Some((k, moved)) = coeffs
        .iter()
        .zip(&check)
        .map(|(a, b)| (a - b).abs())
        .enumerate()
        .find(|(_, d)| *d >= DOUBLING_TOL)
    {
        return Err(Error::Quadrature(format!(
            "c_{k} of {target} moved by {moved:e} when doubling {quad_nodes} nodes"
        )));
    }
    Ok(HermiteSeries { coeffs, quad_nodes, target: target.to_string(), second_moment: m2 })
}

/// Half-width of each side of a split integral; covers where He_p lives.
pub fn split_half_width(p: usize) -> f64 {
    12f64.max((4.0 * p as f64 + 2.0).sqrt() + 6.0)
}

/// Hermite expansion of a function with a kink or jump at `kink`: each side
/// is integrated by adaptive Gauss–Legendre against the Gaussian density.
pub fn hermite_expand_split<F: Fn(f64) -> f64>(f: F, p: usize, kink: f64, target: &str) -> Result<HermiteSeries> {
    if p > MAX_DEGREE {
        return Err(Error::DegreeLimit { degree: p, limit: MAX_DEGREE });
    }
    let width = p + 2;
    let evals = std::cell::Cell::new(0usize);
    let integrand = |x: f64, out: &mut [f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        let pdf = normal_pdf(x);
        hermite_prob_all(p, x, &mut out[..=p]);
        for o in out[..=p].iter_mut() {
            *o *= v * pdf;
        }
        out[p + 1] = v * v * pdf;
    };
    let hw = split_half_width(p);
    let lo = adaptive_legendre(&integrand, kink - hw, kink, width, 1e-14)?;
    let hi = adaptive_legendre(&integrand, kink, kink + hw, width, 1e-14)?;
    let total: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| a + b).collect();
    if let Some(bad) = total.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite { x: kink, value: *bad });
    }
    Ok(HermiteSeries {
        coeffs: total[..=p].to_vec(),
        quad_nodes: evals.get(),
        target: target.to_string(),
        second_moment: total[p + 1],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Phi,
    PhiPrime,
}

/// Expansion of φ or φ′ of a catalog activation, split at the kink if any.
pub fn expand_activation(spec: &ActivationSpec, target: Target, p: usize) -> Result<HermiteSeries> {
    let label = match target {
        Target::Phi => spec.name.clone(),
        Target::PhiPrime => format!("{}'", spec.name),
    };
    let f = |x: f64| match target {
        Target::Phi => spec.eval0(x),
        Target::PhiPrime => spec.eval1(x),
    };
    match spec.kink() {
        Some(alpha) => hermite_expand_split(f, p, alpha, &label),
        None => hermite_expand(f, p, DEFAULT_NODES.max(4 * (p + 1)), &label),
    }
}

/// Exact coefficients of the unit step: c̄_0 = 1/2 and, for k ≥ 1,
/// c̄_k = He_{k-1}(0)·φ(0)/√k from He_k φ = −(1/√k)(He_{k-1} φ)′.
pub fn relu_prime_hermite_closed_form(p: usize) -> HermiteSeries {
    let pdf0 = 1.0 / (2.0 * PI).sqrt();
    let mut coeffs = vec![0.0; p + 1];
    coeffs[0] = 0.5;
    // h_j = He_j(0)
    let mut h_prev = 0.0;
    let mut h = 1.0;
    for k in 1..=p {
        coeffs[k] = h * pdf0 / (k as f64).sqrt();
        let j = (k - 1) as f64;
        let next = -(j.sqrt()) * h_prev / (j + 1.0).sqrt();
        h_prev = h;
        h = next;
    }
    HermiteSeries { coeffs, quad_nodes: 0, target: "relu'".into(), second_moment: 0.5 }
}

/// Σ_{k>p} c̄_k².
pub fn tail_energy(series: &HermiteSeries, cutoff: usize) -> Result<f64> {
    if cutoff > series.degree() {
        return Err(Error::InvalidArgument(format!("cutoff {cutoff} exceeds degree {}", series.degree())));
    }
    Ok(series.coeffs[cutoff + 1..].iter().map(|c| c * c).sum())
}

/// Least-squares slope of ln|c̄_k| against √(2k+1) over k ∈ [k_min, k_max].
pub fn decay_slope(series: &HermiteSeries, k_min: usize, k_max: usize) -> Result<f64> {
    let pts: Vec<(f64, f64)> = (k_min..=k_max.min(series.degree()))
        .filter(|&k| series.coeffs[k].abs() >= NOISE_FLOOR)
        .map(|k| ((2.0 * k as f64 + 1.0).sqrt(), series.coeffs[k].abs().ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} usable coefficients in [{k_min}, {k_max}], need 5",
            pts.len()
        )));
    }
    Ok(ls_slope(&pts))
}

pub(crate) fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// R(ρ) = Σ_a c̄_a² ρ^a.
pub fn r_function(series: &HermiteSeries, rho: f64) -> f64 {
    series.coeffs.iter().rev().fold(0.0, |acc, c| acc * rho + c * c)
}
