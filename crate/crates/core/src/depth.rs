//! Propagation of data through deep random layers.
//!
//! Hidden weights of every layer are regenerated row by row from keyed
//! streams instead of being stored; an 8-layer stack at m = 2·10⁴ would
//! otherwise need gigabytes.

use crate::activation::ActivationSpec;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::hermite::{r_function, HermiteSeries};
use crate::linalg::{dot, Mat};
use crate::quadrature::gaussian_expectation;
use crate::rng::{fill_normal, substream2, Stream};
use rayon::prelude::*;

pub const MAX_LAYERS: usize = 16;

#[derive(Clone, Debug)]
pub struct DepthTrace {
    /// norms[l][i] = ‖x_i^(l)‖, l = 0 is the input.
    pub norms: Vec<Vec<f64>>,
    /// Normalized correlations ρ_ij^(l).
    pub correlations: Vec<Mat>,
}

impl DepthTrace {
    pub fn layers(&self) -> usize {
        self.norms.len() - 1
    }

    pub fn max_offdiag(&self, l: usize) -> f64 {
        let c = &self.correlations[l];
        let mut best = 0.0f64;
        for i in 0..c.rows {
            for j in 0..c.cols {
                if i != j {
                    best = best.max(c[(i, j)].abs());
                }
            }
        }
        best
    }

    pub fn norm_range(&self, l: usize) -> (f64, f64) {
        let v = &self.norms[l];
        (v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(0.0, f64::max))
    }
}

fn trace_of(points: &[Vec<f64>]) -> (Vec<f64>, Mat) {
    let n = points.len();
    let norms: Vec<f64> = points.iter().map(|p| dot(p, p).sqrt()).collect();
    let corr = Mat::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            (dot(&points[i], &points[j]) / (norms[i] * norms[j])).clamp(-1.0, 1.0)
        }
    });
    (norms, corr)
}

/// Checks φ(0) = 0 and E φ(z) = 0.
pub fn check_depth_preconditions(spec: &ActivationSpec) -> Result<()> {
    let phi0 = spec.eval0(0.0);
    if phi0.abs() > 1e-12 {
        return Err(Error::Precondition(format!("{}: phi(0) = {phi0} but depth propagation needs phi(0) = 0", spec.name)));
    }
    let mean = gaussian_expectation(|z| spec.eval0(z), spec.kink(), 200)?;
    if mean.abs() > 1e-8 {
        return Err(Error::Precondition(format!("{}: E phi(z) = {mean:e} but depth propagation needs a zero-mean activation", spec.name)));
    }
    Ok(())
}

/// x_k^(l) = (c_φ/√m) φ(w_k^(l)ᵀ x^(l−1)) with w_k^(l) ~ N(0, I).
pub fn depth_forward(spec: &ActivationSpec, data: &Dataset, layers: usize, m: usize, seed: u64) -> Result<DepthTrace> {
    check_depth_preconditions(spec)?;
    if layers > MAX_LAYERS {
        return Err(Error::InvalidArgument(format!("at most {MAX_LAYERS} layers, got {layers}")));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let c = spec
        .c_phi_deep
        .ok_or_else(|| Error::DegenerateActivation(format!("{} has E phi^2 = 0", spec.name)))?;
    let scale = c / (m as f64).sqrt();
    let mut points = data.points();
    let (n0, c0) = trace_of(&points);
    let mut trace = DepthTrace { norms: vec![n0], correlations: vec![c0] };
    let n = points.len();
    for l in 1..=layers {
        let din = points[0].len();
        // out[k][i]
        let rows: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|k| {
                let mut rng = substream2(seed, Stream::DeepLayer, l as u64, k as u64);
                let mut w = vec![0.0; din];
                fill_normal(&mut rng, &mut w, 1.0);
                points.iter().map(|x| scale * spec.eval0(dot(&w, x))).collect()
            })
            .collect();
        points = (0..n).map(|i| rows.iter().map(|r| r[i]).collect()).collect();
        let (nl, cl) = trace_of(&points);
        trace.norms.push(nl);
        trace.correlations.push(cl);
    }
    Ok(trace)
}

/// R(ρ)/R(1) for the Hermite series of φ.
pub fn correlation_map(series: &HermiteSeries, rho: f64) -> f64 {
    r_function(series, rho) / r_function(series, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointSteps {
    pub steps: usize,
    /// (2/(1−a))·max(ln(1/δ), ln(1/ε)) with δ = 1 − ρ₀.
    pub bound: f64,
}

pub const MAX_FIXED_POINT_STEPS: usize = 10_000_000;

/// Iterates f̃(ρ) = aρ + (1−a)ρ² from ρ₀ until ρ ≤ ε.
pub fn fixed_point_steps(a: f64, rho0: f64, eps: f64) -> Result<FixedPointSteps> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidArgument(format!("contraction parameter must lie in (0, 1), got {a}")));
    }
    if !(0.0..1.0).contains(&rho0) {
        return Err(Error::InvalidArgument(format!("rho0 must lie in [0, 1), got {rho0}")));
    }
    if !(eps > 0.0 && eps < rho0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, rho0), got {eps}")));
    }
    let mut rho = rho0;
    let mut steps = 0;
    while rho > eps {
        rho = fixed_point_map(a, rho);
        steps += 1;
        if steps > MAX_FIXED_POINT_STEPS {
            return Err(Error::NoConvergence { sweeps: steps, off_diagonal: rho });
        }
    }
    let delta = 1.0 - rho0;
    let bound = 2.0 / (1.0 - a) * (1.0 / delta).ln().max((1.0 / eps).ln());
    Ok(FixedPointSteps { steps, bound })
}

pub fn fixed_point_map(a: f64, rho: f64) -> f64 {
    a * rho + (1.0 - a) * rho * rho
}

/// c̄₁² / Σ_{a≥1} c̄_a² for the series of φ (not φ′).
pub fn depth_constant_c(series: &HermiteSeries) -> Result<f64> {
    if series.coeffs[0].abs() > 1e-6 {
        return Err(Error::Precondition(format!("series has c_0 = {:e}, expected a zero-mean activation", series.coeffs[0])));
    }
    let denom: f64 = series.coeffs.iter().skip(1).map(|c| c * c).sum();
    if denom <= 1e-12 {
        return Err(Error::DegenerateActivation("no Hermite mass above degree 0".into()));
    }
    Ok(series.coeffs.get(1).map_or(0.0, |c| c * c) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::catalog;
    use crate::data::random_unit;

    #[test]
    fn quadratic_map_values() {
        assert_eq!(fixed_point_map(0.3, 0.0), 0.0);
        assert_eq!(fixed_point_map(0.3, 1.0), 1.0);
        assert_eq!(fixed_point_map(0.25, 0.5), 0.3125);
    }

    #[test]
    fn zero_layers_is_identity() {
        let data = random_unit(4, 5, 1).unwrap();
        let t = depth_forward(&catalog("tanh").unwrap(), &data, 0, 10, 0).unwrap();
        assert_eq!(t.layers(), 0);
        assert!(t.correlations[0].max_abs_diff(&data.inner_products()) < 1e-15);
        assert!(t.norms[0].iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn sigmoid_rejected() {
        let data = random_unit(3, 3, 1).unwrap();
        let e = depth_forward(&catalog("sigmoid").unwrap(), &data, 2, 10, 0).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
        let e = depth_forward(&catalog("relu").unwrap(), &data, 2, 10, 0).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
    }

    #[test]
    fn constant_c_edge_cases() {
        let lin = HermiteSeries { coeffs: vec![0.0, 1.0, 0.0], quad_nodes: 0, target: "x".into(), second_moment: 1.0 };
        assert_eq!(depth_constant_c(&lin).unwrap(), 1.0);
        let he3 = HermiteSeries { coeffs: vec![0.0, 0.0, 0.0, 1.0], quad_nodes: 0, target: "He3".into(), second_moment: 1.0 };
        assert_eq!(depth_constant_c(&he3).unwrap(), 0.0);
        let flat = HermiteSeries { coeffs: vec![0.0, 0.0], quad_nodes: 0, target: "0".into(), second_moment: 0.0 };
        assert!(depth_constant_c(&flat).is_err());
    }
}
