//! Chebyshev approximation on a symmetric interval.

use crate::error::{Error, Result};
use std::f64::consts::PI;

pub const SUP_GRID: usize = 100_000;

#[derive(Clone, Debug)]
pub struct ChebyshevApprox {
    pub half_width: f64,
    /// Coefficients a_0..a_p of T_j(x / half_width).
    pub coeffs: Vec<f64>,
    /// Max |f − approx| on a uniform grid of `SUP_GRID` points.
    pub sup_error_estimate: f64,
}

impl ChebyshevApprox {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, x / self.half_width)
    }
}

fn clenshaw(a: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for c in a.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + a[0]
}

/// ⌈ln((4π + 2τ)/(π²ε)) / ln(1 + π/τ)⌉.
pub fn cheb_degree_for_eps(tau: f64, eps: f64) -> Result<usize> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1], got {eps}")));
    }
    let v = ((4.0 * PI + 2.0 * tau) / (PI * PI * eps)).ln() / (1.0 + PI / tau).ln();
    Ok(v.ceil().max(0.0) as usize)
}

/// Chebyshev interpolant of f on [−k, k] from a Chebyshev–Gauss rule with
/// 4(p+1) nodes.
pub fn cheb_approx<F: Fn(f64) -> f64>(f: F, half_width: f64, p: usize) -> Result<ChebyshevApprox> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::InvalidArgument(format!("half width must be positive, got {half_width}")));
    }
    let n = 4 * (p + 1);
    let mut coeffs = vec![0.0; p + 1];
    for i in 0..n {
        let theta = PI * (i as f64 + 0.5) / n as f64;
        let x = half_width * theta.cos();
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { x, value: v });
        }
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c += v * (j as f64 * theta).cos();
        }
    }
    for (j, c) in coeffs.iter_mut().enumerate() {
        *c *= if j == 0 { 1.0 } else { 2.0 } / n as f64;
    }
    let mut sup = 0.0f64;
    for i in 0..SUP_GRID {
        let x = -half_width + 2.0 * half_width * i as f64 / (SUP_GRID - 1) as f64;
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { x, value: v });
        }
        sup = sup.max((v - clenshaw(&coeffs, x / half_width)).abs());
    }
    Ok(ChebyshevApprox { half_width, coeffs, sup_error_estimate: sup })
}
