//! Central finite-difference checks of the hidden-layer gradient.

use crate::activation::Smoothness;
use crate::data::Dataset;
use crate::error::Result;
use crate::network::{forward, grad_w, quadratic_loss, NetworkState};
use crate::train::{grad_w_multiclass, multiclass_loss};

pub const STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug)]
pub struct GradCheck {
    pub max_rel_err: f64,
    pub checked: usize,
    /// Coordinates skipped because a pre-activation sits within 10h of a kink.
    pub skipped: usize,
}

fn near_kink(net: &NetworkState, data: &Dataset, k: usize) -> bool {
    match net.spec.smoothness {
        Smoothness::Smooth => false,
        Smoothness::Jr { alpha, .. } => (0..data.n()).any(|i| (net.preact(k, &data.point(i)) - alpha).abs() < 10.0 * STEP),
    }
}

fn compare<L>(net: &NetworkState, data: &Dataset, analytic: &crate::linalg::Mat, loss: L) -> Result<GradCheck>
where
    L: Fn(&NetworkState) -> Result<f64>,
{
    let scale = analytic.data.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    let (mut checked, mut skipped) = (0, 0);
    for k in 0..net.m() {
        if near_kink(net, data, k) {
            skipped += net.d();
            continue;
        }
        for r in 0..net.d() {
            let orig = probe.w[(k, r)];
            probe.w[(k, r)] = orig + STEP;
            let lp = loss(&probe)?;
            probe.w[(k, r)] = orig - STEP;
            let lm = loss(&probe)?;
            probe.w[(k, r)] = orig;
            let fd = (lp - lm) / (2.0 * STEP);
            let a = analytic[(k, r)];
            let denom = a.abs().max(fd.abs()).max(1e-6 * scale);
            if denom > 0.0 {
                worst = worst.max((a - fd).abs() / denom);
            }
            checked += 1;
        }
    }
    Ok(GradCheck { max_rel_err: worst, checked, skipped })
}

/// Quadratic-loss gradient against central differences.
pub fn check_quadratic(net: &NetworkState, data: &Dataset, y: &[f64]) -> Result<GradCheck> {
    let analytic = grad_w(net, data, y)?;
    compare(net, data, &analytic, |p| Ok(quadratic_loss(&forward(p, data)?, y)))
}

/// Cross-entropy gradient against central differences.
pub fn check_cross_entropy(net: &NetworkState, data: &Dataset, labels: &[usize]) -> Result<GradCheck> {
    let analytic = grad_w_multiclass(net, data, labels)?;
    compare(net, data, &analytic, |p| multiclass_loss(p, data, labels))
}
