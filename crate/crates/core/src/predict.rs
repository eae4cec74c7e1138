//! Linearized residual predictors built from the spectrum of G^(0).

use crate::linalg::{dot, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub residual_norm: f64,
    /// η c_φ² λ_max ≥ 1: the discrete recursion is outside its stable range.
    pub unstable: bool,
}

/// √(Σ_i (1 − η c_φ² λ_i)^{2t} (v_iᵀ r_0)²) with r_0 = y − u^(0).
pub fn spectral_predict(spec: &Spectrum, r0: &[f64], eta: f64, c_phi: f64, t: usize) -> Prediction {
    let s = eta * c_phi * c_phi;
    let mut acc = 0.0;
    for (i, lam) in spec.values.iter().enumerate() {
        let proj = dot(&spec.vector(i), r0);
        let f = (1.0 - s * lam).powi(t as i32);
        acc += (f * proj).powi(2);
    }
    Prediction { residual_norm: acc.sqrt(), unstable: s * spec.lambda_max() >= 1.0 }
}

/// Residual y − u(t) = Σ_i e^{−λ_i t} v_i v_iᵀ r_0 of the gradient flow.
pub fn flow_surrogate(spec: &Spectrum, r0: &[f64], t: f64) -> Vec<f64> {
    let n = r0.len();
    let mut out = vec![0.0; n];
    for (i, lam) in spec.values.iter().enumerate() {
        let v = spec.vector(i);
        let c = (-lam * t).exp() * dot(&v, r0);
        out.iter_mut().zip(&v).for_each(|(o, vi)| *o += c * vi);
    }
    out
}
