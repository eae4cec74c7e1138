//! Activation catalog.

use crate::error::{Error, Result};
use crate::quadrature::gaussian_expectation;

pub const SELU_LAMBDA: f64 = 1.0507;
pub const SELU_ALPHA: f64 = 1.6733;
pub const LRELU_DEFAULT_SLOPE: f64 = 0.01;
/// Offset used to measure one-sided limits at a kink.
pub const KINK_PROBE: f64 = 1e-7;
/// Polynomial activations are only bounded on a finite window.
pub const POLY_WINDOW: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    Relu,
    LeakyRelu(f64),
    Linear,
    Tanh,
    Sigmoid,
    Swish,
    Elu,
    Selu,
    /// Coefficients of φ′ in ascending powers; φ has zero constant term.
    Polynomial(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Smoothness {
    Smooth,
    /// The r-th derivative jumps by `jump` at `alpha`.
    Jr { r: u32, alpha: f64, jump: f64 },
}

#[derive(Clone, Debug)]
pub struct ActivationSpec {
    pub name: String,
    pub kind: Kind,
    pub smoothness: Smoothness,
    pub lipschitz_alpha: f64,
    pub smooth_beta: f64,
    pub c_phi_shallow: f64,
    /// (E φ(z)²)^{-1/2}; `None` when φ vanishes identically.
    pub c_phi_deep: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Neither,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

impl ActivationSpec {
    pub fn eval0(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Relu => x.max(0.0),
            Kind::LeakyRelu(s) => {
                if x >= 0.0 {
                    x
                } else {
                    s * x
                }
            }
            Kind::Linear => x,
            Kind::Tanh => x.tanh(),
            Kind::Sigmoid => sigmoid(x),
            Kind::Swish => x * sigmoid(x),
            Kind::Elu => {
                if x >= 0.0 {
                    x
                } else {
                    x.exp_m1()
                }
            }
            Kind::Selu => {
                if x >= 0.0 {
                    SELU_LAMBDA * x
                } else {
                    SELU_LAMBDA * SELU_ALPHA * x.exp_m1()
                }
            }
            Kind::Polynomial(c) => x * c.iter().enumerate().rev().fold(0.0, |acc, (j, v)| acc * x + v / (j as f64 + 1.0)),
        }
    }

    pub fn eval1(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Relu => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::LeakyRelu(s) => {
                if x >= 0.0 {
                    1.0
                } else {
                    *s
                }
            }
            Kind::Linear => 1.0,
            Kind::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Kind::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            Kind::Swish => {
                let s = sigmoid(x);
                s + x * s * (1.0 - s)
            }
            Kind::Elu => {
                if x >= 0.0 {
                    1.0
                } else {
                    x.exp()
                }
            }
            Kind::Selu => {
                if x >= 0.0 {
                    SELU_LAMBDA
                } else {
                    SELU_LAMBDA * SELU_ALPHA * x.exp()
                }
            }
            Kind::Polynomial(c) => horner(c, x),
        }
    }

    pub fn eval2(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Relu | Kind::LeakyRelu(_) | Kind::Linear => 0.0,
            Kind::Tanh => {
                let t = x.tanh();
                -2.0 * t * (1.0 - t * t)
            }
            Kind::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s) * (1.0 - 2.0 * s)
            }
            Kind::Swish => {
                let s = sigmoid(x);
                s * (1.0 - s) * (2.0 + x * (1.0 - 2.0 * s))
            }
            Kind::Elu => {
                if x >= 0.0 {
                    0.0
                } else {
                    x.exp()
                }
            }
            Kind::Selu => {
                if x >= 0.0 {
                    0.0
                } else {
                    SELU_LAMBDA * SELU_ALPHA * x.exp()
                }
            }
            Kind::Polynomial(c) => {
                let d: Vec<f64> = c.iter().enumerate().skip(1).map(|(j, v)| j as f64 * v).collect();
                horner(&d, x)
            }
        }
    }

    /// Kink location for J_r activations.
    pub fn kink(&self) -> Option<f64> {
        match self.smoothness {
            Smoothness::Smooth => None,
            Smoothness::Jr { alpha, .. } => Some(alpha),
        }
    }

    /// Parity of φ′, used to halve the kill-vector constraint system.
    pub fn derivative_parity(&self) -> Parity {
        match &self.kind {
            Kind::Linear | Kind::Tanh | Kind::Sigmoid => Parity::Even,
            Kind::Polynomial(c) => {
                let even = c.iter().skip(1).step_by(2).all(|v| *v == 0.0);
                let odd = c.iter().step_by(2).all(|v| *v == 0.0);
                match (even, odd) {
                    (true, _) => Parity::Even,
                    (false, true) => Parity::Odd,
                    _ => Parity::Neither,
                }
            }
            _ => Parity::Neither,
        }
    }

    /// Degree of φ′ when it is a polynomial.
    pub fn derivative_degree(&self) -> Option<usize> {
        match &self.kind {
            Kind::Linear => Some(0),
            Kind::Polynomial(c) => Some(c.iter().rposition(|v| *v != 0.0).unwrap_or(0)),
            _ => None,
        }
    }

    /// Measured |f⁽ʳ⁾(α⁺) − f⁽ʳ⁾(α⁻)| using evaluations at α ± 1e-7.
    pub fn measured_jump(&self, r: u32, alpha: f64) -> f64 {
        let f = |x: f64| match r {
            0 => self.eval0(x),
            1 => self.eval1(x),
            _ => self.eval2(x),
        };
        (f(alpha + KINK_PROBE) - f(alpha - KINK_PROBE)).abs()
    }
}

fn jr(spec: &ActivationSpec, r: u32) -> Smoothness {
    Smoothness::Jr { r, alpha: 0.0, jump: spec.measured_jump(r, 0.0) }
}

/// Looks up an activation by name: `relu`, `lrelu`, `lrelu(0.2)`, `linear`,
/// `tanh`, `sigmoid`, `swish`, `elu`, `selu`, `quadratic`,
/// `polynomial(c0, c1, ...)` (coefficients of φ′).
pub fn catalog(name: &str) -> Result<ActivationSpec> {
    let name = name.trim();
    let (base, args) = match name.find('(') {
        Some(i) => {
            let inner = name[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::UnknownActivation(name.to_string()))?;
            (&name[..i], Some(inner))
        }
        None => (name, None),
    };
    let parse_args = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad number `{t}` in `{name}`"))))
            .collect()
    };
    let base = base.trim().to_ascii_lowercase();
    let kind = match (base.as_str(), args) {
        ("relu", None) => Kind::Relu,
        ("lrelu" | "leaky_relu", a) => {
            let slope = match a {
                None => LRELU_DEFAULT_SLOPE,
                Some(s) => match parse_args(s)?.as_slice() {
                    [v] => *v,
                    _ => return Err(Error::InvalidArgument(format!("lrelu takes one slope, got `{name}`"))),
                },
            };
            if !(slope.is_finite() && slope < 1.0) {
                return Err(Error::InvalidArgument(format!("lrelu slope must be < 1, got {slope}")));
            }
            Kind::LeakyRelu(slope)
        }
        ("linear", None) => Kind::Linear,
        ("tanh", None) => Kind::Tanh,
        ("sigmoid", None) => Kind::Sigmoid,
        ("swish", None) => Kind::Swish,
        ("elu", None) => Kind::Elu,
        ("selu", None) => Kind::Selu,
        ("quadratic", None) => Kind::Polynomial(vec![0.0, 2.0]),
        ("polynomial", Some(s)) => {
            let c = parse_args(s)?;
            if c.is_empty() {
                return Err(Error::InvalidArgument("polynomial activation needs at least one coefficient".into()));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite coefficient in `{name}`")));
            }
            Kind::Polynomial(c)
        }
        ("polynomial", None) => {
            return Err(Error::InvalidArgument("polynomial activation needs at least one coefficient".into()))
        }
        _ => return Err(Error::UnknownActivation(name.to_string())),
    };
    from_kind(name, kind)
}

pub fn from_kind(name: &str, kind: Kind) -> Result<ActivationSpec> {
    let (alpha, beta) = match &kind {
        Kind::Relu | Kind::Linear => (1.0, 0.0),
        Kind::LeakyRelu(s) => (1.0f64.max(s.abs()), 0.0),
        Kind::Tanh => (1.0, 4.0 / (3.0 * 3f64.sqrt())),
        Kind::Sigmoid => (0.25, 1.0 / (6.0 * 3f64.sqrt())),
        Kind::Swish => (1.0999, 0.5),
        Kind::Elu => (1.0, 1.0),
        Kind::Selu => (SELU_LAMBDA * SELU_ALPHA, SELU_LAMBDA * SELU_ALPHA),
        Kind::Polynomial(c) => {
            let a = c.iter().enumerate().map(|(j, v)| v.abs() * POLY_WINDOW.powi(j as i32)).sum();
            let b = c.iter().enumerate().skip(1).map(|(j, v)| j as f64 * v.abs() * POLY_WINDOW.powi(j as i32 - 1)).sum();
            (a, b)
        }
    };
    let mut spec = ActivationSpec {
        name: name.to_string(),
        kind,
        smoothness: Smoothness::Smooth,
        lipschitz_alpha: alpha,
        smooth_beta: beta,
        c_phi_shallow: 1.0,
        c_phi_deep: None,
    };
    spec.smoothness = match spec.kind {
        Kind::Relu | Kind::LeakyRelu(_) | Kind::Selu => jr(&spec, 1),
        Kind::Elu => jr(&spec, 2),
        _ => Smoothness::Smooth,
    };
    spec.c_phi_deep = c_phi_deep(&spec, 200).ok();
    Ok(spec)
}

/// (E φ(z)²)^{-1/2}. Kinked activations are integrated piecewise.
pub fn c_phi_deep(spec: &ActivationSpec, quad_nodes: usize) -> Result<f64> {
    if quad_nodes < 64 {
        return Err(Error::InvalidArgument(format!("c_phi_deep needs >= 64 nodes, got {quad_nodes}")));
    }
    let m2 = gaussian_expectation(|z| spec.eval0(z).powi(2), spec.kink(), quad_nodes)?;
    if m2 <= 0.0 {
        return Err(Error::DegenerateActivation(format!("E[{}(z)^2] = {m2}", spec.name)));
    }
    Ok(m2.powf(-0.5))
}

/// max over the grid of |swish(x) − (x/2)(tanh(x/2) + 1)|.
pub fn swish_identity_residual(grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&x| (x * sigmoid(x) - 0.5 * x * ((0.5 * x).tanh() + 1.0)).abs())
        .fold(0.0, f64::max)
}
