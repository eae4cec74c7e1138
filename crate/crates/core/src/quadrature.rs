//! Gauss rules and Gaussian expectations.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::{Mutex, OnceLock};

/// Nodes and weights of an n-point Gauss rule.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

const RESCALE: f64 = 1e150;

/// Physicists' Gauss–Hermite rule for the weight e^{-x²}, nodes ascending.
///
/// Nodes are bracketed by Sturm-sequence bisection on the Jacobi matrix and
/// polished by Newton steps on the orthonormal recurrence. Large-n
/// recurrences overflow near the outer nodes, so values are rescaled and the
/// scale is carried in log space into the weight. Rules are cached per n.
pub fn gauss_hermite_phys(n: usize) -> Result<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().expect("rule cache poisoned").get(&n) {
        return Ok(r.clone());
    }
    let rule = compute_gauss_hermite(n)?;
    cache.lock().expect("rule cache poisoned").insert(n, rule.clone());
    Ok(rule)
}

// Eigenvalues of the Hermite Jacobi matrix below x.
fn sturm_count(n: usize, x: f64) -> usize {
    let mut count = 0;
    let mut q = -x;
    if q < 0.0 {
        count += 1;
    }
    for k in 1..n {
        let prev = if q == 0.0 { f64::EPSILON } else { q };
        q = -x - (k as f64 / 2.0) / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn compute_gauss_hermite(n: usize) -> Result<Rule> {
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss-Hermite rule needs n >= 1".into()));
    }
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    let upper = (2.0 * nf + 1.0).sqrt() + 1.0;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // nodes are symmetric; find the nonnegative half (index ascending)
    for idx in n / 2..n {
        let (mut lo, mut hi) = (-upper, upper);
        // idx-th smallest: count(x) <= idx  <=>  x <= node
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sturm_count(n, mid) <= idx {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
                break;
            }
        }
        let mut z = 0.5 * (lo + hi);
        let mut pp = 0.0;
        let mut scale_log = 0.0;
        for it in 0..4 {
            let (p1, p2, s) = recurrence(n, z, pim4);
            pp = (2.0 * nf).sqrt() * p2;
            scale_log = s;
            if it == 3 {
                break;
            }
            let step = p1 / pp;
            if step.is_finite() && step.abs() < hi - lo + 1e-12 * z.abs().max(1.0) {
                z -= step;
            }
        }
        if !(pp.is_finite() && pp != 0.0) {
            return Err(Error::Quadrature(format!("Gauss-Hermite node {idx} of {n} is degenerate")));
        }
        let wi = (LN_2 - 2.0 * (pp.abs().ln() + scale_log)).exp();
        nodes[idx] = z;
        weights[idx] = wi;
        nodes[n - 1 - idx] = -z;
        weights[n - 1 - idx] = wi;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(Rule { nodes, weights })
}

// Returns (p_n, p_{n-1}, log scale) of the orthonormal Hermite recurrence.
fn recurrence(n: usize, z: f64, p0: f64) -> (f64, f64, f64) {
    let mut p1 = p0;
    let mut p2 = 0.0;
    let mut scale_log = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        if p1.abs() > RESCALE {
            p1 /= RESCALE;
            p2 /= RESCALE;
            scale_log += RESCALE.ln();
        }
    }
    (p1, p2, scale_log)
}

/// Gauss–Hermite rule for the standard normal density: Σ w_i f(z_i) ≈ E f(z).
pub fn gauss_hermite_prob(n: usize) -> Result<Rule> {
    let phys = gauss_hermite_phys(n)?;
    let s = PI.sqrt();
    Ok(Rule {
        nodes: phys.nodes.iter().map(|x| x * std::f64::consts::SQRT_2).collect(),
        weights: phys.weights.iter().map(|w| w / s).collect(),
    })
}

/// Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Result<Rule> {
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss-Legendre rule needs n >= 1".into()));
    }
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    Ok(Rule { nodes: x, weights: w })
}

const GL_ORDER: usize = 20;
const MAX_DEPTH: usize = 40;

/// Adaptive Gauss–Legendre integral of a vector-valued integrand on [a, b].
///
/// `f(x, out)` writes `width` values. An interval is accepted when the
/// 20-point estimate agrees with the sum over its two halves to
/// `abs_tol` in every component.
pub fn adaptive_legendre<F>(f: &F, a: f64, b: f64, width: usize, abs_tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &mut [f64]),
{
    let rule = gauss_legendre(GL_ORDER)?;
    let mut scratch = vec![0.0; width];
    let whole = panel(&rule, f, a, b, &mut scratch);
    let mut out = vec![0.0; width];
    refine(&rule, f, a, b, whole, abs_tol, 0, &mut scratch, &mut out)?;
    Ok(out)
}

fn panel<F: Fn(f64, &mut [f64])>(rule: &Rule, f: &F, a: f64, b: f64, scratch: &mut [f64]) -> Vec<f64> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = vec![0.0; scratch.len()];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        f(mid + half * x, scratch);
        for (s, v) in acc.iter_mut().zip(scratch.iter()) {
            *s += w * half * v;
        }
    }
    acc
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64, &mut [f64])>(
    rule: &Rule,
    f: &F,
    a: f64,
    b: f64,
    whole: Vec<f64>,
    tol: f64,
    depth: usize,
    scratch: &mut [f64],
    out: &mut [f64],
) -> Result<()> {
    let mid = 0.5 * (a + b);
    let left = panel(rule, f, a, mid, scratch);
    let right = panel(rule, f, mid, b, scratch);
    let err = whole
        .iter()
        .zip(left.iter().zip(&right))
        .map(|(w, (l, r))| (w - l - r).abs())
        .fold(0.0, f64::max);
    if err.is_nan() {
        return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
    }
    if err <= tol {
        for (o, (l, r)) in out.iter_mut().zip(left.iter().zip(&right)) {
            *o += l + r;
        }
        return Ok(());
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature(format!("adaptive Gauss-Legendre stalled on [{a}, {b}] (err {err:e})")));
    }
    refine(rule, f, a, mid, left, 0.5 * tol, depth + 1, scratch, out)?;
    refine(rule, f, mid, b, right, 0.5 * tol, depth + 1, scratch, out)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// E f(z) for z ~ N(0,1). With a kink the integral is split there and both
/// halves are integrated adaptively over `half_width`.
pub fn gaussian_expectation<F: Fn(f64) -> f64>(f: F, kink: Option<f64>, nodes: usize) -> Result<f64> {
    match kink {
        None => {
            let rule = gauss_hermite_prob(nodes)?;
            let mut s = 0.0;
            for (z, w) in rule.nodes.iter().zip(&rule.weights) {
                let v = f(*z);
                if !v.is_finite() {
                    return Err(Error::NonFinite { x: *z, value: v });
                }
                s += w * v;
            }
            Ok(s)
        }
        Some(alpha) => {
            let g = |x: f64, out: &mut [f64]| out[0] = f(x) * normal_pdf(x);
            let hw = 14.0;
            let lo = adaptive_legendre(&g, alpha - hw, alpha, 1, 1e-15)?;
            let hi = adaptive_legendre(&g, alpha, alpha + hw, 1, 1e-15)?;
            Ok(lo[0] + hi[0])
        }
    }
}
