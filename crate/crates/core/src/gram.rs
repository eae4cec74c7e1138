//! G-matrices: finite width, infinite width, output-layer H and multiclass.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::hermite::HermiteSeries;
use crate::linalg::{eigen_sym, Mat, Spectrum};
use crate::network::{tree_combine, InitScheme, NetworkState};
use crate::reduce::CHUNK;
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    FiniteM { m: usize, seed: u64, scheme: InitScheme },
    InfiniteM { order: usize },
    OutputH { m: usize, seed: u64 },
    Multiclass { m: usize, seed: u64, classes: usize },
}

#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub values: Mat,
    pub provenance: Provenance,
    pub activation: String,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.values.rows
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        eigen_sym(&self.values)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Sum of two Gram matrices of the same size (e.g. G + H).
    pub fn plus(&self, other: &GramMatrix) -> Result<Mat> {
        if self.n() != other.n() {
            return Err(Error::Shape(format!("{} vs {}", self.n(), other.n())));
        }
        let mut m = self.values.clone();
        m.data.iter_mut().zip(&other.values.data).for_each(|(a, b)| *a += b);
        Ok(m)
    }

    /// Block (q, q′) of a multiclass matrix, n × n.
    pub fn block(&self, q: usize, q2: usize, classes: usize) -> Mat {
        let n = self.n() / classes;
        Mat::from_fn(n, n, |i, j| self.values[(i * classes + q, j * classes + q2)])
    }
}

/// md × n matrix whose column i stacks a_k φ′(w_kᵀx_i) x_i over k.
pub fn build_m(data: &Dataset, net: &NetworkState) -> Result<Mat> {
    net.check_data(data)?;
    let (m, d, n) = (net.m(), net.d(), data.n());
    let points = data.points();
    let mut out = Mat::zeros(m * d, n);
    out.data.par_chunks_mut(d * n).enumerate().for_each(|(k, block)| {
        let ak = net.a[(k, 0)];
        for (i, x) in points.iter().enumerate() {
            let s = ak * net.spec.eval1(net.preact(k, x));
            for r in 0..d {
                block[r * n + i] = s * x[r];
            }
        }
    });
    Ok(out)
}

// Σ_k v_k v_kᵀ over neurons, v_k ∈ R^{n·C} with entries a_kq φ′(z_ki); then
// multiplied by ⟨x_i, x_j⟩ and the scheme's normalization.
fn accumulate<F>(data: &Dataset, net: &NetworkState, width: usize, fill: F, with_inner: bool) -> Mat
where
    F: Fn(usize, &[Vec<f64>], &mut [f64]) + Sync,
{
    let points = data.points();
    let m = net.m();
    let n_chunks = m.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; width * width];
            let mut v = vec![0.0; width];
            for k in c * CHUNK..((c + 1) * CHUNK).min(m) {
                fill(k, &points, &mut v);
                for p in 0..width {
                    let vp = v[p];
                    if vp == 0.0 {
                        continue;
                    }
                    let row = &mut acc[p * width..p * width + width];
                    for (r, vr) in row[p..].iter_mut().zip(&v[p..]) {
                        *r += vp * vr;
                    }
                }
            }
            acc
        })
        .collect();
    let sum = tree_combine(parts, width * width);
    let classes = width / data.n();
    let inner = data.inner_products();
    let scale = net.gram_scale();
    Mat::from_fn(width, width, |p, r| {
        let (lo, hi) = if p <= r { (p, r) } else { (r, p) };
        let ip = if with_inner { inner[(p / classes, r / classes)] } else { 1.0 };
        scale * sum[lo * width + hi] * ip
    })
}

/// g_ij = (1/m) Σ_k a_k² φ′(w_kᵀx_i) φ′(w_kᵀx_j) ⟨x_i, x_j⟩.
pub fn build_g_finite(data: &Dataset, net: &NetworkState) -> Result<GramMatrix> {
    net.check_data(data)?;
    let values = accumulate(
        data,
        net,
        data.n(),
        |k, pts, v| {
            let ak = net.a[(k, 0)];
            for (i, x) in pts.iter().enumerate() {
                v[i] = ak * net.spec.eval1(net.preact(k, x));
            }
        },
        true,
    );
    Ok(GramMatrix {
        values,
        provenance: Provenance::FiniteM { m: net.m(), seed: net.seed, scheme: net.scheme },
        activation: net.spec.name.clone(),
    })
}

/// h_ij = (1/m) Σ_r φ(w_rᵀx_i) φ(w_rᵀx_j).
pub fn build_h_output(data: &Dataset, net: &NetworkState) -> Result<GramMatrix> {
    net.check_data(data)?;
    let values = accumulate(
        data,
        net,
        data.n(),
        |k, pts, v| {
            for (i, x) in pts.iter().enumerate() {
                v[i] = net.spec.eval0(net.preact(k, x));
            }
        },
        false,
    );
    Ok(GramMatrix {
        values,
        provenance: Provenance::OutputH { m: net.m(), seed: net.seed },
        activation: net.spec.name.clone(),
    })
}

/// nC × nC matrix with entry (iC+q, jC+q′) = (1/m) Σ_k a_kq a_kq′ φ′_ki φ′_kj ⟨x_i, x_j⟩.
pub fn multiclass_g(data: &Dataset, net: &NetworkState) -> Result<GramMatrix> {
    net.check_data(data)?;
    let c = net.classes();
    let values = accumulate(
        data,
        net,
        data.n() * c,
        |k, pts, v| {
            let ak = net.a.row(k);
            for (i, x) in pts.iter().enumerate() {
                let g = net.spec.eval1(net.preact(k, x));
                for q in 0..c {
                    v[i * c + q] = ak[q] * g;
                }
            }
        },
        true,
    );
    Ok(GramMatrix {
        values,
        provenance: Provenance::Multiclass { m: net.m(), seed: net.seed, classes: c },
        activation: net.spec.name.clone(),
    })
}

/// g_ij = Σ_{a ≤ R} c̄_a² (x_iᵀx_j)^{a+1} off the diagonal; the diagonal is
/// the series' quadrature estimate of E φ′(z)².
pub fn build_g_infinite(data: &Dataset, series: &HermiteSeries, order: usize) -> Result<GramMatrix> {
    if order > series.degree() {
        return Err(Error::InvalidArgument(format!("order {order} exceeds series degree {}", series.degree())));
    }
    for j in 0..data.n() {
        let nj = crate::linalg::norm(&data.point(j));
        if (nj - 1.0).abs() > crate::data::UNIT_TOL {
            return Err(Error::Assumption(format!("column {j} has norm {nj}, expected 1")));
        }
    }
    let inner = data.inner_products();
    let sq: Vec<f64> = series.coeffs[..=order].iter().map(|c| c * c).collect();
    let n = data.n();
    let values = Mat::from_fn(n, n, |i, j| {
        if i == j {
            series.second_moment
        } else {
            let rho = inner[(i, j)];
            rho * sq.iter().rev().fold(0.0, |acc, c| acc * rho + c)
        }
    });
    Ok(GramMatrix {
        values,
        provenance: Provenance::InfiniteM { order },
        activation: series.target.trim_end_matches('\'').to_string(),
    })
}

/// ‖Mζ‖ without materializing M.
pub fn m_times_norm(data: &Dataset, net: &NetworkState, zeta: &[f64]) -> Result<f64> {
    net.check_data(data)?;
    if zeta.len() != data.n() {
        return Err(Error::Shape(format!("zeta has {} entries for {} points", zeta.len(), data.n())));
    }
    let points = data.points();
    let d = net.d();
    let m = net.m();
    let parts: Vec<Vec<f64>> = (0..m.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut s = 0.0;
            let mut v = vec![0.0; d];
            for k in c * CHUNK..((c + 1) * CHUNK).min(m) {
                v.iter_mut().for_each(|x| *x = 0.0);
                for (i, x) in points.iter().enumerate() {
                    let t = zeta[i] * net.spec.eval1(net.preact(k, x));
                    v.iter_mut().zip(x).for_each(|(a, b)| *a += t * b);
                }
                s += net.a[(k, 0)].powi(2) * v.iter().map(|x| x * x).sum::<f64>();
            }
            vec![s]
        })
        .collect();
    Ok(tree_combine(parts, 1)[0].sqrt())
}
