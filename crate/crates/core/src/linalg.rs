//! Dense linear algebra: Jacobi eigen/SVD solvers and the Khatri–Rao /
//! Gershgorin utilities.

use crate::error::{Error, Result};
use std::ops::{Index, IndexMut};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!("{} values for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Mat::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// AᵀA.
    pub fn gram(&self) -> Mat {
        let mut g = Mat::zeros(self.cols, self.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..self.cols {
                let a = row[i];
                if a == 0.0 {
                    continue;
                }
                for j in i..self.cols {
                    g.data[i * self.cols + j] += a * row[j];
                }
            }
        }
        for i in 0..self.cols {
            for j in 0..i {
                g.data[i * self.cols + j] = g.data[j * self.cols + i];
            }
        }
        g
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Column i is the eigenvector of `values[i]`.
    pub vectors: Mat,
    pub residuals: Vec<f64>,
    pub sweeps: usize,
}

impl Spectrum {
    pub fn lambda_min(&self) -> f64 {
        *self.values.last().expect("empty spectrum")
    }

    pub fn lambda_max(&self) -> f64 {
        self.values[0]
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.col(i)
    }

    /// Number of eigenvalues at or below `rel * λ_max`.
    pub fn count_below(&self, rel: f64) -> usize {
        let thr = rel * self.lambda_max().abs();
        self.values.iter().filter(|v| **v <= thr).count()
    }
}

pub const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver. The input is symmetrized as (A + Aᵀ)/2.
pub fn eigen_sym(a: &Mat) -> Result<Spectrum> {
    if !a.is_square() {
        return Err(Error::Shape(format!("eigen_sym needs a square matrix, got {}x{}", a.rows, a.cols)));
    }
    let n = a.rows;
    if n == 0 {
        return Err(Error::Shape("eigen_sym on an empty matrix".into()));
    }
    if a.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("eigen_sym input has non-finite entries".into()));
    }
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut m = sym.clone();
    let mut v = Mat::identity(n);
    let scale = sym.frobenius();
    let tol = 1e-12 * scale;
    let mut sweeps = 0;
    loop {
        let off = off_diagonal(&m);
        if off <= tol || scale == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_diagonal: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);
    let residuals = (0..n)
        .map(|c| {
            let x = vectors.col(c);
            let ax = sym.matvec(&x);
            ax.iter().zip(&x).map(|(y, xi)| (y - values[c] * xi).powi(2)).sum::<f64>().sqrt()
        })
        .collect();
    Ok(Spectrum { values, vectors, residuals, sweeps })
}

fn off_diagonal(m: &Mat) -> f64 {
    let mut s = 0.0;
    for i in 0..m.rows {
        for j in 0..m.cols {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

fn rotate(m: &mut Mat, v: &mut Mat, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = m[(p, p)];
    let aqq = m[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = m.rows;
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Thin SVD from one-sided (Hestenes) Jacobi: A V = U Σ.
#[derive(Clone, Debug)]
pub struct Svd {
    /// Singular values, descending.
    pub values: Vec<f64>,
    /// Right singular vectors as columns (cols × cols).
    pub v: Mat,
    /// A·v_i, i.e. σ_i u_i, as columns (rows × cols).
    pub av: Mat,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Count of singular values above `rel * σ_max`.
    pub fn rank(&self, rel: f64) -> usize {
        let thr = rel * self.sigma_max();
        self.values.iter().filter(|s| **s > thr).count()
    }
}

pub fn svd_jacobi(a: &Mat) -> Result<Svd> {
    let (rows, cols) = (a.rows, a.cols);
    // column-major working copy
    let mut u: Vec<Vec<f64>> = (0..cols).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();
    let fro2: f64 = a.data.iter().map(|x| x * x).sum();
    let floor = 1e-30 * fro2;
    let mut converged = cols < 2;
    let mut sweeps = 0;
    let mut worst = 0.0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_diagonal: worst });
        }
        sweeps += 1;
        converged = true;
        worst = 0.0;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                let gamma = dot(&u[p], &u[q]);
                if gamma == 0.0 {
                    continue;
                }
                // pairs of numerically-null columns are left alone
                if gamma.abs() <= floor {
                    continue;
                }
                let rel = gamma.abs() / (alpha * beta).sqrt();
                if rel > worst {
                    worst = rel;
                }
                if rel <= 1e-15 {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta == 0.0 { 1.0 } else { zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt()) };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (up, uq) = pair(&mut u, p, q);
                for k in 0..rows {
                    let x = up[k];
                    let y = uq[k];
                    up[k] = c * x - s * y;
                    uq[k] = s * x + c * y;
                }
                let (vp, vq) = pair(&mut v, p, q);
                for k in 0..cols {
                    let x = vp[k];
                    let y = vq[k];
                    vp[k] = c * x - s * y;
                    vq[k] = s * x + c * y;
                }
            }
        }
    }
    let sv: Vec<f64> = u.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    Ok(Svd {
        values: order.iter().map(|&i| sv[i]).collect(),
        v: Mat::from_fn(cols, cols, |r, c| v[order[c]][r]),
        av: Mat::from_fn(rows, cols, |r, c| u[order[c]][r]),
    })
}

fn pair(v: &mut [Vec<f64>], p: usize, q: usize) -> (&mut Vec<f64>, &mut Vec<f64>) {
    debug_assert!(p < q);
    let (a, b) = v.split_at_mut(q);
    (&mut a[p], &mut b[0])
}

/// Rank of A with singular values above `rel * σ_max`.
pub fn effective_rank(a: &Mat, rel: f64) -> Result<usize> {
    if a.data.iter().all(|x| *x == 0.0) {
        return Ok(0);
    }
    Ok(svd_jacobi(&a.transpose())?.rank(rel))
}

/// Orthonormal basis (as columns, rows × r) of the column span of A.
pub fn span_basis(a: &Mat, rel: f64) -> Result<Mat> {
    // right singular vectors of Aᵀ are left singular vectors of A
    let svd = svd_jacobi(&a.transpose())?;
    let r = if svd.sigma_max() == 0.0 { 0 } else { svd.rank(rel) };
    Ok(Mat::from_fn(a.rows, r, |i, j| svd.v[(i, j)]))
}

/// min_i (g_ii − Σ_{j≠i} |g_ij|).
pub fn gershgorin_lower(g: &Mat) -> f64 {
    (0..g.rows)
        .map(|i| {
            let off: f64 = (0..g.cols).filter(|&j| j != i).map(|j| g[(i, j)].abs()).sum();
            g[(i, i)] - off
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn trace_ratio(g: &Mat) -> f64 {
    g.trace() / g.rows as f64
}

pub const KHATRI_RAO_LIMIT: usize = 10_000_000;

/// Column-wise p-fold tensor power, row-major multi-index (first factor slowest).
pub fn khatri_rao_power(x: &Mat, p: usize) -> Result<Mat> {
    let d = x.rows;
    let rows = (0..p).try_fold(1usize, |acc, _| acc.checked_mul(d)).filter(|r| *r <= KHATRI_RAO_LIMIT);
    let Some(rows) = rows else {
        return Err(Error::SizeLimit(format!("{d}^{p} rows exceeds {KHATRI_RAO_LIMIT}")));
    };
    if rows.saturating_mul(x.cols) > 4 * KHATRI_RAO_LIMIT {
        return Err(Error::SizeLimit(format!("{rows} x {} Khatri-Rao power is too large", x.cols)));
    }
    let mut out = Mat::zeros(rows, x.cols);
    for j in 0..x.cols {
        let col = x.col(j);
        let mut cur = vec![1.0];
        for _ in 0..p {
            let mut next = Vec::with_capacity(cur.len() * d);
            for a in &cur {
                next.extend(col.iter().map(|b| a * b));
            }
            cur = next;
        }
        for (i, v) in cur.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

/// Entrywise r-th power.
pub fn hadamard_power(k: &Mat, r: i32) -> Mat {
    Mat { rows: k.rows, cols: k.cols, data: k.data.iter().map(|v| v.powi(r)).collect() }
}

/// Returns ((1/√n)·min_i dist(a_i, span{a_j : j≠i}), σ_min(A)).
pub fn min_sv_column_distance(a: &Mat) -> Result<(f64, f64)> {
    let n = a.cols;
    if n == 0 {
        return Err(Error::Shape("matrix has no columns".into()));
    }
    let cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    let scale = cols.iter().map(|c| norm(c)).fold(0.0, f64::max);
    let mut min_dist = f64::INFINITY;
    for i in 0..n {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for (j, c) in cols.iter().enumerate() {
            if j == i {
                continue;
            }
            let mut r = c.clone();
            for _ in 0..2 {
                for q in &basis {
                    let h = dot(q, &r);
                    r.iter_mut().zip(q).for_each(|(x, y)| *x -= h * y);
                }
            }
            let nr = norm(&r);
            if nr > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                basis.push(r.into_iter().map(|x| x / nr).collect());
            }
        }
        let mut r = cols[i].clone();
        for _ in 0..2 {
            for q in &basis {
                let h = dot(q, &r);
                r.iter_mut().zip(q).for_each(|(x, y)| *x -= h * y);
            }
        }
        min_dist = min_dist.min(norm(&r));
    }
    // A has fewer rows than columns => σ_min of the n-column matrix is 0
    let sigma_min = if a.rows < n { 0.0 } else { svd_jacobi(a)?.sigma_min() };
    Ok((min_dist / (n as f64).sqrt(), sigma_min))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    #[test]
    fn diag_spectrum() {
        let s = eigen_sym(&Mat::diag(&[1.0, 3.0])).unwrap();
        assert_eq!(s.values, vec![3.0, 1.0]);
        assert_eq!(s.vector(0)[1].abs(), 1.0);
        let id = eigen_sym(&Mat::identity(5)).unwrap();
        assert!(id.values.iter().all(|v| *v == 1.0));
        assert!(id.residuals.iter().all(|r| *r == 0.0));
    }

    #[test]
    fn reconstruct_random_psd() {
        let mut r = lcg(3);
        let b = Mat::from_fn(10, 10, |_, _| r());
        let a = b.gram();
        let s = eigen_sym(&a).unwrap();
        let rec = Mat::from_fn(10, 10, |i, j| (0..10).map(|k| s.values[k] * s.vectors[(i, k)] * s.vectors[(j, k)]).sum());
        assert!(rec.max_abs_diff(&a) < 1e-10);
        let vtv = s.vectors.gram();
        assert!(vtv.max_abs_diff(&Mat::identity(10)) < 1e-12);
    }

    #[test]
    fn svd_matches_eigen() {
        let mut r = lcg(9);
        let a = Mat::from_fn(12, 5, |_, _| r());
        let svd = svd_jacobi(&a).unwrap();
        let eig = eigen_sym(&a.gram()).unwrap();
        for (s, l) in svd.values.iter().zip(&eig.values) {
            assert!((s * s - l).abs() < 1e-12 * eig.lambda_max());
        }
    }

    #[test]
    fn svd_wide_has_null_vectors() {
        let mut r = lcg(1);
        let a = Mat::from_fn(3, 6, |_, _| r());
        let svd = svd_jacobi(&a).unwrap();
        assert_eq!(svd.rank(1e-10), 3);
        for j in 3..6 {
            let v = svd.v.col(j);
            assert!(norm(&a.matvec(&v)) < 1e-12);
        }
    }

    #[test]
    fn span_of_planar_data() {
        let x = Mat::from_fn(4, 6, |i, j| match i {
            0 => (j as f64).cos(),
            1 => (j as f64).sin(),
            _ => 0.0,
        });
        assert_eq!(effective_rank(&x, 1e-10).unwrap(), 2);
        assert_eq!(span_basis(&x, 1e-10).unwrap().cols, 2);
    }

    #[test]
    fn gershgorin_identity() {
        assert_eq!(gershgorin_lower(&Mat::identity(4)), 1.0);
        let n = 6;
        let g = Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 1.0 / (2.0 * n as f64) });
        assert!(gershgorin_lower(&g) >= 0.5);
    }

    #[test]
    fn column_distance_orthonormal() {
        let (lb, s) = min_sv_column_distance(&Mat::identity(4)).unwrap();
        assert!((lb - 0.5).abs() < 1e-15);
        assert!((s - 1.0).abs() < 1e-15);
        let dup = Mat::from_fn(5, 3, |i, j| if j == 2 { (i as f64).sin() } else { ((i * (j + 1)) as f64).sin() });
        let dup = Mat::from_fn(5, 3, |i, j| if j == 1 { dup[(i, 0)] } else { dup[(i, j)] });
        let (lb, s) = min_sv_column_distance(&dup).unwrap();
        assert!(lb < 1e-12 && s < 1e-12);
    }

    #[test]
    fn khatri_rao_size_guard() {
        let x = Mat::zeros(100, 2);
        assert!(matches!(khatri_rao_power(&x, 4), Err(Error::SizeLimit(_))));
    }
}
