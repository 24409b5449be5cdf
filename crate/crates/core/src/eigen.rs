//! Dense symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by implicit QL with
//! Wilkinson shifts. The full decomposition accumulates the QL rotations; the
//! partial path used by spectral clustering only needs a few eigenvectors, so
//! it takes eigenvalues from QL and recovers the selected vectors by inverse
//! iteration on the tridiagonal matrix before back-transforming them.

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix};

const MAX_QL_ITER: usize = 64;
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenpairs of a symmetric matrix. Column `j` of `vectors` belongs to
/// `values[j]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymmetricEigen {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j)
    }
}

/// Which end of the spectrum a partial decomposition keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Largest by algebraic value.
    #[default]
    Largest,
    /// Largest by absolute value.
    LargestModulus,
}

struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    /// Householder reflectors `(v, beta)`; reflector `k` acts on indices `k+1..`.
    reflectors: Vec<(Vec<f64>, f64)>,
}

impl Tridiagonal {
    fn norm(&self) -> f64 {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                left + self.diag[i].abs() + right
            })
            .fold(0.0, f64::max)
    }

    /// `x <- Q x` where `A = Q T Qᵀ`.
    fn back_transform(&self, x: &mut [f64]) {
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let tail = &mut x[k + 1..];
            let s = beta * dot(v, tail);
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= s * vi;
            }
        }
    }
}

fn check_symmetric(m: &DenseMatrix) -> Result<()> {
    if m.rows() != m.cols() {
        return Err(Error::Shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("matrix passed to the eigensolver".into()));
    }
    let asym = m.max_asymmetry();
    if asym > SYMMETRY_TOL * m.max_abs().max(1.0) {
        return Err(Error::NotSymmetric {
            max_asymmetry: asym,
        });
    }
    Ok(())
}

fn tridiagonalize(m: &DenseMatrix) -> Tridiagonal {
    let n = m.rows();
    let mut a = m.as_slice().to_vec();
    // exact symmetry for the two-sided updates
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = s;
            a[j * n + i] = s;
        }
    }
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        diag[k] = a[k * n + k];
        let mut v: Vec<f64> = a[k * n + k + 1..k * n + n].to_vec();
        let xnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            off[k] = 0.0;
            reflectors.push((v, 0.0));
            continue;
        }
        let alpha = if v[0] > 0.0 { -xnorm } else { xnorm };
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            off[k] = alpha;
            reflectors.push((v, 0.0));
            continue;
        }
        let beta = 2.0 / vnorm2;
        off[k] = alpha;

        let start = k + 1;
        let m_len = n - start;
        let p = &mut p[..m_len];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &a[(start + i) * n + start..(start + i) * n + n];
            *pi = beta * dot(row, &v);
        }
        let kk = 0.5 * beta * dot(p, &v);
        for (pi, vi) in p.iter_mut().zip(&v) {
            *pi -= kk * vi;
        }
        // B <- B - v wᵀ - w vᵀ, with w stored in p
        for i in 0..m_len {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a[(start + i) * n + start..(start + i) * n + n];
            for ((r, &vj), &wj) in row.iter_mut().zip(&v).zip(p.iter()) {
                *r -= vi * wj + wi * vj;
            }
        }
        reflectors.push((v, beta));
    }
    if n >= 2 {
        diag[n - 2] = a[(n - 2) * n + n - 2];
        diag[n - 1] = a[(n - 1) * n + n - 1];
        off[n - 2] = a[(n - 2) * n + n - 1];
    } else if n == 1 {
        diag[0] = a[0];
    }
    Tridiagonal {
        diag,
        off,
        reflectors,
    }
}

/// Implicit QL on a symmetric tridiagonal matrix. When `z` is given, the
/// rotations are accumulated into its rows (row `i` ends up as eigenvector `i`
/// in the tridiagonal basis).
fn tridiagonal_ql(d: &mut [f64], off: &[f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITER {
                return Err(Error::EigenNotConverged);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (head, tail) = z.split_at_mut((i + 1) * n);
                    let zi = &mut head[i * n..];
                    let zi1 = &mut tail[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Solve `(T - sigma I) y = rhs` in place by Gaussian elimination with
/// partial pivoting; zero pivots are nudged to `tiny`.
fn tridiagonal_shifted_solve(d: &[f64], off: &[f64], sigma: f64, tiny: f64, rhs: &mut [f64]) {
    let n = d.len();
    let mut a: Vec<f64> = d.iter().map(|x| x - sigma).collect();
    let mut b: Vec<f64> = off.to_vec();
    b.push(0.0);
    let mut c2 = vec![0.0; n];
    let mut mult = vec![0.0; n];
    let mut swapped = vec![false; n];

    for i in 0..n.saturating_sub(1) {
        let sub = off[i];
        if a[i].abs() >= sub.abs() {
            if a[i] == 0.0 {
                a[i] = tiny;
            }
            let m = sub / a[i];
            a[i + 1] -= m * b[i];
            mult[i] = m;
        } else {
            let m = a[i] / sub;
            let (ai, bi) = (a[i], b[i]);
            let a_next = a[i + 1];
            let b_next = b[i + 1];
            a[i] = sub;
            b[i] = a_next;
            c2[i] = b_next;
            a[i + 1] = bi - m * a_next;
            b[i + 1] = -m * b_next;
            let _ = ai;
            mult[i] = m;
            swapped[i] = true;
        }
    }
    if n > 0 && a[n - 1] == 0.0 {
        a[n - 1] = tiny;
    }
    for i in 0..n.saturating_sub(1) {
        if swapped[i] {
            rhs.swap(i, i + 1);
        }
        rhs[i + 1] -= mult[i] * rhs[i];
    }
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= b[i] * rhs[i + 1];
        }
        if i + 2 < n {
            s -= c2[i] * rhs[i + 2];
        }
        rhs[i] = s / a[i];
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = dot(x, x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

/// Flip `x` so that its first non-negligible component is positive.
pub fn canonical_sign(x: &mut [f64]) {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-10 * max) {
        if *first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(m: &DenseMatrix) -> Result<SymmetricEigen> {
    check_symmetric(m)?;
    let n = m.rows();
    let tri = tridiagonalize(m);
    let mut d = tri.diag.clone();
    let mut z = DenseMatrix::identity(n).into_vec();
    tridiagonal_ql(&mut d, &tri.off, Some(&mut z))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let mut vectors = DenseMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &idx) in order.iter().enumerate() {
        let y = &mut z[idx * n..(idx + 1) * n];
        tri.back_transform(y);
        canonical_sign(y);
        for (row, &v) in y.iter().enumerate() {
            vectors[(row, col)] = v;
        }
        values.push(d[idx]);
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let tri = tridiagonalize(m);
    let mut d = tri.diag.clone();
    tridiagonal_ql(&mut d, &tri.off, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// The `k` leading eigenpairs under `selection`, in selection order
/// (largest first).
pub fn symmetric_top_eigen(m: &DenseMatrix, k: usize, selection: Selection) -> Result<SymmetricEigen> {
    check_symmetric(m)?;
    let n = m.rows();
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs of a {n}x{n} matrix"
        )));
    }
    let tri = tridiagonalize(m);
    let mut d = tri.diag.clone();
    tridiagonal_ql(&mut d, &tri.off, None)?;
    match selection {
        Selection::Largest => d.sort_by(|a, b| b.total_cmp(a)),
        Selection::LargestModulus => d.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a))),
    }
    let chosen: Vec<f64> = d[..k].to_vec();

    let tnorm = tri.norm().max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * tnorm;
    let cluster_tol = 1e-3 * tnorm;
    let resid_tol = 1e-12 * tnorm * (n as f64).sqrt();

    let mut found: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
    for (j, &lambda) in chosen.iter().enumerate() {
        let mut y = start_vector(n, j as u64);
        normalize(&mut y);
        let mut converged = false;
        for it in 0..10 {
            tridiagonal_shifted_solve(&tri.diag, &tri.off, lambda, tiny, &mut y);
            for (mu, prev) in &found {
                if (mu - lambda).abs() <= cluster_tol {
                    let proj = dot(prev, &y);
                    for (yi, pi) in y.iter_mut().zip(prev) {
                        *yi -= proj * pi;
                    }
                }
            }
            if normalize(&mut y) == 0.0 {
                y = start_vector(n, (j + 7 * (it + 1)) as u64);
                normalize(&mut y);
                continue;
            }
            if it >= 1 && tridiagonal_residual(&tri.diag, &tri.off, lambda, &y) <= resid_tol {
                converged = true;
                break;
            }
        }
        if !converged && tridiagonal_residual(&tri.diag, &tri.off, lambda, &y) > 1e-8 * tnorm {
            return Err(Error::EigenNotConverged);
        }
        found.push((lambda, y));
    }

    let mut vectors = DenseMatrix::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    for (col, (lambda, mut y)) in found.into_iter().enumerate() {
        tri.back_transform(&mut y);
        canonical_sign(&mut y);
        for (row, &v) in y.iter().enumerate() {
            vectors[(row, col)] = v;
        }
        values.push(lambda);
    }
    Ok(SymmetricEigen { values, vectors })
}

fn tridiagonal_residual(d: &[f64], off: &[f64], lambda: f64, y: &[f64]) -> f64 {
    let n = d.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let mut r = (d[i] - lambda) * y[i];
        if i > 0 {
            r += off[i - 1] * y[i - 1];
        }
        if i + 1 < n {
            r += off[i] * y[i + 1];
        }
        worst = worst.max(r.abs());
    }
    worst
}

fn start_vector(n: usize, salt: u64) -> Vec<f64> {
    let mut state = 0x2545_F491_4F6C_DD1D_u64 ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            0.5 + (state >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

/// Eigenvalues of an arbitrary square matrix as `(re, im)` pairs, from a
/// general (non-symmetric) solver. Used to cross-check the symmetric path on
/// operators that are only similar to symmetric matrices.
pub fn general_eigenvalues(m: &DenseMatrix) -> Result<Vec<(f64, f64)>> {
    if m.rows() != m.cols() {
        return Err(Error::Shape(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mat = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let values = mat.eigenvalues().map_err(|_| Error::EigenNotConverged)?;
    Ok(values.iter().map(|c| (c.re, c.im)).collect())
}
