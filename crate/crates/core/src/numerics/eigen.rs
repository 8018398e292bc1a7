//! Complex Hermitian eigensolver.
//!
//! Householder reduction to Hermitian tridiagonal form, a diagonal phase
//! transform that makes the off-diagonal real, then implicit-shift QL on the
//! real symmetric tridiagonal matrix. Eigenvectors are accumulated through
//! all three stages.

use ndarray::{Array1, Array2};

use super::{check_hermitian, hermitian_part, ComplexMatrix};
use crate::{Error, Result, C64};

const MAX_QL_ITERATIONS: usize = 60;

/// Spectral decomposition `M = V diag(values) V†`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Eigenvalues in ascending order.
    pub values: Array1<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(values) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let p = self.values[j];
            scaled.column_mut(j).mapv_inplace(|z| z * p);
        }
        scaled.dot(&super::adjoint(&self.vectors))
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Rejects non-square, non-finite or non-Hermitian input (the error carries
/// the largest asymmetry). The input is symmetrized before reduction.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<EigenSystem> {
    check_hermitian(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(EigenSystem { values: Array1::zeros(0), vectors: Array2::zeros((0, 0)) });
    }

    let mut a = hermitian_part(m);
    let mut q: ComplexMatrix = Array2::eye(n);
    householder_tridiagonalize(&mut a, &mut q);

    let mut diag: Vec<f64> = (0..n).map(|i| a[[i, i]].re).collect();
    let mut off = vec![0.0; n];
    let mut phase = vec![C64::new(1.0, 0.0); n];
    for i in 0..n.saturating_sub(1) {
        let e = a[[i + 1, i]];
        let r = e.norm();
        off[i] = r;
        phase[i + 1] = if r > 0.0 { phase[i] * (e / r) } else { phase[i] };
    }

    let mut z: Array2<f64> = Array2::eye(n);
    tridiagonal_ql(&mut diag, &mut off, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));

    // V = Q · diag(phase) · Z
    for (j, p) in phase.iter().enumerate() {
        q.column_mut(j).mapv_inplace(|v| v * p);
    }
    let mut z_sorted: ComplexMatrix = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            z_sorted[[i, dst]] = C64::new(z[[i, src]], 0.0);
        }
    }
    let vectors = q.dot(&z_sorted);
    let values = order.iter().map(|&i| diag[i]).collect();
    Ok(EigenSystem { values, vectors })
}

/// Reduces `a` in place to Hermitian tridiagonal form `T` with
/// `A_original = Q T Q†`; `q` accumulates the reflections.
fn householder_tridiagonalize(a: &mut ComplexMatrix, q: &mut ComplexMatrix) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut p = vec![C64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let tail_norm_sq: f64 = (k + 2..n).map(|i| a[[i, k]].norm_sqr()).sum();
        if tail_norm_sq == 0.0 {
            continue;
        }
        let x0 = a[[k + 1, k]];
        let sigma = (x0.norm_sqr() + tail_norm_sq).sqrt();
        let unit = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };

        // v = x + unit·sigma·e1, so that (I - 2ww†)x = -unit·sigma·e1
        w.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        w[k + 1] = x0 + unit * sigma;
        for i in k + 2..n {
            w[i] = a[[i, k]];
        }
        let vnorm = (2.0 * sigma * (sigma + x0.norm())).sqrt();
        for z in w[k + 1..].iter_mut() {
            *z /= vnorm;
        }

        // A <- A - 2 w q† - 2 q w†, q = A w - (w† A w) w
        for i in 0..n {
            p[i] = (k + 1..n).map(|j| a[[i, j]] * w[j]).sum();
        }
        let kappa: f64 = (k + 1..n).map(|j| (w[j].conj() * p[j]).re).sum();
        for i in 0..n {
            p[i] -= w[i] * kappa;
        }
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] -= (w[i] * p[j].conj() + p[i] * w[j].conj()) * 2.0;
            }
        }

        // Q <- Q (I - 2 w w†)
        for i in 0..n {
            let qw: C64 = (k + 1..n).map(|j| q[[i, j]] * w[j]).sum();
            for j in k + 1..n {
                q[[i, j]] -= qw * w[j].conj() * 2.0;
            }
        }
    }
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix.
///
/// `off[i]` couples rows `i` and `i + 1`; `off[n-1]` is ignored. On return
/// `diag` holds the (unsorted) eigenvalues and the columns of `z` the
/// corresponding eigenvectors of the input `z`-basis.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], z: &mut Array2<f64>) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    // Off-diagonals below eps² of the matrix scale are dropped even where the
    // neighbouring diagonal entries are tiny; otherwise rank-deficient input
    // (many eigenvalues near zero) never meets the relative test.
    let scale = diag.iter().zip(off.iter()).fold(0.0_f64, |acc, (d, e)| acc.max(d.abs() + e.abs()));
    let floor = f64::EPSILON * f64::EPSILON * scale;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= (f64::EPSILON * dd).max(floor) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence { index: l });
            }

            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zf = z[[k, i + 1]];
                    z[[k, i + 1]] = s * z[[k, i]] + c * zf;
                    z[[k, i]] = c * z[[k, i]] - s * zf;
                }
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}
