//! Self-contained numerical kernels.

mod eigen;
mod ode;
mod optimize;
mod oscillator;

use std::ops::{Div, Sub};

use ndarray::{Array1, Array2};

use crate::{Error, Result, C64};

pub use eigen::{eig_hermitian, EigenSystem};
pub use ode::{integrate_ode, OdeStats};
pub use optimize::{maximize_scalar, try_maximize_scalar, Maximum, DEFAULT_GRID_POINTS};
pub use oscillator::{oscillator_wavefunction, oscillator_wavefunctions};

/// Dense complex matrix.
pub type ComplexMatrix = Array2<C64>;

/// Dense complex vector.
pub type ComplexVector = Array1<C64>;

/// Absolute tolerance on `M - M†` for unit-scale matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest entrywise `|M[i,j] - conj(M[j,i])|`.
pub fn hermitian_asymmetry(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Checks squareness, finiteness and Hermiticity within
/// `HERMITIAN_TOL * max(1, max|M|)`.
pub fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let tolerance = HERMITIAN_TOL * max_abs(m).max(1.0);
    let asymmetry = hermitian_asymmetry(m);
    if asymmetry > tolerance {
        return Err(Error::NotHermitian { asymmetry, tolerance });
    }
    Ok(())
}

/// `(M + M†) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    let adj = m.t().mapv(|z| z.conj());
    (m + &adj).mapv(|z| z * 0.5)
}

/// Conjugate transpose.
pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.t().mapv(|z| z.conj())
}

/// Symmetric difference quotient `(f(x0 + h) - f(x0 - h)) / (2h)`.
///
/// Works for any value type with subtraction and division by `f64`, which
/// covers both scalars and owned ndarray arrays.
pub fn central_difference<T, F>(mut f: F, x0: f64, h: f64) -> T
where
    F: FnMut(f64) -> T,
    T: Sub<Output = T> + Div<f64, Output = T>,
{
    debug_assert!(h > 0.0);
    let plus = f(x0 + h);
    let minus = f(x0 - h);
    (plus - minus) / (2.0 * h)
}

/// [`central_difference`] for fallible evaluations.
pub fn try_central_difference<T, E, F>(mut f: F, x0: f64, h: f64) -> std::result::Result<T, E>
where
    F: FnMut(f64) -> std::result::Result<T, E>,
    T: Sub<Output = T> + Div<f64, Output = T>,
{
    let plus = f(x0 + h)?;
    let minus = f(x0 - h)?;
    Ok((plus - minus) / (2.0 * h))
}

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            dx * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// `n` evenly spaced points covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}
