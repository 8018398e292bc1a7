//! Adaptive Dormand-Prince 5(4) integration of matrix-valued ODEs.

use ndarray::Zip;

use super::ComplexMatrix;
use crate::{Error, Result};

const MIN_STEP: f64 = 1e-14;
const MAX_STEPS: usize = 10_000_000;
const SAFETY: f64 = 0.9;

// Dormand-Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th minus embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Step bookkeeping from the last integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

fn lincomb(y: &ComplexMatrix, h: f64, terms: &[(f64, &ComplexMatrix)]) -> ComplexMatrix {
    let mut out = y.clone();
    for &(c, k) in terms {
        out.scaled_add((h * c).into(), k);
    }
    out
}

/// Integrates `dy/dtau = rhs(tau, y)` from 0 to `tau_end`.
///
/// Local error per step is held below `tol` in the mixed norm
/// `max_i |err_i| / (tol + tol * max(|y_i|, |y_new_i|))`. Fails with
/// [`Error::StepUnderflow`] if the step drops below 1e-14.
pub fn integrate_ode<F>(rhs: F, y0: &ComplexMatrix, tau_end: f64, tol: f64) -> Result<(ComplexMatrix, OdeStats)>
where
    F: Fn(f64, &ComplexMatrix) -> ComplexMatrix,
{
    if !(tau_end >= 0.0) || !tau_end.is_finite() {
        return Err(Error::InvalidArgument(format!("tau_end must be finite and >= 0, got {tau_end}")));
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::InvalidArgument(format!("tol must lie in (0, 1e-3], got {tol}")));
    }
    let mut stats = OdeStats::default();
    let mut y = y0.clone();
    if tau_end == 0.0 {
        return Ok((y, stats));
    }

    let mut t = 0.0;
    let mut k1 = rhs(t, &y);
    let mut h = initial_step(&y, &k1, tau_end, tol);

    while t < tau_end {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(Error::StepUnderflow { tau: t, step: h });
        }
        let last = t + h >= tau_end;
        if last {
            h = tau_end - t;
        }

        let k2 = rhs(t + C2 * h, &lincomb(&y, h, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h, &lincomb(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * h, &lincomb(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(t + C5 * h, &lincomb(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = rhs(t + h, &lincomb(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = lincomb(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = rhs(t + h, &y_new);

        let zero = ComplexMatrix::zeros(y.raw_dim());
        let local = lincomb(&zero, h, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
        let mut err = 0.0_f64;
        Zip::from(&local).and(&y).and(&y_new).for_each(|e, a, b| {
            let scale = tol + tol * a.norm().max(b.norm());
            let ratio = e.norm() / scale;
            err = if ratio.is_nan() { f64::INFINITY } else { err.max(ratio) };
        });

        if err <= 1.0 {
            t = if last { tau_end } else { t + h };
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
            let grow = if err == 0.0 { 5.0 } else { (SAFETY * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            stats.rejected += 1;
            h *= (SAFETY * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < MIN_STEP {
                return Err(Error::StepUnderflow { tau: t, step: h });
            }
        }
    }
    Ok((y, stats))
}

fn initial_step(y: &ComplexMatrix, f: &ComplexMatrix, tau_end: f64, tol: f64) -> f64 {
    let ynorm = y.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    let fnorm = f.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    let h = if fnorm > 0.0 { 0.01 * (ynorm.max(tol) / fnorm) } else { tau_end };
    h.min(tau_end).max(MIN_STEP * 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use ndarray::{array, Array2};

    #[test]
    fn zero_rhs_keeps_initial_value() {
        let y0 = array![[C64::new(1.0, 2.0), C64::new(-0.5, 0.0)], [C64::new(0.0, 3.0), C64::new(4.0, -4.0)]];
        let (y, _) = integrate_ode(|_, y| Array2::zeros(y.raw_dim()), &y0, 3.7, 1e-8).unwrap();
        assert_eq!(y, y0);
    }

    #[test]
    fn exponential_decay() {
        let y0 = array![[C64::new(1.0, 0.0)]];
        for tol in [1e-6, 1e-10] {
            let (y, stats) = integrate_ode(|_, y| y.mapv(|z| -z), &y0, 1.0, tol).unwrap();
            assert!((y[[0, 0]].re - (-1.0f64).exp()).abs() < tol, "tol={tol}");
            assert!(stats.accepted > 0);
        }
    }

    #[test]
    fn rotation_with_time_dependent_rhs() {
        // y' = i t y  ->  y = exp(i t^2 / 2)
        let y0 = array![[C64::new(1.0, 0.0)]];
        let (y, _) = integrate_ode(|t, y| y.mapv(|z| z * C64::new(0.0, t)), &y0, 2.0, 1e-10).unwrap();
        let exact = C64::new(0.0, 2.0).exp();
        assert!((y[[0, 0]] - exact).norm() < 1e-9);
    }

    #[test]
    fn zero_span_returns_input() {
        let y0 = array![[C64::new(0.25, 0.0)]];
        let (y, stats) = integrate_ode(|_, y| y.clone(), &y0, 0.0, 1e-8).unwrap();
        assert_eq!(y, y0);
        assert_eq!(stats, OdeStats::default());
    }

    #[test]
    fn rejects_bad_arguments() {
        let y0 = array![[C64::new(1.0, 0.0)]];
        assert!(integrate_ode(|_, y| y.clone(), &y0, -1.0, 1e-8).is_err());
        assert!(integrate_ode(|_, y| y.clone(), &y0, 1.0, 1e-2).is_err());
    }

    #[test]
    fn unrecoverable_rhs_underflows_step() {
        // the right-hand side becomes undefined past tau = 0.5
        let y0 = array![[C64::new(1.0, 0.0)]];
        let rhs = |t: f64, y: &ComplexMatrix| {
            if t > 0.5 { y.mapv(|_| C64::new(f64::NAN, 0.0)) } else { y.mapv(|z| -z) }
        };
        match integrate_ode(rhs, &y0, 2.0, 1e-8) {
            Err(Error::StepUnderflow { tau, step }) => {
                assert!(tau <= 0.5 && tau > 0.5 - 1e-12, "tau={tau}");
                assert!(step < 1e-14);
            }
            other => panic!("expected underflow, got {other:?}"),
        }
    }
}
