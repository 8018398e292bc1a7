//! Bounded scalar maximization: dense grid scan, then golden-section
//! refinement around the best grid point.

use std::convert::Infallible;

/// Grid size used by the scan stage.
pub const DEFAULT_GRID_POINTS: usize = 201;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Maximizes `f` on `[lo, hi]`.
///
/// The scan stage evaluates [`DEFAULT_GRID_POINTS`] evenly spaced points; the
/// best one and its neighbours bracket a golden-section search that runs
/// until the bracket is narrower than `tol`. For multimodal `f` the result is
/// the local maximum around the best grid point.
pub fn maximize_scalar<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    match try_maximize_scalar(|x| Ok::<_, Infallible>(f(x)), lo, hi, tol, DEFAULT_GRID_POINTS) {
        Ok(m) => m,
        Err(never) => match never {},
    }
}

/// [`maximize_scalar`] for fallible objectives, with an explicit grid size.
pub fn try_maximize_scalar<F, E>(mut f: F, lo: f64, hi: f64, tol: f64, grid_points: usize) -> Result<Maximum, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    assert!(lo < hi, "maximize_scalar needs lo < hi, got [{lo}, {hi}]");
    let n = grid_points.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best = Maximum { x: lo, value: f64::NEG_INFINITY };
    let mut best_idx = 0;
    for i in 0..n {
        let x = if i == n - 1 { hi } else { lo + step * i as f64 };
        let v = f(x)?;
        if v > best.value {
            best = Maximum { x, value: v };
            best_idx = i;
        }
    }

    let mut a = lo + step * best_idx.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_idx + 1) as f64).min(hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    if value > best.value {
        best = Maximum { x, value };
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let m = maximize_scalar(|x| -(x - 2.0) * (x - 2.0), 0.0, 5.0, 1e-8);
        assert!((m.x - 2.0).abs() < 1e-7);
        assert!(m.value.abs() < 1e-14);
    }

    #[test]
    fn optimal_time_of_linear_coherent_qfi() {
        // tau^2 e^{-tau} peaks at tau = 2 with value 4/e^2
        let m = maximize_scalar(|t| t * t * (-t).exp(), 0.0, 10.0, 1e-8);
        assert!((m.x - 2.0).abs() < 1e-6);
        assert!((m.value - 4.0 * (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn squeezed_baseline_optimum_matches_dense_grid() {
        // Linear squeezed-vacuum QFI at nbar = 1, gamma = 1; dense grid oracle.
        let f = |t: f64| {
            let e = t.exp();
            (e * e - 2.0 * e + 2.0) * t * t / (t.exp_m1() * (2.0 * t.exp_m1() + e * e))
        };
        let m = maximize_scalar(f, 1e-9, 10.0, 1e-8);
        let dense = (1..=100_000).map(|i| i as f64 * 1e-4).fold((0.0, f64::NEG_INFINITY), |acc, t| {
            let v = f(t);
            if v > acc.1 { (t, v) } else { acc }
        });
        // dense grid: argmax 2.4814, max 0.412553675
        assert!((dense.0 - 2.4814).abs() < 1e-4);
        assert!((m.x - dense.0).abs() < 2e-4);
        assert!((m.value - 0.412_553_675_092_579_5).abs() < 1e-9);
    }

    #[test]
    fn multimodal_returns_best_grid_neighbourhood() {
        let f = |x: f64| (-(x - 1.0).powi(2) * 50.0).exp() + 2.0 * (-(x - 4.0).powi(2) * 50.0).exp();
        let m = maximize_scalar(f, 0.0, 5.0, 1e-9);
        assert!((m.x - 4.0).abs() < 1e-6);
    }

    #[test]
    fn errors_propagate() {
        let r: Result<Maximum, &str> = try_maximize_scalar(|x| if x > 0.5 { Err("boom") } else { Ok(x) }, 0.0, 1.0, 1e-6, 11);
        assert_eq!(r, Err("boom"));
    }
}
