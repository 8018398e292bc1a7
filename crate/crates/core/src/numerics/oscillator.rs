//! Harmonic-oscillator position eigenfunctions for the quadrature
//! `x = (a + a†)/√2`, so that `|ψ_0(x)|² = e^{-x²}/√π`.
//!
//! Values come from the normalized three-term recurrence
//! `ψ_{n+1} = x √(2/(n+1)) ψ_n − √(n/(n+1)) ψ_{n−1}`, run on a rescaled
//! sequence with a separately tracked logarithmic scale so that neither the
//! Gaussian factor nor large `n` overflows or underflows prematurely.

const RESCALE_ABOVE: f64 = 1e150;

/// `ψ_n(x)`.
pub fn oscillator_wavefunction(n: usize, x: f64) -> f64 {
    *oscillator_wavefunctions(n, x).last().expect("table has n + 1 entries")
}

/// `[ψ_0(x), …, ψ_nmax(x)]`.
pub fn oscillator_wavefunctions(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    let mut log_scale = -0.5 * x * x - 0.25 * std::f64::consts::PI.ln();
    let mut prev = 0.0_f64;
    let mut cur = 1.0_f64;
    out.push(log_scale.exp());
    for n in 0..nmax {
        let nf = n as f64;
        let next = x * (2.0 / (nf + 1.0)).sqrt() * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            prev /= RESCALE_ABOVE;
            cur /= RESCALE_ABOVE;
            log_scale += RESCALE_ABOVE.ln();
        }
        out.push(cur * log_scale.exp());
    }
    out
}
