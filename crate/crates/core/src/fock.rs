//! Quadrature and coherent-state overlaps, measurement densities and the
//! Wigner function in the Fock basis (ħ = 1, vacuum quadrature variance 1/2).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::state::DensityMatrix;

/// Normalized oscillator eigenfunctions `ψ_0(x)..ψ_{n_max}(x)`.
pub fn hermite_functions(x: f64, n_max: usize) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("hermite_functions: non-finite x = {x}")));
    }
    let mut out = vec![0.0; n_max + 1];
    hermite_into(x, &mut out);
    Ok(out)
}

/// Fills `out[n] = ψ_n(x)` using the normalized three-term recurrence, which
/// never forms `H_n(x)` or `e^{-x²/2}` products that overflow.
pub fn hermite_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if out.len() > 1 {
        out[1] = std::f64::consts::SQRT_2 * x * out[0];
    }
    for n in 2..out.len() {
        let nf = n as f64;
        out[n] = (2.0 / nf).sqrt() * x * out[n - 1] - ((nf - 1.0) / nf).sqrt() * out[n - 2];
    }
}

/// `⟨n|x_θ⟩ = e^{inθ} ψ_n(x)`.
pub fn quadrature_overlap(n: usize, x: f64, theta: f64) -> C64 {
    let mut psi = vec![0.0; n + 1];
    hermite_into(x, &mut psi);
    C64::from_polar(psi[n], n as f64 * theta)
}

/// The vector `(⟨n|x_θ⟩)_{n<d}`.
pub fn quadrature_vector(x: f64, theta: f64, d: usize) -> Vec<C64> {
    let mut psi = vec![0.0; d];
    hermite_into(x, &mut psi);
    psi.iter()
        .enumerate()
        .map(|(n, &v)| C64::from_polar(v, n as f64 * theta))
        .collect()
}

/// `⟨n|α⟩ = e^{-|α|²/2} αⁿ / √(n!)`.
pub fn coherent_overlap(n: usize, alpha: C64) -> C64 {
    coherent_vector(alpha, n + 1)[n]
}

/// The vector `(⟨n|α⟩)_{n<d}`.
pub fn coherent_vector(alpha: C64, d: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(d);
    let mut a = C64::from((-0.5 * alpha.norm_sqr()).exp());
    for n in 0..d {
        if n > 0 {
            a = a * alpha / (n as f64).sqrt();
        }
        out.push(a);
    }
    out
}

/// Homodyne density `f_θ(x) = ⟨x_θ|ρ|x_θ⟩`, clamped at zero.
pub fn homodyne_pdf(rho: &DensityMatrix, theta: f64, x: f64) -> f64 {
    rho.expectation(&quadrature_vector(x, theta, rho.dim())).max(0.0)
}

/// Heterodyne density `g(x, p) = ⟨α|ρ|α⟩/π` at `α = x + ip` (the Husimi Q
/// function).
pub fn heterodyne_pdf(rho: &DensityMatrix, x: f64, p: f64) -> f64 {
    (rho.expectation(&coherent_vector(C64::new(x, p), rho.dim())) / PI).max(0.0)
}

/// Husimi Q function at `α`.
pub fn husimi_q(rho: &DensityMatrix, alpha: C64) -> f64 {
    heterodyne_pdf(rho, alpha.re, alpha.im)
}

/// Wigner function `W(x, p)`, normalized to unit integral over `dx dp`.
///
/// Uses the Fock-basis kernel
/// `W_{|m⟩⟨n|} = (-1)^m/π √(m!/n!) (√2(x+ip))^{n-m} e^{-r²} L_m^{(n-m)}(2r²)`
/// for `m <= n`, with the transposed terms supplied by Hermiticity.
pub fn wigner(rho: &DensityMatrix, x: f64, p: f64) -> f64 {
    let d = rho.dim();
    let m = rho.matrix();
    let r2 = x * x + p * p;
    let z = 2.0 * r2;
    let phi = p.atan2(x);
    let mut total = 0.0;
    let mut lag = vec![0.0; d];
    for k in 0..d {
        laguerre_into(k as f64, z, &mut lag[..d - k]);
        // phase of (x + ip)^k
        let phase = C64::from_polar(1.0, k as f64 * phi);
        // ln √(m!/(m+k)!) accumulated as m grows
        let mut ln_ratio = -0.5 * ln_factorial(k);
        let ln_radial = if k == 0 {
            0.0
        } else if r2 == 0.0 {
            f64::NEG_INFINITY
        } else {
            k as f64 * (2.0 * r2).sqrt().ln()
        };
        for mi in 0..d - k {
            if mi > 0 {
                ln_ratio += 0.5 * ((mi as f64).ln() - ((mi + k) as f64).ln());
            }
            let mag = (ln_ratio + ln_radial - r2).exp() * lag[mi];
            let sign = if mi % 2 == 0 { 1.0 } else { -1.0 };
            let kernel = phase * (sign * mag);
            let rho_mn = m[(mi, mi + k)];
            if k == 0 {
                total += rho_mn.re * kernel.re;
            } else {
                total += 2.0 * (rho_mn * kernel).re;
            }
        }
    }
    total / PI
}

/// `out[m] = L_m^{(alpha)}(z)` for `m = 0..out.len()`.
fn laguerre_into(alpha: f64, z: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = 1.0 + alpha - z;
    }
    for j in 1..out.len() - 1 {
        let jf = j as f64;
        out[j + 1] = ((2.0 * jf + 1.0 + alpha - z) * out[j] - (jf + alpha) * out[j - 1]) / (jf + 1.0);
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}
