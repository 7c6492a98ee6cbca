//! Independent reference computations shared by the integration tests and
//! the acceptance runner.
#![allow(dead_code)]

use cvtomo::fock::{coherent_vector, homodyne_pdf, quadrature_vector, wigner};
use cvtomo::grid::{GridSpec, Modality};
use cvtomo::state::DensityMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::f64::consts::PI;

/// Generalized Gell-Mann matrices built from their textbook definition:
/// symmetric `|l⟩⟨m| + |m⟩⟨l|`, antisymmetric `-i|l⟩⟨m| + i|m⟩⟨l|` over
/// pairs `l < m` in lexicographic order, then the diagonal family.
pub fn gell_mann(d: usize) -> Vec<DMatrix<C64>> {
    let zero = C64::new(0.0, 0.0);
    let mut out = Vec::new();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|l| (l + 1..d).map(move |m| (l, m))).collect();
    for &(l, m) in &pairs {
        let mut a = DMatrix::from_element(d, d, zero);
        a[(l, m)] = C64::new(1.0, 0.0);
        a[(m, l)] = C64::new(1.0, 0.0);
        out.push(a);
    }
    for &(l, m) in &pairs {
        let mut a = DMatrix::from_element(d, d, zero);
        a[(l, m)] = C64::new(0.0, -1.0);
        a[(m, l)] = C64::new(0.0, 1.0);
        out.push(a);
    }
    for l in 1..d {
        let c = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut a = DMatrix::from_element(d, d, zero);
        for k in 0..l {
            a[(k, k)] = C64::from(c);
        }
        a[(l, l)] = C64::from(-c * l as f64);
        out.push(a);
    }
    out
}

pub fn trace_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let d = a.nrows();
    let mut s = C64::new(0.0, 0.0);
    for m in 0..d {
        for n in 0..d {
            s += a[(m, n)] * b[(n, m)];
        }
    }
    s
}

/// `t_k = Tr(ρΩ_k)/2` against the reference matrices.
pub fn bloch(rho: &DensityMatrix, omegas: &[DMatrix<C64>]) -> Vec<f64> {
    omegas.iter().map(|o| trace_product(rho.matrix(), o).re / 2.0).collect()
}

/// `Σ_k t_k Ω_k`, so that `ρ = I/d + Σ_k t_k Ω_k` when `t = bloch(ρ)`.
pub fn traceless(t: &[f64], omegas: &[DMatrix<C64>]) -> DMatrix<C64> {
    let d = omegas[0].nrows();
    let mut m = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    for (tk, o) in t.iter().zip(omegas) {
        m += o * C64::from(*tk);
    }
    m
}

fn quadratic_form(m: &DMatrix<C64>, v: &[C64]) -> f64 {
    let d = v.len();
    let mut s = C64::new(0.0, 0.0);
    for a in 0..d {
        for b in 0..d {
            s += v[a].conj() * m[(a, b)] * v[b];
        }
    }
    s.re
}

/// Every bin as (setting weight, measure-scaled vector) for direct summation.
pub fn bins(modality: Modality, grid: &GridSpec, d: usize) -> Vec<(f64, f64, Vec<C64>)> {
    let mut out = Vec::new();
    match modality {
        Modality::Homodyne => {
            let w = 1.0 / grid.n_phases() as f64;
            for &th in &grid.phases {
                for i in 0..grid.n_bins {
                    out.push((w, grid.dx, quadrature_vector(grid.x(i), th, d)));
                }
            }
        }
        Modality::Heterodyne => {
            for i in 0..grid.n_bins {
                for j in 0..grid.n_bins {
                    let a = C64::new(grid.x(i), grid.p(j));
                    out.push((1.0, grid.dx * grid.dp / PI, coherent_vector(a, d)));
                }
            }
        }
    }
    out
}

/// Fisher information per copy from a central finite-difference Hessian of
/// the expected log-likelihood `Σ_j p_j(t₀) ln p_j(t)`, summed directly over
/// all bins. Bin probabilities are linear in `t`, so the perturbed value is
/// formed as `p₀ + Δp` with `Δp` evaluated on the traceless perturbation.
pub fn fd_information(rho: &DensityMatrix, modality: Modality, grid: &GridSpec, h: f64) -> DMatrix<f64> {
    let d = rho.dim();
    let omegas = gell_mann(d);
    let npar = omegas.len();
    let bins = bins(modality, grid, d);
    let p0: Vec<f64> = bins.iter().map(|(_, w, v)| w * quadratic_form(rho.matrix(), v)).collect();
    // per-direction bin responses ∂p_j/∂t_k = Tr(Ω_k Π_j)
    let resp: Vec<Vec<f64>> = omegas
        .iter()
        .map(|o| bins.iter().map(|(_, w, v)| w * quadratic_form(o, v)).collect())
        .collect();
    let ell = |da: (usize, f64), db: (usize, f64)| -> f64 {
        bins.iter()
            .enumerate()
            .map(|(j, (s, _, _))| {
                let dp = da.1 * resp[da.0][j] + db.1 * resp[db.0][j];
                s * p0[j] * (dp / p0[j]).ln_1p()
            })
            .sum()
    };
    let mut info = DMatrix::zeros(npar, npar);
    for a in 0..npar {
        for b in a..npar {
            let pp = ell((a, h), (b, h));
            let pm = ell((a, h), (b, -h));
            let mp = ell((a, -h), (b, h));
            let mm = ell((a, -h), (b, -h));
            let v = -(pp - pm - mp + mm) / (4.0 * h * h);
            info[(a, b)] = v;
            info[(b, a)] = v;
        }
    }
    info
}

/// Largest `|a-b| / (rel·max(|a|,|b|) + floor)` over all entries; at most 1
/// means the matrices agree. The absolute floor covers entries that vanish by
/// symmetry, where only roundoff remains.
pub fn worst_ratio(a: &DMatrix<f64>, b: &DMatrix<f64>, rel: f64, floor: f64) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| (x - y).abs() / (rel * x.abs().max(y.abs()) + floor))
        .fold(0.0, f64::max)
}

/// Largest deviation between the homodyne density and the Wigner function
/// integrated along the conjugate quadrature (trapezoid rule, step `dp`,
/// over `[-span, span]`).
pub fn marginal_deviation(rho: &DensityMatrix, phases: &[f64], xs: &[f64], dp: f64, span: f64) -> f64 {
    let n = (2.0 * span / dp).round() as usize;
    let mut worst: f64 = 0.0;
    for &th in phases {
        let (c, s) = (th.cos(), th.sin());
        for &x in xs {
            let mut acc = 0.0;
            for k in 0..=n {
                let q = -span + k as f64 * dp;
                let wt = if k == 0 || k == n { 0.5 } else { 1.0 };
                acc += wt * wigner(rho, x * c - q * s, x * s + q * c);
            }
            worst = worst.max((acc * dp - homodyne_pdf(rho, th, x)).abs());
        }
    }
    worst
}

/// Upper-tail p-value of Pearson's statistic for `counts` against `probs`.
pub fn chi_square_p(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}
