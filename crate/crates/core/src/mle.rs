//! Iterative maximum-likelihood reconstruction (the `RρR` fixed-point
//! iteration with a diluted fallback).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::povm::PovmSet;
use crate::sim::Dataset;
use crate::state::DensityMatrix;

pub use crate::povm::build_povm;

/// Allowed relative log-likelihood decrease before a step is diluted.
const DECREASE_TOL: f64 = 1e-12;
/// Halvings of the dilution parameter before giving up on a step.
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleConfig {
    pub max_iters: usize,
    /// Stop once the relative log-likelihood change falls below this.
    pub ll_tol: f64,
    /// Initial `ε` of the diluted step `(I + εR)ρ(I + εR)`.
    pub dilution: f64,
}

impl Default for MleConfig {
    fn default() -> Self {
        MleConfig {
            max_iters: 5000,
            ll_tol: 1e-10,
            dilution: 1.0,
        }
    }
}

impl MleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.ll_tol > 0.0) {
            return Err(Error::invalid("ll_tol must be positive"));
        }
        if !(self.dilution > 0.0 && self.dilution <= 1.0) {
            return Err(Error::invalid("dilution must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MleResult {
    pub rho_hat: DensityMatrix,
    pub iterations: usize,
    pub final_ll: f64,
    /// False when the iteration budget ran out first.
    pub converged: bool,
    /// Log-likelihood of the starting point followed by every accepted step.
    pub ll_trace: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MleResultJson {
    dim: usize,
    iterations: usize,
    converged: bool,
    final_ll: f64,
    rho_hat: Vec<f64>,
}

impl MleResult {
    /// `{dim, iterations, converged, final_ll, rho_hat}` with `rho_hat` as
    /// row-major interleaved `re, im` pairs.
    pub fn to_json(&self) -> String {
        let m = self.rho_hat.matrix();
        let d = self.rho_hat.dim();
        let mut flat = Vec::with_capacity(2 * d * d);
        for i in 0..d {
            for j in 0..d {
                flat.push(m[(i, j)].re);
                flat.push(m[(i, j)].im);
            }
        }
        serde_json::to_string_pretty(&MleResultJson {
            dim: d,
            iterations: self.iterations,
            converged: self.converged,
            final_ll: self.final_ll,
            rho_hat: flat,
        })
        .expect("serializable")
    }

    /// Inverse of [`MleResult::to_json`]; the log-likelihood trace is not
    /// stored and comes back empty.
    pub fn from_json(text: &str) -> Result<MleResult> {
        let j: MleResultJson = serde_json::from_str(text)?;
        if j.rho_hat.len() != 2 * j.dim * j.dim {
            return Err(Error::DimensionMismatch {
                expected: 2 * j.dim * j.dim,
                got: j.rho_hat.len(),
            });
        }
        let m = DMatrix::from_fn(j.dim, j.dim, |r, c| {
            let k = 2 * (r * j.dim + c);
            C64::new(j.rho_hat[k], j.rho_hat[k + 1])
        });
        Ok(MleResult {
            rho_hat: DensityMatrix::new_unchecked(m),
            iterations: j.iterations,
            final_ll: j.final_ll,
            converged: j.converged,
            ll_trace: Vec::new(),
        })
    }
}

fn check_shapes(data: &Dataset, povm: &PovmSet) -> Result<()> {
    if data.counts.len() != povm.len() {
        return Err(Error::DimensionMismatch {
            expected: povm.len(),
            got: data.counts.len(),
        });
    }
    if data.dim != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.dim(),
            got: data.dim,
        });
    }
    Ok(())
}

/// `Σ_j n_j ln Tr(ρΠ_j)` over observed bins; `-∞` when an observed bin has
/// zero predicted probability.
pub fn log_likelihood(rho: &DensityMatrix, data: &Dataset, povm: &PovmSet) -> Result<f64> {
    check_shapes(data, povm)?;
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.dim(),
            got: rho.dim(),
        });
    }
    let mut ll = 0.0;
    for (j, &n) in data.counts.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let p = povm.probability(rho, j);
        if !(p > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        ll += n as f64 * p.ln();
    }
    Ok(ll)
}

/// Reconstructs `ρ̂` from integer counts, starting at `I/d`.
pub fn reconstruct(data: &Dataset, povm: &PovmSet, config: &MleConfig) -> Result<MleResult> {
    check_shapes(data, povm)?;
    let weights: Vec<f64> = data.counts.iter().map(|&n| n as f64).collect();
    reconstruct_weighted(&weights, povm, config, None)
}

/// Reconstruction from non-negative real bin weights (expected counts, for
/// instance), optionally from a chosen starting state.
pub fn reconstruct_weighted(
    weights: &[f64],
    povm: &PovmSet,
    config: &MleConfig,
    start: Option<&DensityMatrix>,
) -> Result<MleResult> {
    config.validate()?;
    if weights.len() != povm.len() {
        return Err(Error::DimensionMismatch {
            expected: povm.len(),
            got: weights.len(),
        });
    }
    let observed: Vec<usize> = (0..weights.len()).filter(|&j| weights[j] > 0.0).collect();
    if observed.is_empty() {
        return Err(Error::NoSignal);
    }
    let total: f64 = observed.iter().map(|&j| weights[j]).sum();
    let frame = Frame {
        povm: povm.select(&observed),
        freq: observed.iter().map(|&j| weights[j] / total).collect(),
        total,
    };
    let d = povm.dim();
    let mut rho = match start {
        Some(r) => r.clone(),
        None => DensityMatrix::maximally_mixed(d),
    };
    let mut probs = frame.probabilities(&rho);
    let mut ll = frame.log_likelihood(&probs);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iters {
        iterations += 1;
        let r = frame.r_operator(&probs);
        let mut cand = sandwich(&r, &rho);
        let mut cand_probs = frame.probabilities(&cand);
        let mut cand_ll = frame.log_likelihood(&cand_probs);
        let floor = ll - DECREASE_TOL * ll.abs();
        if !(cand_ll >= floor) {
            let mut eps = config.dilution;
            let mut accepted = false;
            for _ in 0..MAX_HALVINGS {
                let a = DMatrix::<C64>::identity(d, d) + &r * C64::from(eps);
                cand = sandwich(&a, &rho);
                cand_probs = frame.probabilities(&cand);
                cand_ll = frame.log_likelihood(&cand_probs);
                if cand_ll >= floor {
                    accepted = true;
                    break;
                }
                eps *= 0.5;
            }
            if !accepted {
                // no ascent direction left at machine precision
                converged = true;
                iterations -= 1;
                break;
            }
        }
        debug_assert!(cand.is_psd(1e-10), "iterate left the PSD cone");
        let change = (cand_ll - ll).abs() / ll.abs().max(f64::MIN_POSITIVE);
        rho = cand;
        probs = cand_probs;
        ll = cand_ll;
        trace.push(ll);
        if change < config.ll_tol {
            converged = true;
            break;
        }
    }
    Ok(MleResult {
        rho_hat: rho,
        iterations,
        final_ll: ll * frame.total,
        converged,
        ll_trace: trace.into_iter().map(|v| v * frame.total).collect(),
    })
}

/// One undiluted `RρR` step on real bin weights.
pub fn rrr_step(rho: &DensityMatrix, weights: &[f64], povm: &PovmSet) -> Result<DensityMatrix> {
    let cfg = MleConfig {
        max_iters: 1,
        ll_tol: f64::MIN_POSITIVE,
        dilution: 1.0,
    };
    Ok(reconstruct_weighted(weights, povm, &cfg, Some(rho))?.rho_hat)
}

/// Observed bins with normalized frequencies.
struct Frame {
    povm: PovmSet,
    freq: Vec<f64>,
    total: f64,
}

const BLOCK: usize = 1024;

impl Frame {
    fn probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        let n = self.povm.len();
        let mut out = vec![0.0; n];
        out.par_chunks_mut(BLOCK).enumerate().for_each(|(b, chunk)| {
            for (k, slot) in chunk.iter_mut().enumerate() {
                *slot = self.povm.probability(rho, b * BLOCK + k);
            }
        });
        out
    }

    /// Log-likelihood per copy, `Σ_j f_j ln p_j`.
    fn log_likelihood(&self, probs: &[f64]) -> f64 {
        let mut ll = 0.0;
        for (f, &p) in self.freq.iter().zip(probs) {
            if !(p > 0.0) {
                return f64::NEG_INFINITY;
            }
            ll += f * p.ln();
        }
        ll
    }

    /// `R = Σ_j (f_j / p_j) Π_j`, accumulated in fixed-size blocks summed in
    /// order.
    fn r_operator(&self, probs: &[f64]) -> DMatrix<C64> {
        let d = self.povm.dim();
        let n = self.povm.len();
        let w = self.povm.measure();
        let starts: Vec<usize> = (0..n).step_by(BLOCK).collect();
        let partials: Vec<Vec<C64>> = starts
            .par_iter()
            .map(|&start| {
                let mut acc = vec![C64::new(0.0, 0.0); d * d];
                for j in start..(start + BLOCK).min(n) {
                    let y = w * self.freq[j] / probs[j];
                    let v = self.povm.vector(j);
                    for m in 0..d {
                        let vm = v[m] * y;
                        for k in m..d {
                            acc[m * d + k] += vm * v[k].conj();
                        }
                    }
                }
                acc
            })
            .collect();
        let mut r = DMatrix::<C64>::zeros(d, d);
        for part in &partials {
            for m in 0..d {
                for k in m..d {
                    r[(m, k)] += part[m * d + k];
                }
            }
        }
        for m in 0..d {
            r[(m, m)].im = 0.0;
            for k in m + 1..d {
                r[(k, m)] = r[(m, k)].conj();
            }
        }
        r
    }
}

/// `N[A ρ A†]` with `A` Hermitian, Hermitized and trace-normalized.
fn sandwich(a: &DMatrix<C64>, rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::hermitize_normalize(a * rho.matrix() * a)
}
