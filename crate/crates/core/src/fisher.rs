//! Classical Fisher information of binned homodyne and heterodyne data, the
//! Frobenius-error Cramér-Rao bound, and the grid-convergence sweep.
//!
//! For a measurement with bin probabilities `p_j(t) = Tr(ρ(t)Π_j)`, linear in
//! the Bloch vector `t`, the Fisher information per copy is
//! `Σ_j c_j c_jᵀ / p_j` with `c_j = (Tr(Ω_k Π_j))_k`. Homodyne data spread
//! `K` copies evenly over `S` phases, giving `K/S` times the sum over all
//! phases and bins; heterodyne uses all `K` copies on one setting.

use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ggm::{BlochVector, GgmBasis};
use crate::grid::{GridSpec, Modality};
use crate::povm::{build_povm, PovmSet};
use crate::state::{make_state_with_bound, StateSpec};

/// Bins with predicted probability below this are degenerate.
pub const DEGENERATE_PROB: f64 = 1e-300;
/// Largest condition number accepted by [`crlb_frobenius`].
pub const MAX_CONDITION: f64 = 1e12;
/// Percent-error threshold for the convergence sweep.
pub const SWEEP_TOLERANCE_PCT: f64 = 2.0;

/// Symmetric `(d²-1) × (d²-1)` Fisher information for `copies` state copies.
#[derive(Debug, Clone, PartialEq)]
pub struct CfiMatrix {
    pub dim: usize,
    pub copies: u64,
    pub matrix: DMatrix<f64>,
}

impl CfiMatrix {
    /// The same information for a different number of copies.
    pub fn with_copies(&self, copies: u64) -> CfiMatrix {
        CfiMatrix {
            dim: self.dim,
            copies,
            matrix: &self.matrix * (copies as f64 / self.copies as f64),
        }
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `λ_max / λ_min`, infinite when the matrix is singular or indefinite.
    pub fn condition_number(&self) -> f64 {
        let ev = self.eigenvalues();
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// `Tr 𝓘⁻¹` by Cholesky solves against each unit vector.
    pub fn trace_inverse(&self) -> Result<f64> {
        let condition = self.condition_number();
        if !(condition < MAX_CONDITION) {
            return Err(Error::IllConditioned { condition });
        }
        let n = self.matrix.nrows();
        let chol = Cholesky::new(self.matrix.clone()).ok_or(Error::IllConditioned { condition })?;
        let mut trace = 0.0;
        let mut e = DVector::zeros(n);
        for i in 0..n {
            e.fill(0.0);
            e[i] = 1.0;
            trace += chol.solve(&e)[i];
        }
        Ok(trace)
    }
}

/// Homodyne Fisher information at Bloch vector `t`.
pub fn homodyne_cfi(t: &BlochVector, grid: &GridSpec, copies: u64) -> Result<CfiMatrix> {
    cfi(t, Modality::Homodyne, grid, copies)
}

/// Heterodyne Fisher information at Bloch vector `t`.
pub fn heterodyne_cfi(t: &BlochVector, grid: &GridSpec, copies: u64) -> Result<CfiMatrix> {
    cfi(t, Modality::Heterodyne, grid, copies)
}

pub fn cfi(t: &BlochVector, modality: Modality, grid: &GridSpec, copies: u64) -> Result<CfiMatrix> {
    if copies == 0 {
        return Err(Error::invalid("number of copies must be positive"));
    }
    let basis = GgmBasis::new(t.dim)?;
    let povm = build_povm(modality, grid, t.dim)?;
    cfi_with(&basis, &povm, t, copies)
}

/// Rows per block in the information accumulation; fixed so that the
/// summation order does not depend on the thread count.
const BLOCK: usize = 2048;

/// Fisher information for a prebuilt basis and POVM.
pub fn cfi_with(basis: &GgmBasis, povm: &PovmSet, t: &BlochVector, copies: u64) -> Result<CfiMatrix> {
    let rho = basis.from_bloch(t)?;
    let npar = basis.len();
    let nel = povm.len();
    let w = povm.measure();
    let probs = checked_probabilities(povm, &rho)?;

    // Σ_j c_j c_jᵀ / p_j, blockwise: rows of C scaled by 1/√p_j, then CᵀC.
    let partials: Vec<DMatrix<f64>> = (0..nel)
        .collect::<Vec<_>>()
        .par_chunks(BLOCK)
        .map(|rows| {
            let mut block = DMatrix::<f64>::zeros(rows.len(), npar);
            let mut c = vec![0.0; npar];
            for (r, &j) in rows.iter().enumerate() {
                basis.expectations_into(povm.vector(j), &mut c);
                let scale = w / probs[j].sqrt();
                for (k, &ck) in c.iter().enumerate() {
                    block[(r, k)] = ck * scale;
                }
            }
            block.tr_mul(&block)
        })
        .collect();
    let mut info = DMatrix::<f64>::zeros(npar, npar);
    for part in &partials {
        info += part;
    }
    let per_setting = copies as f64 / povm.settings() as f64;
    info *= per_setting;
    // exact symmetry
    let info = (&info + info.transpose()) * 0.5;
    Ok(CfiMatrix {
        dim: t.dim,
        copies,
        matrix: info,
    })
}

/// Square-root form of the Fisher information: upper-triangular `R` with
/// `RᵀR = 𝓘`.
///
/// `R` comes from a QR factorization of the scaled design matrix (rows
/// `c_j/√p_j`), so its condition number is the square root of that of `𝓘`.
/// Near-pure states, whose information spans many orders of magnitude, keep
/// far more accuracy in `Tr 𝓘⁻¹` this way than through the normal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CfiFactor {
    pub dim: usize,
    pub copies: u64,
    pub r: DMatrix<f64>,
}

impl CfiFactor {
    pub fn matrix(&self) -> CfiMatrix {
        let m = self.r.tr_mul(&self.r);
        CfiMatrix {
            dim: self.dim,
            copies: self.copies,
            matrix: (&m + m.transpose()) * 0.5,
        }
    }

    /// Condition number of `𝓘`, from the singular values of `R`.
    pub fn condition_number(&self) -> f64 {
        let sv = self.r.singular_values();
        let hi = sv.max();
        let lo = sv.min();
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            (hi / lo).powi(2)
        }
    }

    /// `Tr 𝓘⁻¹ = ‖R⁻¹‖²_F` without a condition guard. Fails only when `R`
    /// is exactly singular.
    pub fn trace_inverse(&self) -> Result<f64> {
        let n = self.r.nrows();
        let inv = self
            .r
            .solve_upper_triangular(&DMatrix::identity(n, n))
            .ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
        Ok(inv.norm_squared())
    }
}

/// Factorized Fisher information for a prebuilt basis and POVM.
pub fn cfi_factor_with(basis: &GgmBasis, povm: &PovmSet, t: &BlochVector, copies: u64) -> Result<CfiFactor> {
    if copies == 0 {
        return Err(Error::invalid("number of copies must be positive"));
    }
    let rho = basis.from_bloch(t)?;
    let npar = basis.len();
    let nel = povm.len();
    let w = povm.measure();
    let probs = checked_probabilities(povm, &rho)?;

    // tall-skinny QR: factor each block, then fold the R factors in order
    let partials: Vec<DMatrix<f64>> = (0..nel)
        .collect::<Vec<_>>()
        .par_chunks(BLOCK)
        .map(|rows| {
            let mut block = DMatrix::<f64>::zeros(rows.len(), npar);
            let mut c = vec![0.0; npar];
            for (r, &j) in rows.iter().enumerate() {
                basis.expectations_into(povm.vector(j), &mut c);
                let scale = w / probs[j].sqrt();
                for (k, &ck) in c.iter().enumerate() {
                    block[(r, k)] = ck * scale;
                }
            }
            upper_factor(block, npar)
        })
        .collect();
    let mut r = DMatrix::<f64>::zeros(0, npar);
    for part in partials {
        let mut stacked = DMatrix::<f64>::zeros(r.nrows() + part.nrows(), npar);
        stacked.rows_mut(0, r.nrows()).copy_from(&r);
        stacked.rows_mut(r.nrows(), part.nrows()).copy_from(&part);
        r = upper_factor(stacked, npar);
    }
    if r.nrows() < npar {
        return Err(Error::IllConditioned { condition: f64::INFINITY });
    }
    r *= (copies as f64 / povm.settings() as f64).sqrt();
    Ok(CfiFactor {
        dim: t.dim,
        copies,
        r,
    })
}

/// Factorized Fisher information at Bloch vector `t`.
pub fn cfi_factor(t: &BlochVector, modality: Modality, grid: &GridSpec, copies: u64) -> Result<CfiFactor> {
    let basis = GgmBasis::new(t.dim)?;
    let povm = build_povm(modality, grid, t.dim)?;
    cfi_factor_with(&basis, &povm, t, copies)
}

/// `R` of a QR factorization with non-negative diagonal; fewer rows than
/// columns are passed through unchanged.
fn upper_factor(a: DMatrix<f64>, npar: usize) -> DMatrix<f64> {
    if a.nrows() < npar {
        return a;
    }
    let mut r = a.qr().r();
    for i in 0..npar {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
        }
    }
    r
}

fn checked_probabilities(povm: &PovmSet, rho: &crate::state::DensityMatrix) -> Result<Vec<f64>> {
    let per = povm.bins_per_setting();
    let probs: Vec<f64> = (0..povm.len()).map(|j| povm.probability(rho, j)).collect();
    let bad: Vec<(usize, usize)> = probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| !(p >= DEGENERATE_PROB))
        .map(|(j, _)| (j / per, j % per))
        .collect();
    if bad.is_empty() {
        Ok(probs)
    } else {
        Err(Error::DegenerateBin { bins: bad })
    }
}

/// Lower bound `2 Tr 𝓘⁻¹` on the mean squared Frobenius error.
pub fn crlb_frobenius(cfi: &CfiMatrix) -> Result<f64> {
    Ok(2.0 * cfi.trace_inverse()?)
}

/// `2 Tr 𝓘⁻¹` from the factorized information, without the condition guard.
pub fn crlb_frobenius_factored(factor: &CfiFactor) -> Result<f64> {
    Ok(2.0 * factor.trace_inverse()?)
}

/// Axes of the convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepAxes {
    pub phases: Vec<usize>,
    pub x1: Vec<f64>,
    pub dx: Vec<f64>,
}

impl Default for SweepAxes {
    fn default() -> Self {
        SweepAxes {
            phases: vec![200, 300, 400, 500, 600],
            x1: vec![-2.5, -3.75, -5.0, -6.5, -7.5],
            dx: vec![1.5, 1.0, 0.5, 0.1, 0.05],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    /// Index along the phase, x1 and dx axes.
    pub index: (usize, usize, usize),
    /// Number of phases; `None` for heterodyne.
    pub phases: Option<usize>,
    pub x1: f64,
    pub dx: f64,
    pub n_bins: usize,
    pub trace_inv_cfi: f64,
    /// Largest percent error against the refined neighbours, when they all
    /// exist.
    pub max_neighbor_pct_err: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub modality: Modality,
    pub copies: u64,
    pub points: Vec<SweepPoint>,
    /// Position in `points` of the selected grid, if any qualified.
    pub selected: Option<usize>,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        self.selected.is_some()
    }

    pub fn selected_point(&self) -> Option<&SweepPoint> {
        self.selected.map(|i| &self.points[i])
    }

    /// Converged value of `Tr 𝓘⁻¹`.
    pub fn trace_inv_cfi(&self) -> Option<f64> {
        self.selected_point().map(|p| p.trace_inv_cfi)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "S,x1,dx,trace_inv_cfi,max_neighbor_pct_err,converged")?;
        for p in &self.points {
            let s = p.phases.map(|s| s.to_string()).unwrap_or_else(|| "1".into());
            let err = p
                .max_neighbor_pct_err
                .map(|e| format!("{e:e}"))
                .unwrap_or_default();
            writeln!(
                out,
                "{s},{},{},{:e},{err},{}",
                p.x1, p.dx, p.trace_inv_cfi, p.converged
            )?;
        }
        Ok(())
    }
}

/// Evaluates `Tr 𝓘⁻¹` over the sweep and selects the least refined grid whose
/// value is within 2% of every neighbour one step further along the
/// refinement directions (more phases, wider span, finer bins).
///
/// Heterodyne sweeps drop the phase axis. Among qualifying grids the one with
/// the smallest total refinement index is chosen, ties broken by
/// `(phase, x1, dx)` index order.
pub fn convergence_sweep(spec: &StateSpec, modality: Modality, copies: u64) -> Result<ConvergenceReport> {
    convergence_sweep_with(spec, modality, copies, &SweepAxes::default())
}

/// The sweep characterizes the truncated, renormalized state as given, so no
/// truncation bound is enforced here.
pub fn convergence_sweep_with(
    spec: &StateSpec,
    modality: Modality,
    copies: u64,
    axes: &SweepAxes,
) -> Result<ConvergenceReport> {
    let rho = make_state_with_bound(spec, f64::INFINITY)?.rho;
    let basis = GgmBasis::new(rho.dim())?;
    let t = basis.to_bloch(&rho)?;
    let ns = match modality {
        Modality::Homodyne => axes.phases.len(),
        Modality::Heterodyne => 1,
    };
    let (nj, nk) = (axes.x1.len(), axes.dx.len());
    let mut index = Vec::with_capacity(ns * nj * nk);
    for i in 0..ns {
        for j in 0..nj {
            for k in 0..nk {
                index.push((i, j, k));
            }
        }
    }
    let values: Vec<(GridSpec, f64)> = index
        .par_iter()
        .map(|&(i, j, k)| {
            let n_phases = match modality {
                Modality::Homodyne => axes.phases[i],
                Modality::Heterodyne => 0,
            };
            let grid = GridSpec::symmetric(axes.x1[j], axes.dx[k], n_phases);
            let value = cfi_with(&basis, &build_povm(modality, &grid, rho.dim())?, &t, copies)
                .and_then(|c| c.trace_inverse())
                .map_err(|e| {
                    e.context(format!(
                        "sweep point S={n_phases}, x1={}, dx={}",
                        axes.x1[j], axes.dx[k]
                    ))
                })?;
            Ok((grid, value))
        })
        .collect::<Result<_>>()?;

    let at = |i: usize, j: usize, k: usize| values[(i * nj + j) * nk + k].1;
    let steps: Vec<(usize, usize, usize)> = match modality {
        Modality::Homodyne => (1..8).map(|b| (b & 1, (b >> 1) & 1, (b >> 2) & 1)).collect(),
        Modality::Heterodyne => vec![(0, 1, 0), (0, 0, 1), (0, 1, 1)],
    };
    let mut points = Vec::with_capacity(index.len());
    for (n, &(i, j, k)) in index.iter().enumerate() {
        let center = values[n].1;
        let fits = steps.iter().all(|&(a, b, c)| i + a < ns && j + b < nj && k + c < nk);
        let max_err = fits.then(|| {
            steps
                .iter()
                .map(|&(a, b, c)| 100.0 * (at(i + a, j + b, k + c) - center).abs() / center.abs())
                .fold(0.0, f64::max)
        });
        let grid = &values[n].0;
        points.push(SweepPoint {
            index: (i, j, k),
            phases: (modality == Modality::Homodyne).then_some(grid.n_phases()),
            x1: grid.x1,
            dx: grid.dx,
            n_bins: grid.n_bins,
            trace_inv_cfi: center,
            max_neighbor_pct_err: max_err,
            converged: max_err.is_some_and(|e| e < SWEEP_TOLERANCE_PCT),
        });
    }
    let selected = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.converged)
        .min_by_key(|(_, p)| {
            let (i, j, k) = p.index;
            (i + j + k, i, j, k)
        })
        .map(|(n, _)| n);
    Ok(ConvergenceReport {
        modality,
        copies,
        points,
        selected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ggm::to_bloch;
    use crate::state::{random_mixed, DensityMatrix, StateKind};

    fn diag_state() -> BlochVector {
        let rho = DensityMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(vec![
            0.7.into(),
            0.3.into(),
        ])))
        .unwrap();
        to_bloch(&rho).unwrap()
    }

    #[test]
    fn linear_in_copies() {
        let t = to_bloch(&random_mixed(3, 0.6, 0.9, 1)).unwrap();
        let grid = GridSpec::symmetric(-4.0, 0.2, 7);
        for m in [Modality::Homodyne, Modality::Heterodyne] {
            let a = cfi(&t, m, &grid, 1).unwrap();
            let b = cfi(&t, m, &grid, 2).unwrap();
            assert_eq!(b.matrix, &a.matrix * 2.0);
            assert_eq!(a.with_copies(2).matrix, b.matrix);
        }
    }

    #[test]
    fn factor_matches_normal_matrix() {
        let t = to_bloch(&random_mixed(3, 0.6, 0.9, 4)).unwrap();
        let grid = GridSpec::symmetric(-5.0, 0.25, 9);
        for m in [Modality::Homodyne, Modality::Heterodyne] {
            let a = cfi(&t, m, &grid, 3).unwrap();
            let f = cfi_factor(&t, m, &grid, 3).unwrap();
            let diff = (&f.matrix().matrix - &a.matrix).abs().max();
            assert!(diff <= 1e-12 * a.matrix.abs().max());
            let x = a.trace_inverse().unwrap();
            let y = f.trace_inverse().unwrap();
            assert!((x - y).abs() <= 1e-10 * x);
            assert!((a.condition_number() / f.condition_number() - 1.0).abs() < 1e-8);
            assert!((0..f.r.nrows()).all(|i| (0..i).all(|k| f.r[(i, k)] == 0.0)));
        }
    }

    #[test]
    fn factor_reaches_pure_state_information() {
        let t = to_bloch(&DensityMatrix::fock(2, 4)).unwrap();
        let grid = GridSpec::symmetric(-6.0, 0.1, 1);
        let normal = cfi(&t, Modality::Heterodyne, &grid, 1).unwrap();
        let f = cfi_factor(&t, Modality::Heterodyne, &grid, 1).unwrap();
        assert!(f.condition_number() > MAX_CONDITION);
        assert!(matches!(crlb_frobenius(&normal), Err(Error::IllConditioned { .. })));
        let v = crlb_frobenius_factored(&f).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn symmetric_psd() {
        let t = to_bloch(&random_mixed(4, 0.7, 0.95, 3)).unwrap();
        let grid = GridSpec::symmetric(-5.0, 0.25, 9);
        for m in [Modality::Homodyne, Modality::Heterodyne] {
            let c = cfi(&t, m, &grid, 1).unwrap();
            assert_eq!(c.matrix, c.matrix.transpose());
            let ev = c.eigenvalues();
            let scale = ev[ev.len() - 1];
            assert!(ev[0] > -1e-8 * scale);
        }
    }

    #[test]
    fn two_phases_inform_every_direction() {
        let t = BlochVector::zeros(2);
        let mut grid = GridSpec::symmetric(-5.0, 0.1, 0);
        grid.phases = vec![0.0, std::f64::consts::FRAC_PI_2];
        let c = homodyne_cfi(&t, &grid, 1).unwrap();
        assert!(c.eigenvalues()[0] > 1e-3);
        assert!(crlb_frobenius(&c).is_ok());
    }

    #[test]
    fn crlb_of_scaled_identity() {
        let c = CfiMatrix {
            dim: 2,
            copies: 1,
            matrix: DMatrix::identity(3, 3) * 4.0,
        };
        assert!((crlb_frobenius(&c).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn crlb_scales_inversely_with_copies() {
        let t = diag_state();
        let grid = GridSpec::symmetric(-5.0, 0.1, 50);
        let a = crlb_frobenius(&homodyne_cfi(&t, &grid, 1000).unwrap()).unwrap();
        let b = crlb_frobenius(&homodyne_cfi(&t, &grid, 10_000).unwrap()).unwrap();
        assert!((a / b - 10.0).abs() < 1e-10);
    }

    #[test]
    fn singular_information_rejected() {
        let c = CfiMatrix {
            dim: 2,
            copies: 1,
            matrix: DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 1e-14])),
        };
        match crlb_frobenius(&c) {
            Err(Error::IllConditioned { condition }) => assert!(condition > 1e13),
            other => panic!("expected ill-conditioning, got {other:?}"),
        }
        // one phase cannot see the antisymmetric direction of a qubit
        let mut grid = GridSpec::symmetric(-5.0, 0.1, 0);
        grid.phases = vec![0.0];
        let c = homodyne_cfi(&diag_state(), &grid, 1).unwrap();
        assert!(crlb_frobenius(&c).is_err());
    }

    #[test]
    fn degenerate_bins_reported() {
        // |1⟩⟨1| vanishes at x = 0, which is a bin centre here
        let t = to_bloch(&DensityMatrix::fock(1, 2)).unwrap();
        let grid = GridSpec::symmetric(-2.0, 0.5, 2);
        match homodyne_cfi(&t, &grid, 1) {
            Err(Error::DegenerateBin { bins }) => {
                assert!(bins.contains(&(0, 4)));
                assert!(bins.contains(&(1, 4)));
            }
            other => panic!("expected degenerate bins, got {other:?}"),
        }
    }

    #[test]
    fn regularized_vacuum_heterodyne_is_finite() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            (1.0 - 1e-3 + 0.5e-3).into(),
            0.5e-3.into(),
        ]));
        let t = to_bloch(&DensityMatrix::new(m).unwrap()).unwrap();
        let c = heterodyne_cfi(&t, &GridSpec::new(-5.0, 0.1, 101, 0), 1).unwrap();
        assert!(c.matrix.iter().all(|v| v.is_finite()));
        let ev = c.eigenvalues();
        assert!(ev[0] > -1e-8 * ev[2]);
    }

    #[test]
    fn single_point_sweep_not_converged() {
        let spec = StateSpec::new(StateKind::Thermal { lambda: 0.5 }, 2);
        let axes = SweepAxes {
            phases: vec![20],
            x1: vec![-5.0],
            dx: vec![0.25],
        };
        let rep = convergence_sweep_with(&spec, Modality::Homodyne, 1, &axes).unwrap();
        assert_eq!(rep.points.len(), 1);
        assert!(!rep.converged());
        assert!(rep.points[0].max_neighbor_pct_err.is_none());
    }

    #[test]
    fn heterodyne_sweep_ignores_phase_axis() {
        let spec = StateSpec::new(StateKind::Thermal { lambda: 0.5 }, 1);
        let axes = SweepAxes {
            phases: vec![200, 300],
            x1: vec![-2.5, -5.0, -6.5],
            dx: vec![0.5, 0.25, 0.1],
        };
        let rep = convergence_sweep_with(&spec, Modality::Heterodyne, 1, &axes).unwrap();
        assert_eq!(rep.points.len(), 9);
        assert!(rep.points.iter().all(|p| p.phases.is_none()));
        let mut csv = Vec::new();
        rep.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("S,x1,dx,trace_inv_cfi,max_neighbor_pct_err,converged\n"));
        assert_eq!(text.lines().count(), 10);
    }
}
