//! Rank-one POVM elements for binned homodyne and heterodyne detection.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::fock::{coherent_vector, hermite_into};
use crate::grid::{GridSpec, Modality};
use crate::state::DensityMatrix;

/// `Π_j = w |ξ_j⟩⟨ξ_j|` for every bin, with a common bin measure `w`.
///
/// Homodyne elements are ordered phase-major (`j = s·N + i`) with `ξ` the
/// truncated quadrature eigenstate and `w = Δx`. Heterodyne elements follow
/// the row-major flattening of the `N × N` grid with `ξ` the truncated
/// coherent state at `x + ip` and `w = ΔxΔp/π`.
#[derive(Debug, Clone)]
pub struct PovmSet {
    modality: Modality,
    dim: usize,
    settings: usize,
    bins_per_setting: usize,
    measure: f64,
    /// Row-major `len × dim` amplitudes `⟨n|ξ_j⟩`.
    vectors: Vec<C64>,
}

pub fn build_povm(modality: Modality, grid: &GridSpec, d: usize) -> Result<PovmSet> {
    grid.validate(modality)?;
    let settings = grid.settings(modality);
    let per = grid.bins_per_setting(modality);
    let mut vectors = Vec::with_capacity(settings * per * d);
    let measure = match modality {
        Modality::Homodyne => {
            let mut psi = vec![0.0; d];
            for &theta in &grid.phases {
                for i in 0..grid.n_bins {
                    hermite_into(grid.x(i), &mut psi);
                    vectors.extend(
                        psi.iter()
                            .enumerate()
                            .map(|(n, &v)| C64::from_polar(v, n as f64 * theta)),
                    );
                }
            }
            grid.dx
        }
        Modality::Heterodyne => {
            for j in 0..per {
                let (x, p) = grid.het_point(j);
                vectors.extend(coherent_vector(C64::new(x, p), d));
            }
            grid.dx * grid.dp / PI
        }
    };
    Ok(PovmSet {
        modality,
        dim: d,
        settings,
        bins_per_setting: per,
        measure,
        vectors,
    })
}

impl PovmSet {
    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.settings * self.bins_per_setting
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn settings(&self) -> usize {
        self.settings
    }

    pub fn bins_per_setting(&self) -> usize {
        self.bins_per_setting
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    #[inline]
    pub fn vector(&self, j: usize) -> &[C64] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }

    /// Dense `Π_j`.
    pub fn element(&self, j: usize) -> DMatrix<C64> {
        let v = self.vector(j);
        DMatrix::from_fn(self.dim, self.dim, |m, n| v[m] * v[n].conj() * self.measure)
    }

    /// `Tr(ρ Π_j)`.
    #[inline]
    pub fn probability(&self, rho: &DensityMatrix, j: usize) -> f64 {
        self.measure * rho.expectation(self.vector(j))
    }

    pub fn probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        (0..self.len()).map(|j| self.probability(rho, j)).collect()
    }

    /// `Σ_j Π_j`.
    pub fn sum(&self) -> DMatrix<C64> {
        let d = self.dim;
        let mut g = DMatrix::zeros(d, d);
        for j in 0..self.len() {
            let v = self.vector(j);
            for m in 0..d {
                for n in 0..d {
                    g[(m, n)] += v[m] * v[n].conj();
                }
            }
        }
        g * C64::from(self.measure)
    }

    /// Frobenius distance between `Σ_j Π_j / S` and the identity, where `S`
    /// is the number of settings. Truncation keeps this from vanishing.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim;
        let g = self.sum() / C64::from(self.settings as f64);
        (g - DMatrix::<C64>::identity(d, d)).norm()
    }

    /// Copy of the elements at `rows`, in that order.
    pub fn select(&self, rows: &[usize]) -> PovmSet {
        let mut vectors = Vec::with_capacity(rows.len() * self.dim);
        for &j in rows {
            vectors.extend_from_slice(self.vector(j));
        }
        PovmSet {
            modality: self.modality,
            dim: self.dim,
            settings: 1,
            bins_per_setting: rows.len(),
            measure: self.measure,
            vectors,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{heterodyne_pdf, homodyne_pdf};
    use crate::state::random_mixed;

    #[test]
    fn default_homodyne_shape() {
        let povm = build_povm(Modality::Homodyne, &GridSpec::default_homodyne(), 11).unwrap();
        assert_eq!(povm.len(), 20_000);
        let e = povm.element(1234);
        // rank one: Π² = w Tr(Π)... i.e. Π² = Tr(Π) Π
        let tr = e.trace();
        let diff = &e * &e - &e * tr;
        assert!(diff.norm() < 1e-14);
    }

    #[test]
    fn vacuum_bin_at_origin() {
        let grid = GridSpec::new(-1.0, 0.1, 21, 1);
        let povm = build_povm(Modality::Homodyne, &grid, 11).unwrap();
        let vac = DensityMatrix::fock(0, 11);
        // bin 10 is centred at x = 0
        let p = povm.probability(&vac, 10);
        assert!((p - 0.1 / PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn heterodyne_trace_bounded() {
        let grid = GridSpec::new(-3.0, 0.5, 13, 0);
        let povm = build_povm(Modality::Heterodyne, &grid, 6).unwrap();
        let cap = grid.dx * grid.dp / PI;
        for j in 0..povm.len() {
            let tr = povm.element(j).trace();
            assert!(tr.re <= cap * (1.0 + 1e-15));
            assert!(tr.im.abs() < 1e-18);
        }
    }

    #[test]
    fn traces_reproduce_pdfs() {
        let rho = random_mixed(4, 0.7, 0.95, 12);
        let grid = GridSpec::new(-4.0, 0.25, 33, 5);
        let hom = build_povm(Modality::Homodyne, &grid, 4).unwrap();
        for s in 0..5 {
            for i in 0..33 {
                let j = s * 33 + i;
                let dense = (rho.matrix() * hom.element(j)).trace();
                let pdf = homodyne_pdf(&rho, grid.phases[s], grid.x(i)) * grid.dx;
                assert!((dense.re - pdf).abs() < 1e-14);
                assert!((hom.probability(&rho, j) - pdf).abs() < 1e-14);
            }
        }
        let het = build_povm(Modality::Heterodyne, &grid, 4).unwrap();
        for j in (0..het.len()).step_by(7) {
            let (x, p) = grid.het_point(j);
            let pdf = heterodyne_pdf(&rho, x, p) * grid.dx * grid.dp;
            assert!((het.probability(&rho, j) - pdf).abs() < 1e-14);
        }
    }

    #[test]
    fn default_grids_nearly_complete() {
        let hom = build_povm(Modality::Homodyne, &GridSpec::new(-10.0, 0.1005, 200, 4), 11).unwrap();
        assert!(hom.completeness_defect() < 1e-10);
        let het = build_povm(Modality::Heterodyne, &GridSpec::default_heterodyne(), 11).unwrap();
        assert!(het.completeness_defect() < 1e-10);
        // a narrow window is visibly incomplete
        let narrow = build_povm(Modality::Homodyne, &GridSpec::new(-1.0, 0.1, 21, 4), 4).unwrap();
        assert!(narrow.completeness_defect() > 0.1);
    }
}
