//! Generalized Gell-Mann basis and Bloch-vector algebra.
//!
//! The `d² - 1` traceless Hermitian matrices satisfy `Tr Ω_i Ω_j = 2δ_ij`, so
//! every unit-trace Hermitian matrix is `I/d + Σ t_i Ω_i` with
//! `t_i = Tr(ρ Ω_i)/2`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::state::DensityMatrix;

pub const MAX_DIM: usize = 64;

/// One basis element, labelled by its class and Fock indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GgmElement {
    /// `|l⟩⟨m| + |m⟩⟨l|`, `l < m`.
    Symmetric { l: usize, m: usize },
    /// `-i|l⟩⟨m| + i|m⟩⟨l|`, `l < m`.
    Antisymmetric { l: usize, m: usize },
    /// `√(2/(l(l+1))) (Σ_{k<l} |k⟩⟨k| - l|l⟩⟨l|)`, `1 <= l < d`.
    Diagonal { l: usize },
}

/// Ordered basis: symmetric, then antisymmetric, then diagonal. Pairs
/// `(l, m)` run lexicographically within the first two classes.
#[derive(Debug, Clone, PartialEq)]
pub struct GgmBasis {
    dim: usize,
    elements: Vec<GgmElement>,
    diag_coef: Vec<f64>,
}

pub fn build_basis(d: usize) -> Result<GgmBasis> {
    GgmBasis::new(d)
}

impl GgmBasis {
    pub fn new(d: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&d) {
            return Err(Error::invalid(format!("GGM basis needs 2 <= d <= {MAX_DIM}, got {d}")));
        }
        let pairs: Vec<(usize, usize)> = (0..d)
            .flat_map(|l| (l + 1..d).map(move |m| (l, m)))
            .collect();
        let mut elements = Vec::with_capacity(d * d - 1);
        elements.extend(pairs.iter().map(|&(l, m)| GgmElement::Symmetric { l, m }));
        elements.extend(pairs.iter().map(|&(l, m)| GgmElement::Antisymmetric { l, m }));
        elements.extend((1..d).map(|l| GgmElement::Diagonal { l }));
        let mut diag_coef = vec![0.0; d];
        for (l, c) in diag_coef.iter_mut().enumerate().skip(1) {
            *c = (2.0 / (l * (l + 1)) as f64).sqrt();
        }
        Ok(GgmBasis {
            dim: d,
            elements,
            diag_coef,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `d² - 1`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GgmElement] {
        &self.elements
    }

    /// Dense form of `Ω_i`.
    pub fn matrix(&self, i: usize) -> DMatrix<C64> {
        let d = self.dim;
        let mut m = DMatrix::zeros(d, d);
        match self.elements[i] {
            GgmElement::Symmetric { l, m: k } => {
                m[(l, k)] = C64::new(1.0, 0.0);
                m[(k, l)] = C64::new(1.0, 0.0);
            }
            GgmElement::Antisymmetric { l, m: k } => {
                m[(l, k)] = C64::new(0.0, -1.0);
                m[(k, l)] = C64::new(0.0, 1.0);
            }
            GgmElement::Diagonal { l } => {
                let c = self.diag_coef[l];
                for k in 0..l {
                    m[(k, k)] = C64::from(c);
                }
                m[(l, l)] = C64::from(-c * l as f64);
            }
        }
        m
    }

    pub fn matrices(&self) -> impl Iterator<Item = DMatrix<C64>> + '_ {
        (0..self.len()).map(|i| self.matrix(i))
    }

    /// `t_i = Tr(ρ Ω_i)/2`.
    pub fn to_bloch(&self, rho: &DensityMatrix) -> Result<BlochVector> {
        self.check_dim(rho.dim())?;
        let r = rho.matrix();
        let t = self
            .elements
            .iter()
            .map(|e| match *e {
                GgmElement::Symmetric { l, m } => 0.5 * (r[(l, m)].re + r[(m, l)].re),
                GgmElement::Antisymmetric { l, m } => 0.5 * (r[(m, l)].im - r[(l, m)].im),
                GgmElement::Diagonal { l } => {
                    let c = self.diag_coef[l];
                    let head: f64 = (0..l).map(|k| r[(k, k)].re).sum();
                    0.5 * c * (head - l as f64 * r[(l, l)].re)
                }
            })
            .collect();
        Ok(BlochVector { dim: self.dim, t })
    }

    /// `I/d + Σ t_i Ω_i`; Hermitian with unit trace but not necessarily PSD.
    pub fn from_bloch(&self, t: &BlochVector) -> Result<DensityMatrix> {
        self.check_dim(t.dim)?;
        if t.t.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: t.t.len(),
            });
        }
        let d = self.dim;
        let mut m = DMatrix::from_diagonal_element(d, d, C64::from(1.0 / d as f64));
        for (e, &ti) in self.elements.iter().zip(&t.t) {
            match *e {
                GgmElement::Symmetric { l, m: k } => {
                    m[(l, k)] += ti;
                    m[(k, l)] += ti;
                }
                GgmElement::Antisymmetric { l, m: k } => {
                    m[(l, k)] += C64::new(0.0, -ti);
                    m[(k, l)] += C64::new(0.0, ti);
                }
                GgmElement::Diagonal { l } => {
                    let c = self.diag_coef[l] * ti;
                    for j in 0..l {
                        m[(j, j)] += c;
                    }
                    m[(l, l)] -= c * l as f64;
                }
            }
        }
        Ok(DensityMatrix::new_unchecked(m))
    }

    /// Writes `⟨ξ|Ω_j|ξ⟩` for every basis element into `out`.
    pub fn expectations_into(&self, xi: &[C64], out: &mut [f64]) {
        debug_assert_eq!(xi.len(), self.dim);
        debug_assert_eq!(out.len(), self.len());
        let d = self.dim;
        let n_pairs = d * (d - 1) / 2;
        let mut idx = 0;
        for l in 0..d {
            for m in l + 1..d {
                let z = xi[l].conj() * xi[m];
                out[idx] = 2.0 * z.re;
                out[idx + n_pairs] = 2.0 * z.im;
                idx += 1;
            }
        }
        let mut head = 0.0;
        for l in 1..d {
            head += xi[l - 1].norm_sqr();
            out[2 * n_pairs + l - 1] = self.diag_coef[l] * (head - l as f64 * xi[l].norm_sqr());
        }
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: d,
            });
        }
        Ok(())
    }
}

/// Real coefficients of a state in the GGM basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochVector {
    pub dim: usize,
    pub t: Vec<f64>,
}

impl BlochVector {
    pub fn new(dim: usize, t: Vec<f64>) -> Result<Self> {
        if t.len() + 1 != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim - 1,
                got: t.len(),
            });
        }
        Ok(BlochVector { dim, t })
    }

    pub fn zeros(dim: usize) -> Self {
        BlochVector {
            dim,
            t: vec![0.0; dim * dim - 1],
        }
    }

    pub fn norm(&self) -> f64 {
        self.t.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Convenience wrapper building the basis on the fly.
pub fn to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    GgmBasis::new(rho.dim())?.to_bloch(rho)
}

pub fn from_bloch(t: &BlochVector) -> Result<DensityMatrix> {
    GgmBasis::new(t.dim)?.from_bloch(t)
}

/// `Tr[(a-b)†(a-b)]`.
pub fn frobenius_sq(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a
        .matrix()
        .iter()
        .zip(b.matrix().iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum())
}
