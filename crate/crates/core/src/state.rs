//! Density matrices in a truncated Fock basis and ground-truth state
//! factories.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::coherent_overlap;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Default bound on the population discarded by the photon cutoff.
pub const DEFAULT_TRUNCATION_BOUND: f64 = 1e-2;

/// A `d × d` complex matrix in the Fock basis `|0⟩..|d-1⟩`.
///
/// Constructed through [`DensityMatrix::new`] the matrix is Hermitian, has
/// unit trace and is positive semidefinite. [`DensityMatrix::new_unchecked`]
/// skips the checks; Bloch-vector reconstructions go through it because they
/// need not be positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        let rho = Self::new_unchecked(m);
        rho.validate()?;
        Ok(rho)
    }

    pub fn new_unchecked(m: DMatrix<C64>) -> Self {
        assert!(m.is_square(), "density matrix must be square");
        DensityMatrix { m }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::new_unchecked(DMatrix::identity(d, d) / C64::from(d as f64))
    }

    /// `|n⟩⟨n|` in dimension `d`.
    pub fn fock(n: usize, d: usize) -> Self {
        assert!(n < d);
        let mut m = DMatrix::zeros(d, d);
        m[(n, n)] = C64::from(1.0);
        Self::new_unchecked(m)
    }

    /// `|ψ⟩⟨ψ|` for the normalized version of `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("state vector has zero or non-finite norm"));
        }
        let v = DVector::from_iterator(psi.len(), psi.iter().map(|c| c / norm));
        Ok(Self::new_unchecked(&v * v.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.m + self.m.adjoint()) * C64::from(0.5);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_defect();
        if herm >= HERMITIAN_TOL {
            return Err(Error::invalid(format!("matrix not Hermitian (defect {herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() >= TRACE_TOL {
            return Err(Error::invalid(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::invalid(format!("matrix not PSD (min eigenvalue {min:.3e})")));
        }
        Ok(())
    }

    /// `⟨v|ρ|v⟩`, real part.
    #[inline]
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let d = self.dim();
        debug_assert_eq!(v.len(), d);
        let mut acc = 0.0;
        for n in 0..d {
            let mut row = C64::new(0.0, 0.0);
            for m in 0..d {
                row += self.m[(n, m)] * v[m];
            }
            acc += (v[n].conj() * row).re;
        }
        acc
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        self.m.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `(ρ + ρ†)/2` rescaled to unit trace.
    pub fn hermitize_normalize(m: DMatrix<C64>) -> Self {
        let h = (&m + m.adjoint()) * C64::from(0.5);
        let tr = h.trace().re;
        Self::new_unchecked(h / C64::from(tr))
    }
}

/// Tr ρ².
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

/// Ground-truth state families.
#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    Thermal { lambda: f64 },
    Coherent { alpha: C64 },
    SqueezedVacuum { r: f64 },
    Fock { n: usize },
    /// Amplitudes on `|0⟩, |1⟩, ...`; normalized on construction.
    Superposition { coeffs: Vec<C64> },
    RandomMixed {
        purity_low: f64,
        purity_high: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    pub kind: StateKind,
    /// Photon cutoff; the Hilbert-space dimension is `n_c + 1`.
    pub n_c: usize,
}

impl StateSpec {
    pub fn new(kind: StateKind, n_c: usize) -> Self {
        StateSpec { kind, n_c }
    }

    pub fn dim(&self) -> usize {
        self.n_c + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_c < 1 {
            return Err(Error::invalid("n_c must be at least 1"));
        }
        if self.n_c > 63 {
            return Err(Error::invalid("n_c must be at most 63"));
        }
        match &self.kind {
            StateKind::Thermal { lambda } => {
                if !(lambda.abs() < 1.0) {
                    return Err(Error::invalid(format!("thermal lambda {lambda} must satisfy |lambda| < 1")));
                }
            }
            StateKind::Coherent { alpha } => {
                if !(alpha.re.is_finite() && alpha.im.is_finite()) {
                    return Err(Error::invalid("coherent alpha must be finite"));
                }
            }
            StateKind::SqueezedVacuum { r } => {
                if !(*r >= 0.0 && r.is_finite()) {
                    return Err(Error::invalid(format!("squeezing r {r} must be finite and >= 0")));
                }
            }
            StateKind::Fock { n } => {
                if *n > self.n_c {
                    return Err(Error::invalid(format!("Fock n={n} exceeds cutoff {}", self.n_c)));
                }
            }
            StateKind::Superposition { coeffs } => {
                if coeffs.is_empty() || coeffs.len() > self.dim() {
                    return Err(Error::invalid(format!(
                        "superposition needs 1..={} coefficients, got {}",
                        self.dim(),
                        coeffs.len()
                    )));
                }
                let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
                if !(norm > 0.0 && norm.is_finite()) {
                    return Err(Error::invalid("superposition coefficients have zero norm"));
                }
            }
            StateKind::RandomMixed {
                purity_low,
                purity_high,
                ..
            } => {
                let floor = 1.0 / self.dim() as f64;
                if !(0.0 < *purity_low && purity_low < purity_high && *purity_high <= 1.0) {
                    return Err(Error::invalid(format!(
                        "need 0 < purity_low < purity_high <= 1, got ({purity_low}, {purity_high})"
                    )));
                }
                if *purity_low < floor {
                    return Err(Error::invalid(format!(
                        "purity_low {purity_low} is below the minimum purity 1/d = {floor}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Output of [`make_state`].
#[derive(Debug, Clone)]
pub struct PreparedState {
    pub rho: DensityMatrix,
    /// Population the untruncated state places above the cutoff, where the
    /// family has an untruncated form.
    pub truncation_error: Option<f64>,
}

pub fn make_state(spec: &StateSpec) -> Result<PreparedState> {
    make_state_with_bound(spec, DEFAULT_TRUNCATION_BOUND)
}

/// Builds the truncated, unit-trace ground truth for `spec`, rejecting
/// analytic families whose discarded population exceeds `bound`.
pub fn make_state_with_bound(spec: &StateSpec, bound: f64) -> Result<PreparedState> {
    spec.validate()?;
    let d = spec.dim();
    let check = |parameter: &str, error: f64| -> Result<()> {
        if error > bound {
            Err(Error::Truncation {
                parameter: parameter.to_string(),
                error,
                bound,
            })
        } else {
            Ok(())
        }
    };
    let (rho, truncation_error) = match &spec.kind {
        StateKind::Thermal { lambda } => {
            let l2 = lambda * lambda;
            let diag: Vec<f64> = (0..d).map(|n| (1.0 - l2) * l2.powi(n as i32)).collect();
            let kept: f64 = diag.iter().sum();
            let eps = l2.powi(d as i32);
            check("lambda", eps)?;
            let m = DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    C64::from(diag[i] / kept)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            (DensityMatrix::new_unchecked(m), Some(eps))
        }
        StateKind::Coherent { alpha } => {
            let amps: Vec<C64> = (0..d).map(|n| coherent_overlap(n, *alpha)).collect();
            let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            let eps = (1.0 - kept).max(0.0);
            check("alpha", eps)?;
            (DensityMatrix::pure(&amps)?, Some(eps))
        }
        StateKind::SqueezedVacuum { r } => {
            let amps = squeezed_vacuum_amplitudes(*r, d);
            let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            let eps = (1.0 - kept).max(0.0);
            check("r", eps)?;
            (DensityMatrix::pure(&amps)?, Some(eps))
        }
        StateKind::Fock { n } => (DensityMatrix::fock(*n, d), Some(0.0)),
        StateKind::Superposition { coeffs } => {
            let mut amps = coeffs.clone();
            amps.resize(d, C64::new(0.0, 0.0));
            (DensityMatrix::pure(&amps)?, Some(0.0))
        }
        StateKind::RandomMixed {
            purity_low,
            purity_high,
            seed,
        } => (random_mixed(d, *purity_low, *purity_high, *seed), None),
    };
    rho.validate()?;
    Ok(PreparedState {
        rho,
        truncation_error,
    })
}

/// Untruncated squeezed-vacuum amplitudes on `|0⟩..|d-1⟩` (odd entries zero).
fn squeezed_vacuum_amplitudes(r: f64, d: usize) -> Vec<C64> {
    let t = r.tanh();
    let norm = r.cosh().sqrt().recip();
    let mut amps = vec![C64::new(0.0, 0.0); d];
    let mut c = 1.0;
    let mut k = 0;
    while 2 * k < d {
        if k > 0 {
            let two_k = (2 * k) as f64;
            c *= -t * (two_k * (two_k - 1.0)).sqrt() / two_k;
        }
        amps[2 * k] = C64::from(norm * c);
        k += 1;
    }
    amps
}

/// Full-rank random state with purity drawn uniformly from
/// `(purity_low, purity_high)`.
///
/// A Ginibre matrix `G` gives `ρ₀ = GG†/Tr GG†`; if `ρ₀` is already less pure
/// than the target its spectrum is raised to the smallest integer power that
/// clears the target. The result is `wρ₀ + (1-w)I/d` with `w` bisected onto
/// the target purity.
pub fn random_mixed(d: usize, purity_low: f64, purity_high: f64, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let target = loop {
        let t = rng.random_range(purity_low..purity_high);
        if t > purity_low {
            break t;
        }
    };
    loop {
        let g = DMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let wishart = &g * g.adjoint();
        let eig = SymmetricEigen::new(wishart);
        let raw: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
        let Some(spectrum) = sharpen_to(&raw, target) else {
            continue;
        };
        let inv_d = 1.0 / d as f64;
        let purity_at = |w: f64| -> f64 {
            spectrum
                .iter()
                .map(|&l| (w * l + (1.0 - w) * inv_d).powi(2))
                .sum()
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if purity_at(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let w = 0.5 * (lo + hi);
        let mixed: Vec<f64> = spectrum.iter().map(|&l| w * l + (1.0 - w) * inv_d).collect();
        let u = &eig.eigenvectors;
        let diag = DMatrix::from_diagonal(&DVector::from_iterator(
            d,
            mixed.iter().map(|&v| C64::from(v)),
        ));
        let m = u * diag * u.adjoint();
        return DensityMatrix::hermitize_normalize(m);
    }
}

/// Normalized `λ^q` for the smallest integer `q >= 1` whose purity reaches
/// `target`, or `None` when the spectrum is too degenerate to get there.
fn sharpen_to(raw: &[f64], target: f64) -> Option<Vec<f64>> {
    let max = raw.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return None;
    }
    let scaled: Vec<f64> = raw.iter().map(|&l| l / max).collect();
    for q in 1..=256 {
        let pw: Vec<f64> = scaled.iter().map(|&l| l.powi(q)).collect();
        let s: f64 = pw.iter().sum();
        let spec: Vec<f64> = pw.iter().map(|&l| l / s).collect();
        let p: f64 = spec.iter().map(|l| l * l).sum();
        if p >= target {
            return Some(spec);
        }
    }
    None
}

/// Flat key/value form of [`StateSpec`] used in config files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Each entry is a number or a complex literal such as `"0.5-0.1i"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<Coefficient>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purity_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purity_high: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub n_c: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Real(f64),
    Complex(String),
}

impl Coefficient {
    fn value(&self) -> Result<C64> {
        match self {
            Coefficient::Real(v) => Ok(C64::from(*v)),
            Coefficient::Complex(s) => s
                .trim()
                .replace(' ', "")
                .parse::<C64>()
                .map_err(|_| Error::Config(format!("bad complex coefficient '{s}'"))),
        }
    }
}

impl From<C64> for Coefficient {
    fn from(c: C64) -> Self {
        if c.im == 0.0 {
            Coefficient::Real(c.re)
        } else {
            Coefficient::Complex(format!("{}{:+}i", c.re, c.im))
        }
    }
}

impl TryFrom<&StateConfig> for StateSpec {
    type Error = Error;

    fn try_from(c: &StateConfig) -> Result<Self> {
        fn need<T: Copy>(v: Option<T>, key: &str, kind: &str) -> Result<T> {
            v.ok_or_else(|| Error::Config(format!("state kind '{kind}' requires '{key}'")))
        }
        let k = c.kind.trim().to_ascii_lowercase();
        let kind = match k.as_str() {
            "thermal" => StateKind::Thermal {
                lambda: need(c.lambda, "lambda", &k)?,
            },
            "coherent" => StateKind::Coherent {
                alpha: C64::new(need(c.alpha_re, "alpha_re", &k)?, c.alpha_im.unwrap_or(0.0)),
            },
            "squeezed" | "squeezed_vacuum" => StateKind::SqueezedVacuum {
                r: need(c.r, "r", &k)?,
            },
            "fock" => StateKind::Fock {
                n: need(c.n, "n", &k)?,
            },
            "superposition" => {
                let coeffs = c
                    .coeffs
                    .as_ref()
                    .ok_or_else(|| Error::Config("state kind 'superposition' requires 'coeffs'".into()))?
                    .iter()
                    .map(Coefficient::value)
                    .collect::<Result<Vec<_>>>()?;
                StateKind::Superposition { coeffs }
            }
            "random" | "random_mixed" => StateKind::RandomMixed {
                purity_low: c.purity_low.unwrap_or(0.70),
                purity_high: c.purity_high.unwrap_or(0.95),
                seed: c.seed.unwrap_or(0),
            },
            other => return Err(Error::Config(format!("unknown state kind '{other}'"))),
        };
        let spec = StateSpec::new(kind, c.n_c);
        spec.validate()?;
        Ok(spec)
    }
}

impl From<&StateSpec> for StateConfig {
    fn from(s: &StateSpec) -> Self {
        let mut c = StateConfig {
            n_c: s.n_c,
            ..Default::default()
        };
        match &s.kind {
            StateKind::Thermal { lambda } => {
                c.kind = "thermal".into();
                c.lambda = Some(*lambda);
            }
            StateKind::Coherent { alpha } => {
                c.kind = "coherent".into();
                c.alpha_re = Some(alpha.re);
                c.alpha_im = Some(alpha.im);
            }
            StateKind::SqueezedVacuum { r } => {
                c.kind = "squeezed".into();
                c.r = Some(*r);
            }
            StateKind::Fock { n } => {
                c.kind = "fock".into();
                c.n = Some(*n);
            }
            StateKind::Superposition { coeffs } => {
                c.kind = "superposition".into();
                c.coeffs = Some(coeffs.iter().map(|&z| z.into()).collect());
            }
            StateKind::RandomMixed {
                purity_low,
                purity_high,
                seed,
            } => {
                c.kind = "random".into();
                c.purity_low = Some(*purity_low);
                c.purity_high = Some(*purity_high);
                c.seed = Some(*seed);
            }
        }
        c
    }
}

impl StateSpec {
    pub fn from_config_str(text: &str) -> Result<Self> {
        let c: StateConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        StateSpec::try_from(&c)
    }

    pub fn to_config_string(&self) -> String {
        toml::to_string(&StateConfig::from(self)).expect("state config serializes")
    }
}
