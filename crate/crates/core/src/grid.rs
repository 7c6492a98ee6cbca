//! Discretization of quadrature space.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Detection scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modality {
    #[serde(rename = "hom")]
    Homodyne,
    #[serde(rename = "het")]
    Heterodyne,
}

impl Modality {
    pub fn tag(self) -> &'static str {
        match self {
            Modality::Homodyne => "hom",
            Modality::Heterodyne => "het",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hom" | "homodyne" => Ok(Modality::Homodyne),
            "het" | "heterodyne" => Ok(Modality::Heterodyne),
            other => Err(Error::invalid(format!("unknown modality '{other}'"))),
        }
    }
}

/// Bin layout shared by both detection schemes.
///
/// Bin centers sit at `x1 + i*dx` for `i in 0..n_bins` (and likewise on the
/// `p` axis). `phases` holds the local-oscillator angles used for homodyne
/// detection and is ignored for heterodyne.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x1: f64,
    pub dx: f64,
    pub n_bins: usize,
    #[serde(default)]
    pub phases: Vec<f64>,
    pub p1: f64,
    pub dp: f64,
}

impl GridSpec {
    /// Square grid with `n_phases` evenly spaced angles in `[0, 2π)`.
    pub fn new(x1: f64, dx: f64, n_bins: usize, n_phases: usize) -> Self {
        GridSpec {
            x1,
            dx,
            n_bins,
            phases: even_phases(n_phases),
            p1: x1,
            dp: dx,
        }
    }

    /// Grid spanning `[x1, -x1]` with `x_N` as close to `-x1` as the spacing
    /// allows.
    pub fn symmetric(x1: f64, dx: f64, n_phases: usize) -> Self {
        let n_bins = (-2.0 * x1 / dx).round() as usize + 1;
        GridSpec::new(x1, dx, n_bins, n_phases)
    }

    /// Simulation settings for homodyne detection: 200 bins of width 0.1005
    /// from -10 and 100 phases.
    pub fn default_homodyne() -> Self {
        GridSpec::new(-10.0, 0.1005, 200, 100)
    }

    /// Simulation settings for heterodyne detection: 200×200 bins of width
    /// 0.1005 from -10 on both axes.
    pub fn default_heterodyne() -> Self {
        GridSpec::new(-10.0, 0.1005, 200, 0)
    }

    /// Default simulation grid for a modality.
    pub fn default_for(modality: Modality) -> Self {
        match modality {
            Modality::Homodyne => GridSpec::default_homodyne(),
            Modality::Heterodyne => GridSpec::default_heterodyne(),
        }
    }

    pub fn n_phases(&self) -> usize {
        self.phases.len()
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x1 + i as f64 * self.dx
    }

    #[inline]
    pub fn p(&self, i: usize) -> f64 {
        self.p1 + i as f64 * self.dp
    }

    /// Number of measurement settings for a modality.
    pub fn settings(&self, modality: Modality) -> usize {
        match modality {
            Modality::Homodyne => self.phases.len(),
            Modality::Heterodyne => 1,
        }
    }

    /// Number of bins per setting.
    pub fn bins_per_setting(&self, modality: Modality) -> usize {
        match modality {
            Modality::Homodyne => self.n_bins,
            Modality::Heterodyne => self.n_bins * self.n_bins,
        }
    }

    /// Row-major flattening of heterodyne bins: `x` index major, `p` minor.
    #[inline]
    pub fn het_point(&self, flat: usize) -> (f64, f64) {
        (self.x(flat / self.n_bins), self.p(flat % self.n_bins))
    }

    pub fn validate(&self, modality: Modality) -> Result<()> {
        if !(self.dx > 0.0 && self.dx.is_finite()) || !self.x1.is_finite() {
            return Err(Error::invalid(format!("bad x axis: x1={}, dx={}", self.x1, self.dx)));
        }
        if self.n_bins < 2 {
            return Err(Error::invalid(format!("n_bins must be >= 2, got {}", self.n_bins)));
        }
        match modality {
            Modality::Homodyne => {
                if self.phases.is_empty() {
                    return Err(Error::invalid("homodyne grid needs at least one phase"));
                }
                for &th in &self.phases {
                    if !(0.0..TAU).contains(&th) {
                        return Err(Error::invalid(format!("phase {th} outside [0, 2pi)")));
                    }
                }
                let mut sorted = self.phases.clone();
                sorted.sort_by(f64::total_cmp);
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::invalid("phases must be distinct"));
                }
            }
            Modality::Heterodyne => {
                if !(self.dp > 0.0 && self.dp.is_finite()) || !self.p1.is_finite() {
                    return Err(Error::invalid(format!(
                        "bad p axis: p1={}, dp={}",
                        self.p1, self.dp
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `n` angles `2π k / n`, `k = 0..n`.
pub fn even_phases(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_layout() {
        let g = GridSpec::default_homodyne();
        assert_eq!(g.n_phases(), 100);
        assert!((g.x(199) - 9.9995).abs() < 1e-12);
        g.validate(Modality::Homodyne).unwrap();
        GridSpec::default_heterodyne()
            .validate(Modality::Heterodyne)
            .unwrap();
    }

    #[test]
    fn symmetric_span() {
        let g = GridSpec::symmetric(-5.0, 0.1, 500);
        assert_eq!(g.n_bins, 101);
        assert!((g.x(100) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn het_flattening_is_row_major() {
        let g = GridSpec::new(-1.0, 0.5, 5, 0);
        assert_eq!(g.het_point(0), (-1.0, -1.0));
        assert_eq!(g.het_point(1), (-1.0, -0.5));
        assert_eq!(g.het_point(5), (-0.5, -1.0));
        assert_eq!(g.het_point(24), (1.0, 1.0));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(0.0, 0.0, 10, 2).validate(Modality::Homodyne).is_err());
        assert!(GridSpec::new(0.0, 0.1, 1, 2).validate(Modality::Homodyne).is_err());
        assert!(GridSpec::new(0.0, 0.1, 10, 0).validate(Modality::Homodyne).is_err());
        let mut g = GridSpec::new(0.0, 0.1, 10, 2);
        g.phases = vec![0.3, 0.3];
        assert!(g.validate(Modality::Homodyne).is_err());
        g.phases = vec![7.0];
        assert!(g.validate(Modality::Homodyne).is_err());
    }
}
