//! Binned measurement distributions and seeded multinomial count records.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{heterodyne_pdf, homodyne_pdf};
use crate::grid::{GridSpec, Modality};
use crate::state::DensityMatrix;

/// Out-of-grid mass above which binning is refused.
pub const MAX_LEAK: f64 = 1e-6;

/// Per-setting bin probabilities. Homodyne has one row of `N` bins per phase;
/// heterodyne has a single row of `N²` bins in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDistribution {
    pub modality: Modality,
    pub dim: usize,
    pub grid: GridSpec,
    pub probs: Vec<Vec<f64>>,
    /// Largest per-setting mass outside the grid, before renormalization.
    pub leak: f64,
}

pub fn bin_distribution(rho: &DensityMatrix, modality: Modality, grid: &GridSpec) -> Result<BinnedDistribution> {
    grid.validate(modality)?;
    let mut probs: Vec<Vec<f64>> = match modality {
        Modality::Homodyne => grid
            .phases
            .par_iter()
            .map(|&theta| {
                (0..grid.n_bins)
                    .map(|i| homodyne_pdf(rho, theta, grid.x(i)) * grid.dx)
                    .collect()
            })
            .collect(),
        Modality::Heterodyne => {
            let cell = grid.dx * grid.dp;
            vec![(0..grid.n_bins * grid.n_bins)
                .into_par_iter()
                .map(|j| {
                    let (x, p) = grid.het_point(j);
                    heterodyne_pdf(rho, x, p) * cell
                })
                .collect()]
        }
    };
    let mut worst = 0.0f64;
    for row in &mut probs {
        let leak = 1.0 - row.iter().sum::<f64>();
        if !(leak.abs() < MAX_LEAK) {
            return Err(Error::ExcessiveLeakage { leak });
        }
        let scale = 1.0 / (1.0 - leak);
        row.iter_mut().for_each(|p| *p *= scale);
        if leak.abs() > worst.abs() {
            worst = leak;
        }
    }
    Ok(BinnedDistribution {
        modality,
        dim: rho.dim(),
        grid: grid.clone(),
        probs,
        leak: worst,
    })
}

impl BinnedDistribution {
    pub fn settings(&self) -> usize {
        self.probs.len()
    }

    pub fn bins_per_setting(&self) -> usize {
        self.probs.first().map_or(0, Vec::len)
    }

    fn check_copies(&self, k: u64) -> Result<u64> {
        if k == 0 {
            return Err(Error::invalid("number of copies must be positive"));
        }
        let s = self.settings() as u64;
        if k % s != 0 {
            return Err(Error::invalid(format!(
                "K = {k} is not divisible by the number of phases S = {s}"
            )));
        }
        Ok(k / s)
    }
}

/// Integer counts per bin, flattened setting-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub modality: Modality,
    pub dim: usize,
    pub grid: GridSpec,
    pub counts: Vec<u64>,
    pub copies: u64,
    pub seed: u64,
}

/// Random stream for one setting of one dataset.
fn setting_rng(seed: u64, setting: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(setting as u64);
    rng
}

/// Adds one multinomial draw of `n` trials over `probs` to `counts`, as a
/// chain of binomials on the remaining mass. Memory is independent of `n`.
pub fn multinomial_into<R: rand::Rng + ?Sized>(probs: &[f64], n: u64, rng: &mut R, counts: &mut [u64]) {
    debug_assert_eq!(probs.len(), counts.len());
    // tail[i] = Σ_{k >= i} p_k, summed from the small end
    let mut tail = vec![0.0; probs.len() + 1];
    for i in (0..probs.len()).rev() {
        tail[i] = tail[i + 1] + probs[i];
    }
    let last = probs.iter().rposition(|&p| p > 0.0);
    let mut left = n;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let draw = if Some(i) == last {
            left
        } else {
            let q = (p / tail[i]).clamp(0.0, 1.0);
            Binomial::new(left, q).expect("valid binomial").sample(rng)
        };
        counts[i] += draw;
        left -= draw;
    }
}

/// Draws `K` copies (`K/S` per phase for homodyne).
pub fn sample_counts(dist: &BinnedDistribution, copies: u64, seed: u64) -> Result<Dataset> {
    Ok(sample_checkpoints(dist, &[copies], seed)?.pop().expect("one checkpoint"))
}

/// Cumulative datasets at each `K` in `checkpoints`: the record at `K_j` is
/// the record at `K_{j-1}` plus an independent draw of `K_j - K_{j-1}` copies.
pub fn sample_checkpoints(dist: &BinnedDistribution, checkpoints: &[u64], seed: u64) -> Result<Vec<Dataset>> {
    if checkpoints.is_empty() {
        return Err(Error::invalid("no checkpoints requested"));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("checkpoints must be strictly increasing"));
    }
    let per: Vec<u64> = checkpoints
        .iter()
        .map(|&k| dist.check_copies(k))
        .collect::<Result<_>>()?;
    let nb = dist.bins_per_setting();
    // rows[s][c] = counts of setting s at checkpoint c
    let rows: Vec<Vec<Vec<u64>>> = dist
        .probs
        .par_iter()
        .enumerate()
        .map(|(s, probs)| {
            let mut rng = setting_rng(seed, s);
            let mut acc = vec![0u64; nb];
            let mut prev = 0;
            per.iter()
                .map(|&k| {
                    multinomial_into(probs, k - prev, &mut rng, &mut acc);
                    prev = k;
                    acc.clone()
                })
                .collect()
        })
        .collect();
    Ok(checkpoints
        .iter()
        .enumerate()
        .map(|(c, &k)| Dataset {
            modality: dist.modality,
            dim: dist.dim,
            grid: dist.grid.clone(),
            counts: rows.iter().flat_map(|r| r[c].iter().copied()).collect(),
            copies: k,
            seed,
        })
        .collect())
}

const MAGIC: &[u8; 4] = b"CVTD";
const VERSION: u32 = 1;

impl Dataset {
    pub fn settings(&self) -> usize {
        self.grid.settings(self.modality)
    }

    pub fn bins_per_setting(&self) -> usize {
        self.grid.bins_per_setting(self.modality)
    }

    pub fn setting_counts(&self, s: usize) -> &[u64] {
        let n = self.bins_per_setting();
        &self.counts[s * n..(s + 1) * n]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Little-endian binary layout: magic `CVTD`, version, modality byte,
    /// `d`, `x1`, `dx`, `N`, `p1`, `dp`, `S`, the `S` phases, `K`, seed,
    /// count length, then the counts as `u64`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&[match self.modality {
            Modality::Homodyne => 0u8,
            Modality::Heterodyne => 1u8,
        }])?;
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        let g = &self.grid;
        w.write_all(&g.x1.to_le_bytes())?;
        w.write_all(&g.dx.to_le_bytes())?;
        w.write_all(&(g.n_bins as u64).to_le_bytes())?;
        w.write_all(&g.p1.to_le_bytes())?;
        w.write_all(&g.dp.to_le_bytes())?;
        w.write_all(&(g.phases.len() as u64).to_le_bytes())?;
        for th in &g.phases {
            w.write_all(&th.to_le_bytes())?;
        }
        w.write_all(&self.copies.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.counts.len() as u64).to_le_bytes())?;
        for c in &self.counts {
            w.write_all(&c.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Dataset> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::invalid("not a dataset file (bad magic)"));
        }
        let version = u32::from_le_bytes(read_array(&mut r)?);
        if version != VERSION {
            return Err(Error::invalid(format!("unsupported dataset version {version}")));
        }
        let [tag] = read_array::<1>(&mut r)?;
        let modality = match tag {
            0 => Modality::Homodyne,
            1 => Modality::Heterodyne,
            t => return Err(Error::invalid(format!("bad modality tag {t}"))),
        };
        let u = |r: &mut R| -> Result<u64> { Ok(u64::from_le_bytes(read_array(r)?)) };
        let f = |r: &mut R| -> Result<f64> { Ok(f64::from_le_bytes(read_array(r)?)) };
        let dim = u(&mut r)? as usize;
        let x1 = f(&mut r)?;
        let dx = f(&mut r)?;
        let n_bins = u(&mut r)? as usize;
        let p1 = f(&mut r)?;
        let dp = f(&mut r)?;
        let n_phases = u(&mut r)? as usize;
        let phases = (0..n_phases).map(|_| f(&mut r)).collect::<Result<Vec<_>>>()?;
        let copies = u(&mut r)?;
        let seed = u(&mut r)?;
        let len = u(&mut r)? as usize;
        let grid = GridSpec {
            x1,
            dx,
            n_bins,
            phases,
            p1,
            dp,
        };
        grid.validate(modality)?;
        let expected = grid.settings(modality) * grid.bins_per_setting(modality);
        if len != expected {
            return Err(Error::DimensionMismatch { expected, got: len });
        }
        let counts = (0..len).map(|_| u(&mut r)).collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            modality,
            dim,
            grid,
            counts,
            copies,
            seed,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_binary(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Dataset> {
        Dataset::read_binary(BufReader::new(File::open(path)?))
    }

    /// Rows `phase,bin_index,count`; heterodyne rows use phase 0 and the
    /// flattened bin index.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "phase,bin_index,count")?;
        let n = self.bins_per_setting();
        for (j, c) in self.counts.iter().enumerate() {
            writeln!(w, "{},{},{}", j / n, j % n, c)?;
        }
        Ok(())
    }
}

fn read_array<const N: usize>(r: &mut impl Read) -> io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}
