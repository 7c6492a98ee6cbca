//! Simulated tomography campaigns: sample, reconstruct and compare the mean
//! squared Frobenius error with the Cramér-Rao bound.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{cfi_factor_with, crlb_frobenius_factored};
use crate::fock::wigner;
use crate::ggm::{frobenius_sq, GgmBasis};
use crate::grid::{GridSpec, Modality};
use crate::mle::{reconstruct, MleConfig};
use crate::povm::build_povm;
use crate::sim::{bin_distribution, sample_checkpoints};
use crate::state::{make_state_with_bound, StateConfig, StateSpec, DEFAULT_TRUNCATION_BOUND};

/// Desk-scale default for the largest copy count.
pub const DEFAULT_K_MAX: u64 = 10_000_000;
/// Full-scale copy count, opt-in.
pub const FULL_K_MAX: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub state: StateSpec,
    pub modalities: Vec<Modality>,
    pub hom_grid: GridSpec,
    pub het_grid: GridSpec,
    pub k_max: u64,
    pub checkpoints: Vec<u64>,
    pub trials: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub mle: MleConfig,
    pub truncation_bound: f64,
    pub save_datasets: bool,
}

impl CampaignConfig {
    pub fn new(state: StateSpec) -> Self {
        let hom_grid = GridSpec::default_homodyne();
        let checkpoints = log_checkpoints(100, DEFAULT_K_MAX, 10, hom_grid.n_phases() as u64);
        CampaignConfig {
            state,
            modalities: vec![Modality::Homodyne, Modality::Heterodyne],
            hom_grid,
            het_grid: GridSpec::default_heterodyne(),
            k_max: DEFAULT_K_MAX,
            checkpoints,
            trials: 10,
            seed: 0,
            output: None,
            mle: MleConfig::default(),
            truncation_bound: DEFAULT_TRUNCATION_BOUND,
            save_datasets: false,
        }
    }

    pub fn grid(&self, modality: Modality) -> &GridSpec {
        match modality {
            Modality::Homodyne => &self.hom_grid,
            Modality::Heterodyne => &self.het_grid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.state.validate()?;
        self.mle.validate()?;
        if self.modalities.is_empty() {
            return Err(Error::Config("no modalities selected".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::Config("no checkpoints".into()));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("checkpoints must be strictly increasing".into()));
        }
        if self.checkpoints.iter().any(|&k| k == 0 || k > self.k_max) {
            return Err(Error::Config(format!("checkpoints must lie in 1..={}", self.k_max)));
        }
        for &m in &self.modalities {
            self.grid(m).validate(m)?;
        }
        if self.modalities.contains(&Modality::Homodyne) {
            let s = self.hom_grid.n_phases() as u64;
            if let Some(k) = self.checkpoints.iter().find(|&&k| k % s != 0) {
                return Err(Error::Config(format!(
                    "homodyne checkpoint {k} is not divisible by S = {s}"
                )));
            }
        }
        Ok(())
    }

    /// Parses the key/value config format (TOML). Omitted keys take the
    /// defaults of [`CampaignConfig::new`].
    pub fn from_config_str(text: &str) -> Result<Self> {
        Self::from_file(ConfigFile::parse(text)?)
    }

    pub fn from_file(file: ConfigFile) -> Result<Self> {
        let state = file
            .state
            .as_ref()
            .ok_or_else(|| Error::Config("missing [state] table".into()))?;
        let mut cfg = CampaignConfig::new(StateSpec::try_from(state)?);
        if let Some(m) = &file.modalities {
            cfg.modalities = m.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if let Some(g) = &file.grid {
            cfg.hom_grid = g.apply(&cfg.hom_grid, Modality::Homodyne);
            cfg.het_grid = g.apply(&cfg.het_grid, Modality::Heterodyne);
        }
        if file.full_scale.unwrap_or(false) {
            cfg.k_max = FULL_K_MAX;
        }
        if let Some(k) = file.k_max {
            cfg.k_max = k;
        }
        let step = if cfg.modalities.contains(&Modality::Homodyne) {
            cfg.hom_grid.n_phases() as u64
        } else {
            1
        };
        cfg.checkpoints = match file.checkpoints {
            Some(c) => c,
            None => log_checkpoints(100, cfg.k_max, file.points_per_decade.unwrap_or(10), step),
        };
        if let Some(e) = file.trials {
            cfg.trials = e;
        }
        if let Some(s) = file.seed {
            cfg.seed = s;
        }
        cfg.output = file.output.as_ref().map(PathBuf::from);
        if let Some(v) = file.max_iters {
            cfg.mle.max_iters = v;
        }
        if let Some(v) = file.ll_tol {
            cfg.mle.ll_tol = v;
        }
        if let Some(v) = file.dilution {
            cfg.mle.dilution = v;
        }
        if let Some(v) = file.truncation_bound {
            cfg.truncation_bound = v;
        }
        cfg.save_datasets = file.save_datasets.unwrap_or(false);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_config_str(&fs::read_to_string(path)?)
    }
}

/// Raw contents of a config file; every key is optional.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub state: Option<StateConfig>,
    pub modalities: Option<Vec<String>>,
    pub grid: Option<GridFile>,
    pub k_max: Option<u64>,
    pub full_scale: Option<bool>,
    pub checkpoints: Option<Vec<u64>>,
    pub points_per_decade: Option<u32>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<String>,
    pub max_iters: Option<usize>,
    pub ll_tol: Option<f64>,
    pub dilution: Option<f64>,
    pub truncation_bound: Option<f64>,
    pub save_datasets: Option<bool>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub x1: Option<f64>,
    pub dx: Option<f64>,
    pub n_bins: Option<usize>,
    pub n_phases: Option<usize>,
    pub p1: Option<f64>,
    pub dp: Option<f64>,
}

impl GridFile {
    /// `base` with the keys present here replaced. The p axis follows the x
    /// axis unless given explicitly.
    pub fn apply(&self, base: &GridSpec, modality: Modality) -> GridSpec {
        let x1 = self.x1.unwrap_or(base.x1);
        let dx = self.dx.unwrap_or(base.dx);
        let n = self.n_bins.unwrap_or(base.n_bins);
        let s = match modality {
            Modality::Homodyne => self.n_phases.unwrap_or(base.n_phases()),
            Modality::Heterodyne => 0,
        };
        let mut g = GridSpec::new(x1, dx, n, s);
        g.p1 = self.p1.unwrap_or(x1);
        g.dp = self.dp.unwrap_or(dx);
        g
    }
}

/// `per_decade` log-spaced copy counts from `k_min` to `k_max`, rounded to
/// multiples of `step` and deduplicated.
pub fn log_checkpoints(k_min: u64, k_max: u64, per_decade: u32, step: u64) -> Vec<u64> {
    let step = step.max(1);
    let lo = (k_min as f64).log10();
    let hi = (k_max as f64).log10();
    let n = ((hi - lo) * per_decade as f64).round() as i64;
    let mut out: Vec<u64> = (0..=n.max(0))
        .map(|i| {
            let k = 10f64.powf(lo + i as f64 / per_decade as f64);
            ((k / step as f64).round() as u64).max(1) * step
        })
        .filter(|&k| k <= k_max)
        .collect();
    out.dedup();
    out
}

/// Seed of trial `trial` derived from the campaign seed (SplitMix64 mix).
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut z = seed ^ (trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointRow {
    pub copies: u64,
    pub trial_errors: Vec<f64>,
    pub mean: f64,
    /// `2 Tr 𝓘⁻¹` at this copy count; `None` when the information matrix is
    /// singular. See [`ErrorCurve::cfi_condition`] for its reliability.
    pub crlb: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorCurve {
    pub modality: Modality,
    /// `2 Tr 𝓘⁻¹` for a single copy, from the factorized information.
    pub crlb_single_copy: Option<f64>,
    /// Condition number of `𝓘`. Pure ground truths routinely exceed
    /// [`MAX_CONDITION`](crate::fisher::MAX_CONDITION).
    pub cfi_condition: f64,
    pub rows: Vec<CheckpointRow>,
    /// Reconstructions that exhausted the iteration budget.
    pub unconverged: usize,
}

impl ErrorCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "K,trial,frobenius_sq,mean_frobenius_sq,crlb")?;
        for row in &self.rows {
            let crlb = row.crlb.map(|c| format!("{c:e}")).unwrap_or_else(|| "nan".into());
            for (e, err) in row.trial_errors.iter().enumerate() {
                writeln!(w, "{},{},{:e},{:e},{}", row.copies, e + 1, err, row.mean, crlb)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub purity: f64,
    pub truncation_error: Option<f64>,
    pub curves: Vec<ErrorCurve>,
}

impl CampaignReport {
    pub fn curve(&self, modality: Modality) -> Option<&ErrorCurve> {
        self.curves.iter().find(|c| c.modality == modality)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    state: StateConfig,
    modalities: Vec<Modality>,
    hom_grid: &'a GridSpec,
    het_grid: &'a GridSpec,
    k_max: u64,
    checkpoints: &'a [u64],
    trials: usize,
    seed: u64,
    trial_seeds: Vec<u64>,
    mle: MleConfig,
    truncation_bound: f64,
    purity: f64,
    truncation_error: Option<f64>,
    curves: Vec<ManifestCurve>,
}

#[derive(Serialize)]
struct ManifestCurve {
    modality: Modality,
    file: String,
    crlb_single_copy: Option<f64>,
    cfi_condition: f64,
    unconverged: usize,
}

/// Runs every modality of the campaign. With an output directory set, writes
/// `errors_<modality>.csv`, `manifest.json` and (optionally) datasets under
/// `data/`. Rows from finished trials are written before a failure is
/// returned.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignReport> {
    config.validate()?;
    let prepared = make_state_with_bound(&config.state, config.truncation_bound)?;
    let rho = prepared.rho;
    let d = rho.dim();
    let basis = GgmBasis::new(d)?;
    let t = basis.to_bloch(&rho)?;
    if let Some(dir) = &config.output {
        fs::create_dir_all(dir)?;
        if config.save_datasets {
            fs::create_dir_all(dir.join("data"))?;
        }
    }

    let mut curves = Vec::new();
    for &modality in &config.modalities {
        let grid = config.grid(modality);
        let povm = build_povm(modality, grid, d)?;
        let info = cfi_factor_with(&basis, &povm, &t, 1).map_err(|e| e.context(format!("{modality} CFI")))?;
        let cfi_condition = info.condition_number();
        let crlb_single_copy = match crlb_frobenius_factored(&info) {
            Ok(v) => Some(v),
            Err(Error::IllConditioned { .. }) => None,
            Err(e) => return Err(e),
        };
        let dist = bin_distribution(&rho, modality, grid).map_err(|e| e.context(format!("{modality} binning")))?;

        let outcomes: Vec<Result<(Vec<f64>, usize)>> = (0..config.trials)
            .into_par_iter()
            .map(|e| {
                let seed = trial_seed(config.seed, e);
                let sets = sample_checkpoints(&dist, &config.checkpoints, seed)
                    .map_err(|err| err.context(format!("{modality} trial {}", e + 1)))?;
                let mut errors = Vec::with_capacity(sets.len());
                let mut unconverged = 0;
                for data in &sets {
                    let ctx = || format!("{modality} trial {} checkpoint K={}", e + 1, data.copies);
                    if config.save_datasets {
                        if let Some(dir) = &config.output {
                            let name = format!("{modality}_trial{}_K{}.cvtd", e + 1, data.copies);
                            data.save(&dir.join("data").join(name)).map_err(|err| err.context(ctx()))?;
                        }
                    }
                    let fit = reconstruct(data, &povm, &config.mle).map_err(|err| err.context(ctx()))?;
                    if !fit.converged {
                        unconverged += 1;
                    }
                    errors.push(frobenius_sq(&fit.rho_hat, &rho)?);
                }
                Ok((errors, unconverged))
            })
            .collect();

        let mut failure = None;
        let mut per_trial = Vec::new();
        let mut unconverged = 0;
        for o in outcomes {
            match o {
                Ok((errs, u)) => {
                    per_trial.push(errs);
                    unconverged += u;
                }
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }
        let rows = config
            .checkpoints
            .iter()
            .enumerate()
            .map(|(c, &k)| {
                let trial_errors: Vec<f64> = per_trial.iter().map(|errs| errs[c]).collect();
                let mean = trial_errors.iter().sum::<f64>() / trial_errors.len().max(1) as f64;
                CheckpointRow {
                    copies: k,
                    trial_errors,
                    mean,
                    crlb: crlb_single_copy.map(|v| v / k as f64),
                }
            })
            .collect();
        let curve = ErrorCurve {
            modality,
            crlb_single_copy,
            cfi_condition,
            rows,
            unconverged,
        };
        if let Some(dir) = &config.output {
            write_curve(dir, &curve)?;
        }
        curves.push(curve);
        if let Some(e) = failure {
            return Err(e);
        }
    }

    let report = CampaignReport {
        purity: rho.purity(),
        truncation_error: prepared.truncation_error,
        curves,
    };
    if let Some(dir) = &config.output {
        write_manifest(dir, config, &report)?;
    }
    Ok(report)
}

fn write_curve(dir: &Path, curve: &ErrorCurve) -> Result<()> {
    let mut w = BufWriter::new(File::create(dir.join(format!("errors_{}.csv", curve.modality)))?);
    curve.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_manifest(dir: &Path, config: &CampaignConfig, report: &CampaignReport) -> Result<()> {
    let manifest = Manifest {
        tool: "cvtomo",
        version: env!("CARGO_PKG_VERSION"),
        state: StateConfig::from(&config.state),
        modalities: config.modalities.clone(),
        hom_grid: &config.hom_grid,
        het_grid: &config.het_grid,
        k_max: config.k_max,
        checkpoints: &config.checkpoints,
        trials: config.trials,
        seed: config.seed,
        trial_seeds: (0..config.trials).map(|e| trial_seed(config.seed, e)).collect(),
        mle: config.mle,
        truncation_bound: config.truncation_bound,
        purity: report.purity,
        truncation_error: report.truncation_error,
        curves: report
            .curves
            .iter()
            .map(|c| ManifestCurve {
                modality: c.modality,
                file: format!("errors_{}.csv", c.modality),
                crlb_single_copy: c.crlb_single_copy,
                cfi_condition: c.cfi_condition,
                unconverged: c.unconverged,
            })
            .collect(),
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

/// Wigner function sampled on an `n × n` grid.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    /// Coordinates shared by both axes.
    pub axis: Vec<f64>,
    /// `values[i][j] = W(axis[i], axis[j])`.
    pub values: Vec<Vec<f64>>,
}

impl WignerGrid {
    pub fn cell_area(&self) -> f64 {
        let h = self.axis[1] - self.axis[0];
        h * h
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,p,w")?;
        for (i, &x) in self.axis.iter().enumerate() {
            for (j, &p) in self.axis.iter().enumerate() {
                writeln!(w, "{x:e},{p:e},{:e}", self.values[i][j])?;
            }
        }
        Ok(())
    }
}

/// Samples `W` at `-span + k·(2 span / n)`, `k = 0..n`; even `n` puts a node
/// on the origin.
pub fn wigner_grid(spec: &StateSpec, span: f64, n_points: usize, truncation_bound: f64) -> Result<WignerGrid> {
    if n_points < 16 {
        return Err(Error::invalid(format!("need at least 16 grid points, got {n_points}")));
    }
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::invalid(format!("span must be positive, got {span}")));
    }
    let rho = make_state_with_bound(spec, truncation_bound)?.rho;
    let h = 2.0 * span / n_points as f64;
    let axis: Vec<f64> = (0..n_points).map(|k| -span + k as f64 * h).collect();
    let values = axis
        .par_iter()
        .map(|&x| axis.iter().map(|&p| wigner(&rho, x, p)).collect())
        .collect();
    Ok(WignerGrid { axis, values })
}

/// Writes the Wigner grid of `spec` as CSV (`x,p,w`).
pub fn emit_wigner_grid(spec: &StateSpec, span: f64, n_points: usize, path: &Path) -> Result<WignerGrid> {
    let grid = wigner_grid(spec, span, n_points, DEFAULT_TRUNCATION_BOUND)?;
    let mut w = BufWriter::new(File::create(path)?);
    grid.write_csv(&mut w)?;
    w.flush()?;
    Ok(grid)
}
