use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cvtomo::campaign::{
    run_campaign, wigner_grid, CampaignConfig, ConfigFile, GridFile, FULL_K_MAX,
};
use cvtomo::fisher::{cfi_factor_with, convergence_sweep_with, SweepAxes, MAX_CONDITION};
use cvtomo::ggm::GgmBasis;
use cvtomo::mle::{reconstruct, MleConfig};
use cvtomo::povm::build_povm;
use cvtomo::sim::{bin_distribution, sample_checkpoints, Dataset};
use cvtomo::state::{make_state_with_bound, Coefficient, StateConfig, StateSpec, DEFAULT_TRUNCATION_BOUND};
use cvtomo::{Error, GridSpec, Modality, Result};

#[derive(Parser)]
#[command(name = "cvtomo", version, about = "Homodyne vs heterodyne tomography benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a state and print a summary
    State(StateCmd),
    /// Fisher information and Cramér-Rao bound, or a grid-convergence sweep
    Cfi(CfiCmd),
    /// Sample binned measurement records
    Simulate(SimulateCmd),
    /// Maximum-likelihood reconstruction from a dataset file
    Mle(MleCmd),
    /// Run a tomography campaign
    Bench(BenchCmd),
    /// Write the Wigner function on a square grid
    Wigner(WignerCmd),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Config file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (overrides CVTOMO_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct StateArgs {
    /// thermal, coherent, squeezed, fock, superposition or random
    #[arg(long = "state", visible_alias = "kind")]
    kind: Option<String>,
    /// Thermal parameter λ in [0, 1)
    #[arg(long)]
    lambda: Option<f64>,
    /// Real part of the coherent amplitude
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Imaginary part of the coherent amplitude
    #[arg(long, allow_hyphen_values = true)]
    alpha_im: Option<f64>,
    /// Squeezing parameter
    #[arg(long)]
    r: Option<f64>,
    /// Photon number of a Fock state
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated superposition amplitudes, e.g. 1,0,0.5+0.5i
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Option<Vec<String>>,
    /// Photon-number cutoff (dimension n_c + 1)
    #[arg(long)]
    nc: Option<usize>,
    /// Lower purity bound of a random mixed state
    #[arg(long)]
    purity_low: Option<f64>,
    /// Upper purity bound of a random mixed state
    #[arg(long)]
    purity_high: Option<f64>,
    /// Seed of a random mixed state (defaults to --seed)
    #[arg(long)]
    state_seed: Option<u64>,
    /// Largest accepted truncation error
    #[arg(long)]
    truncation_bound: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct GridArgs {
    /// Left edge of the first bin
    #[arg(long, allow_hyphen_values = true)]
    x1: Option<f64>,
    /// Bin width
    #[arg(long)]
    dx: Option<f64>,
    /// Bins per axis
    #[arg(long)]
    n_bins: Option<usize>,
    /// Number of homodyne phases
    #[arg(long)]
    phases: Option<usize>,
}

#[derive(Args)]
struct StateCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    state: StateArgs,
}

#[derive(Args)]
struct CfiCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// hom or het
    #[arg(long, default_value = "hom")]
    modality: Modality,
    /// Number of state copies
    #[arg(long, default_value_t = 1)]
    copies: u64,
    /// Run the grid-convergence sweep instead of a single evaluation
    #[arg(long)]
    sweep: bool,
    /// Report the bound even when the information matrix is ill-conditioned
    #[arg(long)]
    allow_ill_conditioned: bool,
    /// Write the sweep table here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value = "hom")]
    modality: Modality,
    /// Comma-separated cumulative copy counts
    #[arg(long, value_delimiter = ',', required = true)]
    copies: Vec<u64>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write each dataset as CSV
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct MleCmd {
    #[command(flatten)]
    common: Common,
    /// Dataset file written by `simulate`
    #[arg(long)]
    data: PathBuf,
    /// Result file (JSON); stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Iteration cap
    #[arg(long)]
    max_iters: Option<usize>,
    /// Stop once the relative log-likelihood change falls below this
    #[arg(long)]
    ll_tol: Option<f64>,
    /// Initial dilution step of the fallback update
    #[arg(long)]
    dilution: Option<f64>,
}

#[derive(Args)]
struct BenchCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Restrict to one modality
    #[arg(long)]
    modality: Option<Modality>,
    /// Independent trials per checkpoint
    #[arg(long)]
    trials: Option<usize>,
    /// Largest copy count
    #[arg(long)]
    k_max: Option<u64>,
    /// Use the full 1e9-copy scale
    #[arg(long)]
    full_scale: bool,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Save every sampled dataset under data/
    #[arg(long)]
    save_datasets: bool,
}

#[derive(Args)]
struct WignerCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    state: StateArgs,
    /// Half-width of the square grid
    #[arg(long, default_value_t = 5.0)]
    span: f64,
    /// Points per axis
    #[arg(long, default_value_t = 64)]
    points: usize,
    /// Output CSV (`x,p,w`)
    #[arg(long, default_value = "wigner.csv")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::State(c) => cmd_state(c),
        Command::Cfi(c) => cmd_cfi(c),
        Command::Simulate(c) => cmd_simulate(c),
        Command::Mle(c) => cmd_mle(c),
        Command::Bench(c) => cmd_bench(c),
        Command::Wigner(c) => cmd_wigner(c),
    }
}

/// Loads the config file, if any, and sizes the worker pool.
fn setup(common: &Common) -> Result<ConfigFile> {
    let threads = match common.threads {
        Some(n) => Some(n),
        None => match std::env::var("CVTOMO_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("CVTOMO_THREADS must be an integer, got '{v}'")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::invalid("thread count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::invalid(e.to_string()))?;
    }
    match &common.config {
        Some(path) => ConfigFile::load(path).map_err(|e| e.context(path.display().to_string())),
        None => Ok(ConfigFile::default()),
    }
}

fn seed(common: &Common, file: &ConfigFile) -> u64 {
    common.seed.or(file.seed).unwrap_or(0)
}

/// State from flags when `--state` is given, otherwise from the config file.
fn state_config(args: &StateArgs, common: &Common, file: &ConfigFile) -> Result<StateConfig> {
    let Some(kind) = &args.kind else {
        let mut c = file
            .state
            .clone()
            .ok_or_else(|| Error::invalid("no state given; pass --state or a config with a [state] table"))?;
        if let Some(nc) = args.nc {
            c.n_c = nc;
        }
        return Ok(c);
    };
    let n_c = args
        .nc
        .ok_or_else(|| Error::invalid("--nc is required with --state"))?;
    Ok(StateConfig {
        kind: kind.clone(),
        lambda: args.lambda,
        alpha_re: args.alpha,
        alpha_im: args.alpha_im,
        r: args.r,
        n: args.n,
        coeffs: args
            .coeffs
            .as_ref()
            .map(|v| v.iter().map(|s| Coefficient::Complex(s.clone())).collect()),
        purity_low: args.purity_low,
        purity_high: args.purity_high,
        seed: args.state_seed.or(common.seed),
        n_c,
    })
}

fn state_spec(args: &StateArgs, common: &Common, file: &ConfigFile) -> Result<StateSpec> {
    StateSpec::try_from(&state_config(args, common, file)?)
}

fn truncation_bound(args: &StateArgs, file: &ConfigFile) -> f64 {
    args.truncation_bound
        .or(file.truncation_bound)
        .unwrap_or(DEFAULT_TRUNCATION_BOUND)
}

fn grid_file(args: &GridArgs, file: &ConfigFile) -> GridFile {
    let mut g = file.grid.clone().unwrap_or_default();
    g.x1 = args.x1.or(g.x1);
    g.dx = args.dx.or(g.dx);
    g.n_bins = args.n_bins.or(g.n_bins);
    g.n_phases = args.phases.or(g.n_phases);
    g
}

fn grid(args: &GridArgs, file: &ConfigFile, modality: Modality) -> GridSpec {
    grid_file(args, file).apply(&GridSpec::default_for(modality), modality)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_else(|| "n/a".into())
}

fn cmd_state(c: StateCmd) -> Result<()> {
    let file = setup(&c.common)?;
    let spec = state_spec(&c.state, &c.common, &file)?;
    let prepared = make_state_with_bound(&spec, truncation_bound(&c.state, &file))?;
    let rho = &prepared.rho;
    let t = GgmBasis::new(rho.dim())?.to_bloch(rho)?;
    println!("dim = {}", rho.dim());
    println!("purity = {:.12}", rho.purity());
    println!("truncation_error = {}", fmt_opt(prepared.truncation_error));
    println!("bloch_norm = {:.12}", t.norm());
    println!("min_eigenvalue = {:e}", rho.min_eigenvalue());
    Ok(())
}

fn cmd_cfi(c: CfiCmd) -> Result<()> {
    let file = setup(&c.common)?;
    let spec = state_spec(&c.state, &c.common, &file)?;
    if c.sweep {
        let report = convergence_sweep_with(&spec, c.modality, c.copies, &SweepAxes::default())?;
        match &c.out {
            Some(path) => {
                let mut w = BufWriter::new(File::create(path)?);
                report.write_csv(&mut w)?;
                w.flush()?;
            }
            None => report.write_csv(io::stdout().lock())?,
        }
        match report.selected_point() {
            Some(p) => {
                let s = p.phases.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
                eprintln!(
                    "converged at S = {s}, x1 = {}, dx = {} (Tr I^-1 = {:e})",
                    p.x1, p.dx, p.trace_inv_cfi
                );
            }
            None => eprintln!("no grid point converged"),
        }
        return Ok(());
    }
    let prepared = make_state_with_bound(&spec, truncation_bound(&c.state, &file))?;
    let rho = prepared.rho;
    let g = grid(&c.grid, &file, c.modality);
    let basis = GgmBasis::new(rho.dim())?;
    let povm = build_povm(c.modality, &g, rho.dim())?;
    let factor = cfi_factor_with(&basis, &povm, &basis.to_bloch(&rho)?, c.copies)?;
    let condition = factor.condition_number();
    if !(condition < MAX_CONDITION) && !c.allow_ill_conditioned {
        return Err(Error::IllConditioned { condition });
    }
    let tr = factor.trace_inverse()?;
    println!("modality = {}", c.modality);
    println!("copies = {}", c.copies);
    println!("condition_number = {condition:e}");
    println!("trace_inv_cfi = {tr:e}");
    println!("crlb_frobenius = {:e}", 2.0 * tr);
    Ok(())
}

fn cmd_simulate(c: SimulateCmd) -> Result<()> {
    let file = setup(&c.common)?;
    let spec = state_spec(&c.state, &c.common, &file)?;
    let rho = make_state_with_bound(&spec, truncation_bound(&c.state, &file))?.rho;
    let g = grid(&c.grid, &file, c.modality);
    let dist = bin_distribution(&rho, c.modality, &g)?;
    let sets = sample_checkpoints(&dist, &c.copies, seed(&c.common, &file))?;
    fs::create_dir_all(&c.out)?;
    for data in &sets {
        let stem = format!("{}_K{}", c.modality, data.copies);
        let path = c.out.join(format!("{stem}.cvtd"));
        data.save(&path)?;
        if c.csv {
            let mut w = BufWriter::new(File::create(c.out.join(format!("{stem}.csv")))?);
            data.write_csv(&mut w)?;
            w.flush()?;
        }
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_mle(c: MleCmd) -> Result<()> {
    let file = setup(&c.common)?;
    let data = Dataset::load(&c.data).map_err(|e| e.context(c.data.display().to_string()))?;
    let mut config = MleConfig::default();
    config.max_iters = c.max_iters.or(file.max_iters).unwrap_or(config.max_iters);
    config.ll_tol = c.ll_tol.or(file.ll_tol).unwrap_or(config.ll_tol);
    config.dilution = c.dilution.or(file.dilution).unwrap_or(config.dilution);
    let povm = build_povm(data.modality, &data.grid, data.dim)?;
    let fit = reconstruct(&data, &povm, &config)?;
    match &c.out {
        Some(path) => write_text(path, &fit.to_json())?,
        None => println!("{}", fit.to_json()),
    }
    eprintln!(
        "iterations = {}, converged = {}, log_likelihood = {:e}",
        fit.iterations, fit.converged, fit.final_ll
    );
    Ok(())
}

fn cmd_bench(c: BenchCmd) -> Result<()> {
    let mut file = setup(&c.common)?;
    if c.state.kind.is_some() || c.state.nc.is_some() {
        file.state = Some(state_config(&c.state, &c.common, &file)?);
    }
    file.grid = Some(grid_file(&c.grid, &file));
    if let Some(m) = c.modality {
        file.modalities = Some(vec![m.tag().to_string()]);
    }
    if c.full_scale {
        file.full_scale = Some(true);
        file.k_max = file.k_max.or(Some(FULL_K_MAX));
    }
    file.k_max = c.k_max.or(file.k_max);
    file.trials = c.trials.or(file.trials);
    file.seed = Some(seed(&c.common, &file));
    file.truncation_bound = c.state.truncation_bound.or(file.truncation_bound);
    if let Some(out) = &c.out {
        file.output = Some(out.display().to_string());
    }
    if c.save_datasets {
        file.save_datasets = Some(true);
    }
    let mut config = CampaignConfig::from_file(file)?;
    if config.output.is_none() {
        config.output = Some(PathBuf::from("."));
    }
    let report = run_campaign(&config)?;
    println!("modality,K,mean_frobenius_sq,crlb");
    for curve in &report.curves {
        for row in &curve.rows {
            println!("{},{},{:e},{}", curve.modality, row.copies, row.mean, fmt_opt(row.crlb));
        }
    }
    Ok(())
}

fn cmd_wigner(c: WignerCmd) -> Result<()> {
    let file = setup(&c.common)?;
    let spec = state_spec(&c.state, &c.common, &file)?;
    let w = wigner_grid(&spec, c.span, c.points, truncation_bound(&c.state, &file))?;
    let mut out = BufWriter::new(File::create(&c.out)?);
    w.write_csv(&mut out)?;
    out.flush()?;
    println!("{}", c.out.display());
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}
