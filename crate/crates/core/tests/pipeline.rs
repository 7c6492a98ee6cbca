use std::fs;

use cvtomo::campaign::{run_campaign, CampaignConfig};
use cvtomo::fisher::{cfi_factor, crlb_frobenius, cfi};
use cvtomo::fock::wigner;
use cvtomo::ggm::GgmBasis;
use cvtomo::grid::{GridSpec, Modality};
use cvtomo::mle::{reconstruct, MleConfig};
use cvtomo::povm::build_povm;
use cvtomo::sim::{bin_distribution, sample_counts};
use cvtomo::state::{random_mixed, DensityMatrix, StateKind, StateSpec};
use cvtomo::Error;
use num_complex::Complex64 as C64;

#[test]
fn vacuum_homodyne_reconstruction_fidelity() {
    let grid = GridSpec::default_homodyne();
    let rho = DensityMatrix::fock(0, 11);
    let dist = bin_distribution(&rho, Modality::Homodyne, &grid).unwrap();
    let data = sample_counts(&dist, 1_000_000, 42).unwrap();
    let povm = build_povm(Modality::Homodyne, &grid, 11).unwrap();
    let fit = reconstruct(&data, &povm, &MleConfig::default()).unwrap();
    let fidelity = fit.rho_hat.matrix()[(0, 0)].re;
    assert!(fidelity > 0.999, "fidelity {fidelity}");
}

#[test]
fn thermal_homodyne_error_tracks_bound() {
    let mut cfg = CampaignConfig::new(StateSpec::new(StateKind::Thermal { lambda: 0.5 }, 10));
    cfg.modalities = vec![Modality::Homodyne];
    cfg.k_max = 1_000_000;
    cfg.checkpoints = vec![10_000, 100_000, 1_000_000];
    cfg.trials = 10;
    cfg.seed = 3;
    let report = run_campaign(&cfg).unwrap();
    let last = report.curves[0].rows.last().unwrap();
    let ratio = last.mean / last.crlb.unwrap();
    assert!((1.0 / 3.0..=3.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn homodyne_bound_below_heterodyne_on_converged_grid() {
    let rho = random_mixed(3, 0.7, 0.95, 6);
    let t = GgmBasis::new(3).unwrap().to_bloch(&rho).unwrap();
    let hom = crlb_frobenius(&cfi(&t, Modality::Homodyne, &GridSpec::symmetric(-5.0, 0.1, 500), 1).unwrap()).unwrap();
    let het = crlb_frobenius(&cfi(&t, Modality::Heterodyne, &GridSpec::symmetric(-5.0, 0.1, 0), 1).unwrap()).unwrap();
    assert!(hom < het, "hom {hom} het {het}");
}

#[test]
fn pure_state_bound_needs_the_factorized_route() {
    let t = GgmBasis::new(11).unwrap().to_bloch(&DensityMatrix::fock(5, 11)).unwrap();
    let grid = GridSpec::default_heterodyne();
    let normal = cfi(&t, Modality::Heterodyne, &grid, 1).unwrap();
    assert!(matches!(crlb_frobenius(&normal), Err(Error::IllConditioned { .. })));
    let factor = cfi_factor(&t, Modality::Heterodyne, &grid, 1).unwrap();
    assert!(factor.trace_inverse().unwrap().is_finite());
}

#[test]
fn coherent_wigner_peak_sits_at_the_amplitude() {
    // α = x + ip in units where W peaks at (√2 Re α, √2 Im α)
    let alpha = C64::new(0.5, 1.0);
    let amps: Vec<C64> = (0..30).map(|n| cvtomo::fock::coherent_overlap(n, alpha)).collect();
    let rho = DensityMatrix::pure(&amps).unwrap();
    let s2 = 2f64.sqrt();
    let peak = wigner(&rho, s2 * alpha.re, s2 * alpha.im);
    assert!((peak - std::f64::consts::FRAC_1_PI).abs() < 1e-12);
    assert!(wigner(&rho, s2 * alpha.re, -s2 * alpha.im) < 1e-2);
}

#[test]
fn failed_campaign_keeps_finished_modalities() {
    let dir = tempfile::tempdir().unwrap();
    // wide enough for homodyne, too narrow for heterodyne: the second
    // modality fails on leakage after the first has been written
    let mut cfg = CampaignConfig::new(StateSpec::new(StateKind::Fock { n: 2 }, 3));
    cfg.hom_grid = GridSpec::new(-7.0, 0.2, 71, 10);
    cfg.het_grid = GridSpec::new(-2.0, 0.2, 21, 0);
    cfg.k_max = 10_000;
    cfg.checkpoints = vec![1000, 10_000];
    cfg.trials = 2;
    cfg.output = Some(dir.path().to_path_buf());
    let err = run_campaign(&cfg).unwrap_err();
    assert!(err.is_numerical(), "{err}");
    let csv = fs::read_to_string(dir.path().join("errors_hom.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
}
