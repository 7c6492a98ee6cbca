use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cvtomo(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvtomo"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const CAMPAIGN: &str = r#"
modalities = ["hom", "het"]
checkpoints = [1000, 10000]
k_max = 10000
trials = 2
seed = 11

[state]
kind = "random"
purity_low = 0.75
purity_high = 0.85
seed = 3
n_c = 1

[grid]
x1 = -6.0
dx = 0.2
n_bins = 61
n_phases = 10
"#;

#[test]
fn coherent_beyond_cutoff_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = cvtomo(&["state", "--kind", "coherent", "--alpha", "5", "--nc", "10"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
}

#[test]
fn unknown_flag_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = cvtomo(&["cfi", "--no-such-flag"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn state_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = cvtomo(&["state", "--state", "fock", "--n", "5", "--nc", "10"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("dim = 11"));
    assert!(text.contains("purity = 1.000000000000"));
}

#[test]
fn pure_state_information_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["cfi", "--state", "fock", "--n", "5", "--nc", "10", "--modality", "het"];
    let o = cvtomo(&args, dir.path());
    assert_eq!(o.status.code(), Some(2));
    let mut forced = args.to_vec();
    forced.push("--allow-ill-conditioned");
    let o = cvtomo(&forced, dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("crlb_frobenius"));
}

#[test]
fn thermal_sweep_converges_early() {
    let dir = tempfile::tempdir().unwrap();
    let o = cvtomo(
        &["cfi", "--state", "thermal", "--lambda", "0.5", "--nc", "2", "--modality", "hom", "--sweep"],
        dir.path(),
    );
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("S,x1,dx,trace_inv_cfi,max_neighbor_pct_err,converged"));
    assert_eq!(text.lines().count(), 1 + 125);
    let summary = String::from_utf8_lossy(&o.stderr).into_owned();
    assert!(summary.contains("converged at"), "{summary}");
}

#[test]
fn simulate_then_reconstruct() {
    let dir = tempfile::tempdir().unwrap();
    let o = cvtomo(
        &[
            "simulate", "--state", "random", "--nc", "2", "--modality", "het", "--x1", "-6", "--dx", "0.25",
            "--n-bins", "48", "--copies", "2000,20000", "--seed", "8", "--out", "ds",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("ds/het_K2000.cvtd").exists());
    let o = cvtomo(&["mle", "--data", "ds/het_K20000.cvtd", "--out", "fit.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json = fs::read_to_string(dir.path().join("fit.json")).unwrap();
    assert!(json.contains("\"dim\": 3"));
}

#[test]
fn bench_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("camp.cfg"), CAMPAIGN).unwrap();
    let a = cvtomo(&["bench", "--config", "camp.cfg", "--out", "a", "--threads", "4"], dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = cvtomo(&["bench", "--config", "camp.cfg", "--out", "b", "--threads", "1"], dir.path());
    assert!(b.status.success());
    for f in ["errors_hom.csv", "errors_het.csv", "manifest.json"] {
        let x = fs::read(dir.path().join("a").join(f)).unwrap();
        let y = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let csv = fs::read_to_string(dir.path().join("a/errors_hom.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn bad_config_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), CAMPAIGN.replace("checkpoints = [1000, 10000]", "checkpoints = [1005]"))
        .unwrap();
    let o = cvtomo(&["bench", "--config", "bad.cfg", "--out", "x"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn thread_env_var_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cvtomo"))
        .args(["state", "--state", "fock", "--n", "0", "--nc", "1"])
        .env("CVTOMO_THREADS", "many")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn wigner_grid_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = cvtomo(&["wigner", "--state", "fock", "--n", "0", "--nc", "1", "--points", "16"], dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("wigner.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 256);
}
