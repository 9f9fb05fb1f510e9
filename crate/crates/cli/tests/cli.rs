use std::path::Path;
use std::process::{Command, Output};

fn mixlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixlab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const QUICK: &str = r#"
coeffs = [1.0, 0.0, -1.0]
nu_list = [1e-2, 1e-3, 1e-4, 1e-5]
k = 1.0
grid_size = 48
lambda_samples = 33
trials = 2
"#;

#[test]
fn order_reports_m2_for_poiseuille() {
    let dir = tempfile::tempdir().unwrap();
    let out = mixlab(&["order", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "m=2");
    let csv = std::fs::read_to_string(dir.path().join("order.csv")).unwrap();
    assert!(csv.starts_with("m,order_cap,radius\n2,"));
}

#[test]
fn order_reports_m1_for_linear_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "coeffs = [0.0, 1.0]\nnu_list = [1e-3]\n");
    let out = mixlab(&["order", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "m=1");
}

#[test]
fn sweep_has_one_row_per_nu_and_summary_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    let out = mixlab(&["sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap(), "--plot"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], "nu,k,ell,m,Lambda,rate,c_effective,psi,alpha");
    assert!(lines[5].starts_with(",,,,,,,,"));
    assert!(dir.path().join("sweep.svg").exists());
    assert!(dir.path().join("sweep_summary.csv").exists());
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = write_config(a.path(), QUICK);
    for dir in [&a, &b] {
        let out = mixlab(&["decay", "--config", &cfg, "--out", dir.path().to_str().unwrap(), "--seed", "7"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["decay_0.csv", "decay_3.csv", "decay_fit_1.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn every_csv_has_a_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    let d = dir.path().to_str().unwrap();
    for cmd in ["levelset", "psa", "dispersion"] {
        let out = mixlab(&[cmd, "--config", &cfg, "--out", d, "--plot"]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let first = |name: &str| {
        std::fs::read_to_string(dir.path().join(name)).unwrap().lines().next().unwrap().to_string()
    };
    assert_eq!(first("levelset.csv"), "lambda,delta,measure_E,measure_Etilde,total_cover_length,cover_count");
    assert_eq!(first("psa.csv"), "nu,k,ell,m,psi,argmin,c1_effective");
    assert_eq!(first("psa_curve_0.csv"), "lambda,sigma_min");
    assert_eq!(first("dispersion_0.csv"), "t,I_low,I_high,envelope,ratio");
    assert_eq!(first("dispersion_summary.csv"), "nu,m,c1,c2,C2_fit,max_ratio");
    assert!(dir.path().join("levelset.svg").exists());
    assert!(dir.path().join("dispersion_3.svg").exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "coeffs = [1.0, 0.0, -1.0]\nnu_list = []\n");
    let out = mixlab(&["order", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: ConfigError: "));

    let out = mixlab(&["order", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computation_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "coeffs = [1.0]\nnu_list = [1e-3]\n");
    let out = mixlab(&["order", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: NoValidOrder: "));

    let cfg = write_config(dir.path(), "coeffs = [1.0, 0.0, -1.0]\nnu_list = [1e-3, 1e-4]\n");
    let out = mixlab(&["sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: WindowTooSmall: "));
}

#[test]
fn verify_default_config_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let default = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.toml");
    let out = mixlab(&["verify", "--config", default.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert_eq!(csv.lines().count(), 19);
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,")));
}
