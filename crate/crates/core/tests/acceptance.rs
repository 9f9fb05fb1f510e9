//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to the
//! uncaptured stdout, so the lines appear in plain `cargo test` output.

use std::io::Write;
use std::time::Instant;

use mixlab::checks::{covering_constants, covering_uniform, laplacian_bessel_errors};
use mixlab::dispersion::{log_grid, verify_dispersion};
use mixlab::operator::weighted_norm;
use mixlab::pseudospectral::{default_refine_tol, pseudo_abscissa, verify_away_bound, verify_near_bound};
use mixlab::sampling::{derive_seed, random_smooth, rng_from_seed};
use mixlab::semigroup::{
    disc_decay, lambda_rate, log_times, propagate, scaling_sweep, trial_data, uniform_times, wei_bound_check,
    worst_case_rate, DecaySettings, Geometry,
};
use mixlab::{assemble_operator, build_grid, ModeOperator, VelocityProfile, C64};

fn line(id: u32, passed: bool, detail: &str) -> bool {
    let verdict = if passed { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{verdict} criterion {id}: {detail}");
    let _ = out.flush();
    passed
}

fn poiseuille() -> VelocityProfile {
    VelocityProfile::new(vec![1.0, 0.0, -1.0], 1.0).unwrap()
}

fn linear() -> VelocityProfile {
    VelocityProfile::new(vec![0.0, 1.0], 1.0).unwrap()
}

fn quartic() -> VelocityProfile {
    VelocityProfile::new(vec![1.0, 0.0, 0.0, 0.0, -1.0], 1.0).unwrap()
}

fn operator(p: &VelocityProfile, n: usize, nu: f64, k: f64, ell: i32) -> ModeOperator {
    let grid = build_grid(p.radius(), n, ell).unwrap();
    assemble_operator(&grid, p, nu, k, ell).unwrap()
}

/// `10^{-3}, 10^{-3.5}, ..., 10^{-6}`.
fn half_decades() -> Vec<f64> {
    (0..7).map(|i| 10f64.powf(-3.0 - 0.5 * i as f64)).collect()
}

fn sweep_settings() -> DecaySettings {
    DecaySettings { grid_size: 192, compute_psi: false, ..DecaySettings::default() }
}

fn exponent_recovery(id: u32, profile: VelocityProfile, target: f64) {
    let start = Instant::now();
    let report = scaling_sweep(&profile, 1.0, 0, &half_decades(), Geometry::Pipe, &sweep_settings()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let alpha = report.exponent_alpha;
    let c: Vec<f64> = report.rows.iter().map(|r| r.c_effective).collect();
    let ok = (alpha - target).abs() <= 0.07 && secs <= 300.0;
    let detail = format!(
        "alpha = {alpha:.5} (target {target:.5}, tol 0.07, stderr {:.1e}), rate/Lambda = {c:.3?}, {secs:.1} s",
        report.alpha_stderr
    );
    assert!(line(id, ok, &detail), "{detail}");
}

#[test]
fn criterion_01_exponent_m2() {
    exponent_recovery(1, poiseuille(), 0.5);
}

#[test]
fn criterion_02_exponent_m1() {
    exponent_recovery(2, linear(), 1.0 / 3.0);
}

/// The factor-5 half of this criterion cannot hold: for `|k| ≤ ν` the slowest
/// mode decays at the Taylor dispersion rate `k² ⟨(v - v̄)(-νΔ)⁻¹(v - v̄)⟩`,
/// which is `k²/(192ν)` for `v = 1 - r²`. The test reports the criterion
/// verbatim and asserts the measured rate against that closed form instead.
///
/// At `ν = 0.1` nothing needs fine resolution, and `n = 64` keeps `‖H‖`
/// small enough for the two propagation routes to agree over the long
/// steps this slow decay needs.
#[test]
fn criterion_03_crossover_branch() {
    let p = poiseuille();
    let settings = DecaySettings { grid_size: 192, ..DecaySettings::default() };
    let (nu, k) = (0.1, 0.01);
    let scale = k * k / nu;
    let op = operator(&p, 64, nu, k, 0);
    let rate = worst_case_rate(&op, scale, &settings).unwrap().rate;

    let enhanced_op = operator(&p, 192, 1e-4, 1.0, 0);
    let enhanced = worst_case_rate(&enhanced_op, lambda_rate(1e-4, 1.0, 2).unwrap(), &settings).unwrap().rate;

    let ratio = rate / scale;
    let within_factor_5 = (0.2..=5.0).contains(&ratio);
    let slower = rate * 10.0 <= enhanced;
    let taylor = k * k / (192.0 * nu);
    let detail = format!(
        "rate = {rate:.4e}, k^2/nu = {scale:.1e}, ratio = {ratio:.4e} (need [0.2, 5]); \
         enhanced rate at nu=1e-4,k=1 = {enhanced:.4e}, 10x slower = {slower}; \
         Taylor dispersion rate k^2/(192 nu) = {taylor:.4e}, measured/Taylor = {:.4}",
        rate / taylor
    );
    line(3, within_factor_5 && slower, &detail);
    assert!(slower, "{detail}");
    assert!((rate / taylor - 1.0).abs() < 0.05, "{detail}");
}

#[test]
fn criterion_04_uniform_psa_constant() {
    let p = poiseuille();
    let mut c1 = Vec::new();
    for nu in [1e-3, 1e-4, 1e-5] {
        let op = operator(&p, 192, nu, 1.0, 0);
        let psa = pseudo_abscissa(&op, 129, default_refine_tol(&op)).unwrap();
        c1.push(psa.c1_effective.unwrap());
    }
    let (lo, hi) = c1.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    let ok = hi / lo <= 3.0;
    let detail = format!("c1_effective = {c1:.4?}, max/min = {:.4} (need <= 3)", hi / lo);
    assert!(line(4, ok, &detail), "{detail}");
}

#[test]
fn criterion_05_wei_bound() {
    let settings = DecaySettings::default();
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut parts = Vec::new();
    for (name, p) in [("1-r^2", poiseuille()), ("r", linear())] {
        let (nu, k) = (1e-3, 1.0);
        let op = operator(&p, 192, nu, k, 0);
        let psi = pseudo_abscissa(&op, 129, default_refine_tol(&op)).unwrap().psi;
        let scale = lambda_rate(nu, k, p.order()).unwrap();
        let times = log_times(0.01 / scale, 10.0 / scale, 31);
        for trial in 0..20 {
            let trace = propagate(&op, &trial_data(&op, &settings, trial), &times, false).unwrap();
            let v = wei_bound_check(&trace, psi);
            worst = worst.max(v);
            violations += usize::from(v > 1e-8);
        }
        parts.push(format!("{name}: psi = {psi:.4e}"));
    }
    let ok = violations == 0;
    let detail = format!("{}; 40 traces, violations = {violations}, max excess = {worst:.3e}", parts.join(", "));
    assert!(line(5, ok, &detail), "{detail}");
}

#[test]
fn criterion_06_covering_bound() {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, p) in [("1-r^2", poiseuille()), ("r", linear())] {
        let (contained, sups) = covering_constants(&p, &[0.1, 0.01, 0.001], 101).unwrap();
        ok &= contained && covering_uniform(&sups);
        parts.push(format!("{name}: contained = {contained}, sup length/delta = {sups:.4?}"));
    }
    let detail = parts.join("; ");
    assert!(line(6, ok, &detail), "{detail}");
}

#[test]
fn criterion_07_proposition_audits() {
    let p = poiseuille();
    let (lo, hi) = p.range();
    let (mut away, mut near) = (f64::INFINITY, f64::INFINITY);
    let mut audits = 0;
    for nu in [1e-3, 1e-4] {
        let op = operator(&p, 192, nu, 1.0, 0);
        let mut rng = rng_from_seed(derive_seed(0, &[nu, 7.0]));
        for i in 0..100 {
            let g = random_smooth(&op.grid, 8, &mut rng);
            let n = weighted_norm(&g, &op.grid).unwrap();
            let g: Vec<C64> = g.iter().map(|x| x / n).collect();
            let lambda = lo + (hi - lo) * i as f64 / 99.0;
            for delta in [0.05, 0.1] {
                away = away.min(verify_away_bound(&op, &p, lambda, delta, &g).unwrap().residual);
                near = near.min(verify_near_bound(&op, &p, lambda, delta, &g).unwrap().residual);
                audits += 1;
            }
        }
    }
    let ok = away >= -1e-8 && near >= -1e-8;
    let detail = format!("{audits} audits each, min residual away = {away:.4e}, near = {near:.4e} (need >= -1e-8)");
    assert!(line(7, ok, &detail), "{detail}");
}

#[test]
fn criterion_08_dispersion_envelope() {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [linear(), poiseuille(), quartic()] {
        let m = p.order();
        let op = operator(&p, 128, 1e-3, 1.0, 0);
        let c1 = pseudo_abscissa(&op, 129, default_refine_tol(&op)).unwrap().c1_effective.unwrap();
        for nu in [1e-2, 1e-3] {
            let times = log_grid(0.1, 10.0 / nu, 60);
            match verify_dispersion(nu, m, c1, 0.5 * c1, &times) {
                Ok(r) => parts.push(format!("m={m} nu={nu:.0e} c1={c1:.3} max ratio {:.4}", r.max_ratio)),
                Err(e) => {
                    ok = false;
                    parts.push(format!("m={m} nu={nu:.0e}: {e}"));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs <= 120.0;
    let detail = format!("{}; {secs:.1} s", parts.join(", "));
    assert!(line(8, ok, &detail), "{detail}");
}

#[test]
fn criterion_09_bessel_eigenvalues() {
    let mut worst: f64 = 0.0;
    for ell in [0, 1] {
        for e in laplacian_bessel_errors(1.0, 128, ell, 8).unwrap() {
            worst = worst.max(e);
        }
    }
    let ok = worst <= 1e-6;
    let detail = format!("8 eigenvalues per l in {{0, 1}}, max relative error {worst:.3e} (need <= 1e-6)");
    assert!(line(9, ok, &detail), "{detail}");
}

#[test]
fn criterion_10_disc_pipe_identity() {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, nu) in [(poiseuille(), 1e-3), (linear(), 1e-2)] {
        let settings = DecaySettings { grid_size: 128, ..DecaySettings::default() };
        for ell in [1, 2, 3] {
            let times = uniform_times(5.0 / lambda_rate(nu, ell as f64, p.order()).unwrap(), 40);
            let disc = disc_decay(&p, nu, ell, &times, &settings).unwrap();
            let op = operator(&p, 128, nu, ell as f64, ell);
            let pipe = propagate(&op, &trial_data(&op, &settings, 0), &times, false).unwrap();
            let same = disc.times == pipe.times
                && disc.norms.iter().zip(&pipe.norms).all(|(a, b)| a.to_bits() == b.to_bits());
            ok &= same;
            parts.push(format!("m={} l={ell}: {same}", p.order()));
        }
    }
    let detail = format!("bitwise equal traces: {}", parts.join(", "));
    assert!(line(10, ok, &detail), "{detail}");
}
