//! Invariant suite run by `mixlab verify`.

use std::f64::consts::FRAC_PI_2;

use crate::dispersion::{factorized_high_bound, k_integral, log_grid};
use crate::error::{Error, Result};
use crate::linalg::{eigen_decomposition, C64};
use crate::operator::{assemble_laplacian, assemble_operator, build_grid, weighted_inner, weighted_norm};
use crate::profiles::{detect_order, VelocityProfile};
use crate::pseudospectral::{
    default_refine_tol, poincare_check, pseudo_abscissa, sigma_curve, verify_away_bound, verify_near_bound,
};
use crate::sampling::{derive_seed, random_smooth, rng_from_seed};
use crate::semigroup::{
    disc_decay, lambda_rate, log_times, propagate, spectral_abscissa, trial_data, uniform_times, wei_bound_check,
    DecaySettings,
};
use crate::special::neumann_eigenvalues;

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub profile: VelocityProfile,
    pub nu: f64,
    pub k: f64,
    pub ell: i32,
    pub grid_size: usize,
    pub lambda_samples: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(&CheckConfig) -> Result<(bool, String)>;

const CHECKS: [(&str, Check); 18] = [
    ("order_invariance", order_invariance),
    ("level_set_accuracy", level_set_accuracy),
    ("neighborhood_nesting", neighborhood_nesting),
    ("covering_containment", covering_containment),
    ("grid_quadrature", grid_quadrature),
    ("laplacian_bessel", laplacian_bessel),
    ("laplacian_kernel", laplacian_kernel),
    ("accretivity_identity", accretivity_identity),
    ("hermitian_without_advection", hermitian_without_advection),
    ("abscissa_below_spectrum", abscissa_below_spectrum),
    ("abscissa_scaling", abscissa_scaling),
    ("sigma_continuity", sigma_continuity),
    ("propagation_invariants", propagation_invariants),
    ("disc_pipe_identity", disc_pipe_identity),
    ("wei_bound", wei_bound),
    ("level_set_audits", level_set_audits),
    ("poincare_lemma", poincare_lemma),
    ("dispersion_monotone", dispersion_monotone),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

/// Runs every check; computation errors count as failures.
pub fn run_checks(cfg: &CheckConfig) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|&(name, f)| match f(cfg) {
            Ok((passed, detail)) => CheckOutcome { name, passed, detail },
            Err(e) => CheckOutcome { name, passed: false, detail: format!("{}: {e}", e.code()) },
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn op_for(cfg: &CheckConfig, nu: f64, k: f64, ell: i32) -> Result<crate::operator::ModeOperator> {
    let grid = build_grid(cfg.profile.radius(), cfg.grid_size, ell)?;
    assemble_operator(&grid, &cfg.profile, nu, k, ell)
}

fn order_invariance(cfg: &CheckConfig) -> Result<(bool, String)> {
    let p = &cfg.profile;
    let m = p.order();
    let mut ok = true;
    for (scale, shift) in [(-2.0, 0.0), (0.5, 3.0), (7.0, -1.0)] {
        let mut c: Vec<f64> = p.coeffs().iter().map(|x| x * scale).collect();
        if c.is_empty() {
            c.push(0.0);
        }
        c[0] += shift;
        let q = crate::poly::Polynomial::new(c);
        ok &= detect_order(&q, p.radius(), p.order_cap())? == m;
    }
    Ok((ok, format!("m={m}")))
}

fn level_set_accuracy(cfg: &CheckConfig) -> Result<(bool, String)> {
    let p = &cfg.profile;
    let (lo, hi) = p.range();
    let tol = 1e-12;
    let mut worst: f64 = 0.0;
    for i in 0..41 {
        let lambda = lo + (hi - lo) * i as f64 / 40.0;
        for r in p.level_set(lambda, tol) {
            worst = worst.max((p.eval(r) - lambda).abs() / p.sup_norm().max(1.0));
        }
    }
    Ok((worst <= tol, format!("max |v(r)-lambda| = {worst:.2e}")))
}

fn neighborhood_nesting(cfg: &CheckConfig) -> Result<(bool, String)> {
    let p = &cfg.profile;
    let (lo, hi) = p.range();
    let deltas = [1e-3, 1e-2, 0.05, 0.1, 0.2];
    let mut ok = true;
    for i in 0..21 {
        let lambda = lo - 0.1 + (hi - lo + 0.2) * i as f64 / 20.0;
        let mut prev = (0.0, 0.0);
        for &d in &deltas {
            let (e, et) = p.neighborhood_sets(lambda, d)?;
            ok &= et.contains_set(&e);
            ok &= e.measure() >= prev.0 - 1e-15 && et.measure() >= prev.1 - 1e-15;
            prev = (e.measure(), et.measure());
        }
    }
    Ok((ok, "E within E~, measures monotone in delta".into()))
}

/// Sampled containment of `Ẽ` in the covering and the spread of the
/// covering constant across `δ`.
pub fn covering_constants(p: &VelocityProfile, deltas: &[f64], lambda_count: usize) -> Result<(bool, Vec<f64>)> {
    let (lo, hi) = p.range();
    let mut contained = true;
    let mut sups = Vec::new();
    for &d in deltas {
        let mut sup: f64 = 0.0;
        for i in 0..lambda_count {
            let lambda = lo - 1.0 + (hi - lo + 2.0) * i as f64 / (lambda_count - 1) as f64;
            let (_, et) = p.neighborhood_sets(lambda, d)?;
            let cover = p.covering(lambda, d)?;
            for &(a, b) in et.intervals() {
                let samples = 200;
                contained &= (0..=samples).all(|j| cover.contains(a + (b - a) * j as f64 / samples as f64));
            }
            sup = sup.max(cover.constant());
        }
        sups.push(sup);
    }
    Ok((contained, sups))
}

/// No growth of the covering constant as `δ` decreases: every value stays
/// within a factor 2 of the one at the largest `δ` (listed first).
pub fn covering_uniform(sups: &[f64]) -> bool {
    sups.first().is_some_and(|&s0| sups.iter().all(|&s| s.is_finite() && s <= 2.0 * s0))
}

fn covering_containment(cfg: &CheckConfig) -> Result<(bool, String)> {
    let deltas: Vec<f64> = (0..5).map(|i| 10f64.powf(-1.0 - 0.5 * i as f64)).collect();
    let (contained, sups) = covering_constants(&cfg.profile, &deltas, 101)?;
    let uniform = covering_uniform(&sups);
    Ok((contained && uniform, format!("contained={contained} C0 per delta={sups:.3?}")))
}

fn grid_quadrature(cfg: &CheckConfig) -> Result<(bool, String)> {
    let grid = build_grid(cfg.profile.radius(), cfg.grid_size, cfg.ell)?;
    let r = cfg.profile.radius();
    let err = rel(grid.integrate(&vec![1.0; grid.size()]), 0.5 * r * r);
    let nodes_ok = grid.nodes()[0] > 0.0 && grid.nodes().windows(2).all(|w| w[0] < w[1]);
    Ok((err <= 1e-10 && nodes_ok, format!("relative error {err:.2e}")))
}

/// Relative errors of the smallest `count` eigenvalue magnitudes of the
/// radial Laplacian against Bessel-derivative zeros.
pub fn laplacian_bessel_errors(radius: f64, n: usize, ell: i32, count: usize) -> Result<Vec<f64>> {
    let grid = build_grid(radius, n, ell)?;
    let lap = assemble_laplacian(&grid, ell).mapv(|x| C64::new(-x, 0.0));
    let (vals, _) = eigen_decomposition(&lap)?;
    let mut mags: Vec<f64> = vals.iter().map(|z| z.re).collect();
    mags.sort_by(f64::total_cmp);
    let exact = neumann_eigenvalues(ell, radius, count);
    Ok(exact
        .iter()
        .zip(&mags)
        .map(|(e, a)| if *e == 0.0 { a.abs() } else { rel(*a, *e) })
        .collect())
}

fn laplacian_bessel(cfg: &CheckConfig) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for ell in [0, 1] {
        for e in laplacian_bessel_errors(cfg.profile.radius(), cfg.grid_size, ell, 4)? {
            worst = worst.max(e);
        }
    }
    Ok((worst <= 1e-6, format!("max relative error {worst:.2e}")))
}

fn laplacian_kernel(cfg: &CheckConfig) -> Result<(bool, String)> {
    let grid = build_grid(cfg.profile.radius(), cfg.grid_size, 0)?;
    let lap = assemble_laplacian(&grid, 0);
    let scale = lap.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let res = lap.sum_axis(ndarray::Axis(1)).iter().fold(0.0f64, |a, b| a.max(b.abs()));
    Ok((res <= 1e-8 || res <= 1e-12 * scale, format!("residual {res:.2e}")))
}

fn accretivity_identity(cfg: &CheckConfig) -> Result<(bool, String)> {
    let op = op_for(cfg, cfg.nu, cfg.k, cfg.ell)?;
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &[1.0]));
    let (mut re_err, mut im_err): (f64, f64) = (0.0, 0.0);
    for i in 0..20 {
        let g = random_smooth(&op.grid, 8, &mut rng);
        let lambda = 0.1 * i as f64;
        let hg = op.apply_shifted(&g, lambda)?;
        let pairing = weighted_inner(&g, &hg, &op.grid)?;
        let grad = op.gradient_norm_sq(&g)?;
        re_err = re_err.max(rel(pairing.re, op.nu * grad));
        let hg0 = op.apply(&g)?;
        let vg: Vec<C64> = g.iter().zip(&op.velocity).map(|(x, v)| x * v).collect();
        let im = weighted_inner(&g, &hg0, &op.grid)?.im;
        let expect = op.k * weighted_inner(&g, &vg, &op.grid)?.re;
        im_err = im_err.max((im - expect).abs() / expect.abs().max(weighted_norm(&g, &op.grid)?.powi(2) * op.k.abs()));
    }
    Ok((re_err <= 1e-6 && im_err <= 1e-8, format!("real part {re_err:.2e}, imaginary part {im_err:.2e}")))
}

fn hermitian_without_advection(cfg: &CheckConfig) -> Result<(bool, String)> {
    let op = op_for(cfg, cfg.nu, 0.0, cfg.ell)?;
    let s = &op.symmetrized;
    let scale = s.iter().fold(0.0f64, |a, b| a.max(b.norm()));
    let mut worst: f64 = 0.0;
    for i in 0..s.nrows() {
        for j in 0..s.ncols() {
            worst = worst.max((s[[i, j]] - s[[j, i]].conj()).norm());
        }
    }
    Ok((worst <= 1e-10 * scale, format!("asymmetry {:.2e}", worst / scale)))
}

fn abscissa_below_spectrum(cfg: &CheckConfig) -> Result<(bool, String)> {
    let op = op_for(cfg, cfg.nu, cfg.k, cfg.ell)?;
    let psa = pseudo_abscissa(&op, cfg.lambda_samples, default_refine_tol(&op))?;
    let sa = spectral_abscissa(&op)?;
    Ok((psa.psi <= sa * (1.0 + 1e-10) + 1e-14, format!("psi={:.6e} spectral abscissa={sa:.6e}", psa.psi)))
}

fn abscissa_scaling(cfg: &CheckConfig) -> Result<(bool, String)> {
    let a = op_for(cfg, cfg.nu, cfg.k, cfg.ell)?;
    let b = op_for(cfg, 2.0 * cfg.nu, 2.0 * cfg.k, cfg.ell)?;
    let pa = pseudo_abscissa(&a, cfg.lambda_samples, 1e-10)?.psi;
    let pb = pseudo_abscissa(&b, cfg.lambda_samples, 1e-10)?.psi;
    let err = rel(pb, 2.0 * pa);
    Ok((err <= 1e-8, format!("relative error {err:.2e}")))
}

fn sigma_continuity(cfg: &CheckConfig) -> Result<(bool, String)> {
    let op = op_for(cfg, cfg.nu, cfg.k, cfg.ell)?;
    let curve = sigma_curve(&op, cfg.lambda_samples, default_refine_tol(&op))?;
    let mut worst: f64 = 0.0;
    for i in 1..curve.lambdas.len() {
        let bound = 2.0 * op.k.abs() * (curve.lambdas[i] - curve.lambdas[i - 1]);
        worst = worst.max((curve.sigmas[i] - curve.sigmas[i - 1]).abs() / bound);
    }
    Ok((worst <= 1.0, format!("max jump / (2|k| dlambda) = {worst:.3}")))
}

fn propagation_invariants(cfg: &CheckConfig) -> Result<(bool, String)> {
    let op = op_for(cfg, cfg.nu, cfg.k, cfg.ell)?;
    let settings = DecaySettings { seed: cfg.seed, grid_size: cfg.grid_size, ..Default::default() };
    let g = trial_data(&op, &settings, 0);
    let scale = lambda_rate(cfg.nu, cfg.k, cfg.profile.order())?;
    let t1 = 2.0 / scale;
    let times = uniform_times(2.0 * t1, 40);
    let trace = propagate(&op, &g, &times, false)?;
    let monotone = trace.norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10));

    // restart at t1 from the propagated state
    let half = propagate_state(&op, &g, t1)?;
    let restarted = propagate(&op, &half, &[0.0, t1], false)?;
    let direct = propagate(&op, &g, &[0.0, 2.0 * t1], false)?;
    let semigroup = rel(restarted.norms[1], direct.norms[1]) <= 1e-8;

    let axial = propagate(&op, &g, &times, true)?;
    let factor = trace
        .norms
        .iter()
        .zip(&axial.norms)
        .zip(&times)
        .all(|((a, b), t)| *b == a * (-op.nu * op.k * op.k * t).exp());
    Ok((monotone && semigroup && factor, format!("monotone={monotone} semigroup={semigroup} axial={factor}")))
}

/// State `e^{-tH} g` in nodal coordinates.
fn propagate_state(op: &crate::operator::ModeOperator, g: &[C64], t: f64) -> Result<Vec<C64>> {
    let h = op.to_symmetric(g)?;
    let m = crate::linalg::expm(&op.symmetrized.mapv(|z| -z * t))?;
    Ok(op.from_symmetric(&m.dot(&h)))
}

fn disc_pipe_identity(cfg: &CheckConfig) -> Result<(bool, String)> {
    let ell = if cfg.ell == 0 { 1 } else { cfg.ell };
    let nu = cfg.nu.min(0.5);
    let settings = DecaySettings { seed: cfg.seed, grid_size: cfg.grid_size, ..Default::default() };
    let scale = lambda_rate(nu, ell as f64, cfg.profile.order())?;
    let times = uniform_times(5.0 / scale, 30);
    let disc = disc_decay(&cfg.profile, nu, ell, &times, &settings)?;
    let op = op_for(cfg, nu, ell as f64, ell)?;
    let pipe = propagate(&op, &trial_data(&op, &settings, 0), &times, false)?;
    let same = disc.norms == pipe.norms;
    Ok((same, format!("ell={ell} bitwise equal={same}")))
}

fn wei_bound(cfg: &CheckConfig) -> Result<(bool, String)> {
    let op = op_for(cfg, cfg.nu, cfg.k, cfg.ell)?;
    let psi = pseudo_abscissa(&op, cfg.lambda_samples, default_refine_tol(&op))?.psi;
    let settings = DecaySettings { seed: cfg.seed, grid_size: cfg.grid_size, ..Default::default() };
    let scale = lambda_rate(cfg.nu, cfg.k, cfg.profile.order())?;
    let times = log_times(0.01 / scale, 10.0 / scale, 31);
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..cfg.trials {
        let trace = propagate(&op, &trial_data(&op, &settings, trial), &times, false)?;
        worst = worst.max(wei_bound_check(&trace, psi));
    }
    Ok((worst <= 1e-8, format!("max violation {worst:.3e} (slack at t=0 is {:.3})", FRAC_PI_2.exp() - 1.0)))
}

fn level_set_audits(cfg: &CheckConfig) -> Result<(bool, String)> {
    let op = op_for(cfg, cfg.nu, cfg.k, cfg.ell)?;
    let p = &cfg.profile;
    let (lo, hi) = p.range();
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &[2.0]));
    let (mut away, mut near) = (f64::INFINITY, f64::INFINITY);
    for i in 0..100 {
        let g = random_smooth(&op.grid, 8, &mut rng);
        let n = weighted_norm(&g, &op.grid)?;
        let g: Vec<C64> = g.iter().map(|x| x / n).collect();
        let lambda = lo + (hi - lo) * (i % 11) as f64 / 10.0;
        for delta in [0.05, 0.1] {
            away = away.min(verify_away_bound(&op, p, lambda, delta, &g)?.residual);
            near = near.min(verify_near_bound(&op, p, lambda, delta, &g)?.residual);
        }
    }
    Ok((away >= -1e-8 && near >= -1e-8, format!("min residual away={away:.3e} near={near:.3e}")))
}

fn poincare_lemma(cfg: &CheckConfig) -> Result<(bool, String)> {
    let r = cfg.profile.radius();
    let grid = build_grid(r, cfg.grid_size, 0)?;
    // vanishes at r = R
    let g: Vec<C64> = grid.nodes().iter().map(|&x| C64::new(r * r - x * x, 0.0)).collect();
    let (lhs, rhs) = poincare_check(&grid, &g, 0.5 * r, r)?;
    // constants violate the inequality on the whole disc
    let c = vec![C64::new(1.0, 0.0); grid.size()];
    let (cl, cr) = poincare_check(&grid, &c, 0.0, r)?;
    Ok((lhs <= rhs && cl > cr, format!("vanishing g: {lhs:.4e} <= {rhs:.4e}; constant: {cl:.4e} > {cr:.4e}")))
}

fn dispersion_monotone(cfg: &CheckConfig) -> Result<(bool, String)> {
    let m = cfg.profile.order();
    let nu = cfg.nu;
    let times = log_grid(0.1, 10.0 / nu, 25);
    let mut ok = true;
    let mut prev = f64::INFINITY;
    for &t in &times {
        let (a, b) = k_integral(nu, t, m, 1.0)?;
        let (c, d) = k_integral(nu, t, m, 1.5)?;
        ok &= a + b < prev && c + d < a + b;
        ok &= b <= factorized_high_bound(nu, t, m, 1.0)? * (1.0 + 1e-8);
        prev = a + b;
    }
    Ok((ok, format!("{} times", times.len())))
}

/// Fails with the first failing check's name, for callers that only need a
/// yes/no answer.
pub fn require_all(outcomes: &[CheckOutcome]) -> Result<()> {
    match outcomes.iter().find(|o| !o.passed) {
        None => Ok(()),
        Some(o) => Err(Error::InvalidParameter(format!("check {} failed: {}", o.name, o.detail))),
    }
}
