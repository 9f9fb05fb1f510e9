//! Evolution `∂_t g = -H g`, decay-rate extraction and `ν`-sweeps.
//!
//! Propagators are built in weight-symmetrized coordinates, where the
//! weighted norm is Euclidean. Each step is applied twice: once with the
//! matrix exponential and once with L-stable Radau IIA substeps combined by
//! repeated squaring. The two states must agree or the run is rejected.

use std::f64::consts::FRAC_PI_2;

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eigen_decomposition, expm_increment, radau_step_increment, square_increment, C64};
use crate::operator::{assemble_operator, build_grid, ModeOperator};
use crate::profiles::VelocityProfile;
use crate::pseudospectral::{default_refine_tol, pseudo_abscissa, DEFAULT_LAMBDA_SAMPLES};
use crate::sampling::{derive_seed, random_smooth, rng_from_seed, DEFAULT_SMOOTH_DEGREE};

/// Relative disagreement tolerated between the two propagation routes.
pub const CROSS_CHECK_TOL: f64 = 1e-6;
/// Minimum number of samples inside a fit window.
pub const MIN_FIT_SAMPLES: usize = 10;
/// Minimum number of `ν` values in a sweep regression.
pub const MIN_SWEEP_POINTS: usize = 4;
/// Radau substeps satisfy `h ρ <= RADAU_STEP_BOUND` for the advective scale `ρ`.
const RADAU_STEP_BOUND: f64 = 0.02;
/// At least `2^11` substeps per step, so that diffusive modes which are not
/// negligible over one step are resolved as well.
const MIN_RADAU_LEVELS: u32 = 11;

/// `Λ_{ν,k} = ν^{m/(m+2)} |k|^{2/(m+2)}` for `ν <= |k|`, `k²/ν` otherwise.
pub fn lambda_rate(nu: f64, k: f64, m: usize) -> Result<f64> {
    if k == 0.0 {
        return Err(Error::InvalidMode("Lambda is undefined for k = 0".into()));
    }
    if !(nu > 0.0) || m == 0 {
        return Err(Error::InvalidParameter(format!("need nu > 0 and m >= 1, got nu={nu}, m={m}")));
    }
    let k = k.abs();
    if nu <= k {
        let mf = m as f64;
        Ok(nu.powf(mf / (mf + 2.0)) * k.powf(2.0 / (mf + 2.0)))
    } else {
        Ok(k * k / nu)
    }
}

/// Samples used by [`fit_decay`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FitWindow {
    /// Keep samples with `lower <= norm / norms[0] <= upper`.
    NormBand { upper: f64, lower: f64 },
    /// Drop samples in the first fraction of the decades traversed by the
    /// trace; `0` keeps everything.
    DropFraction(f64),
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow::NormBand { upper: 1e-2, lower: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    /// Absolute decay rate `c Λ`.
    pub rate: f64,
    /// `exp(intercept)` of the log-linear regression, in the units of the norms.
    pub prefactor: f64,
    /// Smallest `C` with `norm(t) <= C e^{-rate t} norms[0]` on the whole trace.
    pub envelope: f64,
    /// Largest relative deviation of the fitted line inside the window.
    pub residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayTrace {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub fit: Option<DecayFit>,
}

impl DecayTrace {
    pub fn new(times: Vec<f64>, norms: Vec<f64>) -> Self {
        let mut trace = Self { times, norms, fit: None };
        trace.fit = fit_decay(&trace, FitWindow::default()).ok();
        trace
    }
}

pub fn fit_decay(trace: &DecayTrace, window: FitWindow) -> Result<DecayFit> {
    let n0 = match trace.norms.first() {
        Some(&n) if n > 0.0 => n,
        _ => return Err(Error::WindowTooSmall { found: 0, needed: MIN_FIT_SAMPLES }),
    };
    let keep: Vec<usize> = match window {
        FitWindow::NormBand { upper, lower } => (0..trace.norms.len())
            .filter(|&i| {
                let q = trace.norms[i] / n0;
                q <= upper && q >= lower
            })
            .collect(),
        FitWindow::DropFraction(f) => {
            let decades: Vec<f64> = trace.norms.iter().map(|n| (n0 / n).log10()).collect();
            let total = decades.iter().cloned().fold(0.0, f64::max);
            (0..trace.norms.len()).filter(|&i| decades[i] >= f * total).collect()
        }
    };
    if keep.len() < MIN_FIT_SAMPLES {
        return Err(Error::WindowTooSmall { found: keep.len(), needed: MIN_FIT_SAMPLES });
    }
    let ts: Vec<f64> = keep.iter().map(|&i| trace.times[i]).collect();
    let ys: Vec<f64> = keep.iter().map(|&i| trace.norms[i].ln()).collect();
    let (slope, intercept, _) = linear_regression(&ts, &ys);
    let rate = -slope;
    let residual = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| ((y - (intercept + slope * t)).exp() - 1.0).abs())
        .fold(0.0, f64::max);
    let envelope = trace
        .times
        .iter()
        .zip(&trace.norms)
        .map(|(t, n)| n / n0 * (rate * t).exp())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        rate,
        prefactor: intercept.exp(),
        envelope,
        residual,
        window: (ts[0], ts[ts.len() - 1]),
        samples: keep.len(),
    })
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, stderr(b))`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = if x.len() > 2 && sxx > 0.0 { (ssr / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, intercept, stderr)
}

/// Pair of one-step maps for `e^{-Δ H}` in symmetrized coordinates, each
/// stored as `phase · (I + F)` with the increment `F` kept separately so
/// that slowly decaying components stay accurate under squaring.
struct StepPair {
    dt: f64,
    phase: C64,
    exact: Array2<C64>,
    radau: Array2<C64>,
}

fn step_pair(op: &ModeOperator, dt: f64) -> Result<StepPair> {
    let n = op.size();
    let (lo, hi) = op.velocity_range;
    let center = 0.5 * (lo + hi);
    let mut shifted = op.symmetrized.clone();
    for i in 0..n {
        shifted[[i, i]] -= C64::new(0.0, op.k * center);
    }
    let phase = C64::from_polar(1.0, -op.k * center * dt);

    let exact = expm_increment(&shifted.mapv(|z| -z * dt))?;

    let rho = op.k.abs() * 0.5 * (hi - lo) + op.nu;
    let levels = if rho * dt > RADAU_STEP_BOUND {
        ((rho * dt / RADAU_STEP_BOUND).log2().ceil() as u32).max(MIN_RADAU_LEVELS)
    } else {
        MIN_RADAU_LEVELS
    };
    let h = dt / 2f64.powi(levels as i32);
    let radau = square_increment(radau_step_increment(&shifted, h)?, levels);
    Ok(StepPair { dt, phase, exact, radau })
}

impl StepPair {
    fn squared(&self) -> Self {
        Self {
            dt: 2.0 * self.dt,
            phase: self.phase * self.phase,
            exact: square_increment(self.exact.clone(), 1),
            radau: square_increment(self.radau.clone(), 1),
        }
    }
}

fn apply(phase: C64, f: &Array2<C64>, x: &Array1<C64>) -> Array1<C64> {
    (x + &f.dot(x)) * phase
}

/// State advanced by the exact route. Every step is also taken by the
/// Radau route from the same state, and the two results must agree.
struct DualState {
    state: Array1<C64>,
    floor: f64,
}

impl DualState {
    fn new(h0: Array1<C64>) -> Self {
        let floor = 1e-12 * norm2(&h0);
        Self { state: h0, floor }
    }

    fn advance(&mut self, step: &StepPair, time: f64) -> Result<f64> {
        let exact = apply(step.phase, &step.exact, &self.state);
        let radau = apply(step.phase, &step.radau, &self.state);
        let n = norm2(&exact);
        let discrepancy = norm2(&(&exact - &radau)) / n.max(self.floor);
        if !(discrepancy <= CROSS_CHECK_TOL) {
            return Err(Error::NonConvergence { time, discrepancy });
        }
        self.state = exact;
        Ok(n)
    }
}

fn norm2(x: &Array1<C64>) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_times(t_grid: &[f64]) -> Result<()> {
    if t_grid.first() != Some(&0.0) {
        return Err(Error::InvalidParameter("time grid must start at 0".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("time grid must be strictly increasing".into()));
    }
    Ok(())
}

fn initial_state(op: &ModeOperator, g0: &[C64]) -> Result<Array1<C64>> {
    let h0 = op.to_symmetric(g0)?;
    if norm2(&h0) == 0.0 {
        return Err(Error::InvalidParameter("initial data must be nonzero".into()));
    }
    Ok(h0)
}

/// Norms of `e^{-tH} g0` on `t_grid`, optionally times `e^{-ν k² t}`.
/// Increments equal to within `1e-12` relative share one propagator.
pub fn propagate(op: &ModeOperator, g0: &[C64], t_grid: &[f64], include_axial: bool) -> Result<DecayTrace> {
    check_times(t_grid)?;
    let h0 = initial_state(op, g0)?;
    let mut norms = vec![norm2(&h0)];
    let mut state = DualState::new(h0);
    let mut cache: Vec<StepPair> = Vec::new();
    for w in t_grid.windows(2) {
        let dt = w[1] - w[0];
        let idx = match cache.iter().position(|s| (s.dt - dt).abs() <= 1e-12 * dt) {
            Some(i) => i,
            None => {
                cache.push(step_pair(op, dt)?);
                cache.len() - 1
            }
        };
        norms.push(state.advance(&cache[idx], w[1])?);
    }
    if include_axial {
        let decay = op.nu * op.k * op.k;
        norms.iter_mut().zip(t_grid).for_each(|(n, t)| *n *= (-decay * t).exp());
    }
    Ok(DecayTrace::new(t_grid.to_vec(), norms))
}

/// Propagation through the eigendecomposition of `H`. Only reliable when the
/// eigenvector basis is well conditioned; kept as an independent reference.
pub fn propagate_eigen(op: &ModeOperator, g0: &[C64], t_grid: &[f64]) -> Result<Vec<f64>> {
    check_times(t_grid)?;
    let h0 = initial_state(op, g0)?;
    let (vals, vecs) = eigen_decomposition(&op.symmetrized)?;
    let coeffs = crate::linalg::inverse(&vecs)?.dot(&h0);
    Ok(t_grid
        .iter()
        .map(|&t| {
            let scaled: Array1<C64> =
                coeffs.iter().zip(&vals).map(|(c, l)| c * (-l * t).exp()).collect();
            norm2(&vecs.dot(&scaled))
        })
        .collect())
}

/// Eigenvalues of `H`, sorted by real part.
pub fn eigenvalues(op: &ModeOperator) -> Result<Vec<C64>> {
    let (vals, _) = eigen_decomposition(&op.symmetrized)?;
    let mut v = vals.to_vec();
    v.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(v)
}

/// `min Re μ` over the spectrum of `H`.
pub fn spectral_abscissa(op: &ModeOperator) -> Result<f64> {
    Ok(eigenvalues(op)?[0].re)
}

/// `max_t (‖g(t)‖/‖g(0)‖ - e^{-tΨ + π/2})`.
pub fn wei_bound_check(trace: &DecayTrace, psi: f64) -> f64 {
    let n0 = trace.norms[0];
    trace
        .times
        .iter()
        .zip(&trace.norms)
        .map(|(t, n)| n / n0 - (-t * psi + FRAC_PI_2).exp())
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug)]
pub struct DecaySettings {
    pub grid_size: usize,
    /// Random initial data per worst-case estimate.
    pub trials: usize,
    pub degree: usize,
    pub seed: u64,
    pub window: FitWindow,
    pub lambda_samples: usize,
    /// Attach `Ψ(H)` to sweep rows.
    pub compute_psi: bool,
    /// Steps taken at one step size before doubling it.
    pub steps_per_level: usize,
    pub max_steps: usize,
}

impl Default for DecaySettings {
    fn default() -> Self {
        Self {
            grid_size: 192,
            trials: 20,
            degree: DEFAULT_SMOOTH_DEGREE,
            seed: 0,
            window: FitWindow::default(),
            lambda_samples: DEFAULT_LAMBDA_SAMPLES,
            compute_psi: true,
            steps_per_level: 32,
            max_steps: 4096,
        }
    }
}

/// Initial data number `trial` for the given parameters.
pub fn trial_data(op: &ModeOperator, settings: &DecaySettings, trial: usize) -> Vec<C64> {
    let seed = derive_seed(settings.seed, &[op.nu, op.k, op.ell as f64, trial as f64]);
    random_smooth(&op.grid, settings.degree, &mut rng_from_seed(seed))
}

/// Propagators `e^{-2^j Δ₀ H}`, built on demand by squaring.
struct StepLadder<'a> {
    op: &'a ModeOperator,
    base: f64,
    levels: Vec<StepPair>,
}

impl<'a> StepLadder<'a> {
    fn new(op: &'a ModeOperator, base: f64) -> Self {
        Self { op, base, levels: Vec::new() }
    }

    fn level(&mut self, j: usize) -> Result<&StepPair> {
        if self.levels.is_empty() {
            self.levels.push(step_pair(self.op, self.base)?);
        }
        while self.levels.len() <= j {
            let next = self.levels.last().unwrap().squared();
            self.levels.push(next);
        }
        Ok(&self.levels[j])
    }
}

/// Trace with geometric step growth: the step doubles every
/// `steps_per_level` steps until the norm enters the fit band, stays fixed
/// inside it, and the run stops once the norm leaves the band from below.
fn adaptive_trace(ladder: &mut StepLadder, h0: Array1<C64>, settings: &DecaySettings) -> Result<DecayTrace> {
    let (upper, lower) = match settings.window {
        FitWindow::NormBand { upper, lower } => (upper, lower),
        FitWindow::DropFraction(_) => (1e-2, 1e-6),
    };
    let n0 = norm2(&h0);
    let mut state = DualState::new(h0);
    let (mut times, mut norms) = (vec![0.0], vec![n0]);
    let (mut level, mut at_level, mut t) = (0usize, 0usize, 0.0);
    for _ in 0..settings.max_steps {
        let step = ladder.level(level)?;
        t += step.dt;
        let n = state.advance(step, t)?;
        times.push(t);
        norms.push(n);
        let q = n / n0;
        if q < lower || n == 0.0 {
            break;
        }
        at_level += 1;
        if q > upper && at_level >= settings.steps_per_level {
            level += 1;
            at_level = 0;
        }
    }
    Ok(DecayTrace { times, norms, fit: None })
}

#[derive(Clone, Debug)]
pub struct WorstCase {
    /// Slowest fitted rate over the trials.
    pub rate: f64,
    pub trial: usize,
    pub trace: DecayTrace,
}

/// Slowest fitted decay rate over `settings.trials` random initial data.
/// `scale` sets the initial step `0.1 / scale`; it is reduced when the band
/// is crossed in too few steps.
pub fn worst_case_rate(op: &ModeOperator, scale: f64, settings: &DecaySettings) -> Result<WorstCase> {
    if settings.trials == 0 {
        return Err(Error::InvalidParameter("at least one trial required".into()));
    }
    let mut base = 0.1 / scale;
    let mut retries = 0;
    'outer: loop {
        let mut ladder = StepLadder::new(op, base);
        let mut worst: Option<WorstCase> = None;
        for trial in 0..settings.trials {
            let h0 = initial_state(op, &trial_data(op, settings, trial))?;
            let mut trace = adaptive_trace(&mut ladder, h0, settings)?;
            let fit = match fit_decay(&trace, settings.window) {
                Ok(f) => f,
                Err(Error::WindowTooSmall { .. }) if retries < 6 && trace.norms.len() < settings.max_steps => {
                    base /= 4.0;
                    retries += 1;
                    continue 'outer;
                }
                Err(e) => return Err(e),
            };
            let rate = fit.rate;
            trace.fit = Some(fit);
            if worst.as_ref().map_or(true, |w| rate < w.rate) {
                worst = Some(WorstCase { rate, trial, trace });
            }
        }
        return Ok(worst.expect("trials > 0"));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    /// Mode `(k, ℓ)` of the pipe.
    Pipe,
    /// Disc: the angular wavenumber also plays the role of `k`.
    Disc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub nu: f64,
    pub k: f64,
    pub ell: i32,
    pub m: usize,
    pub lambda: f64,
    pub fit_rate: f64,
    pub c_effective: f64,
    pub psi: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub exponent_alpha: f64,
    pub alpha_stderr: f64,
}

fn sweep_row(profile: &VelocityProfile, k: f64, ell: i32, nu: f64, settings: &DecaySettings) -> Result<SweepRow> {
    let grid = build_grid(profile.radius(), settings.grid_size, ell)?;
    let op = assemble_operator(&grid, profile, nu, k, ell)?;
    let m = profile.order();
    let lambda = lambda_rate(nu, k, m)?;
    let worst = worst_case_rate(&op, lambda, settings)?;
    let psi = if settings.compute_psi {
        Some(pseudo_abscissa(&op, settings.lambda_samples, default_refine_tol(&op))?.psi)
    } else {
        None
    };
    Ok(SweepRow { nu, k, ell, m, lambda, fit_rate: worst.rate, c_effective: worst.rate / lambda, psi })
}

/// Worst-case decay rates across `nu_list` and the exponent `α` of
/// `rate ∝ ν^α`. In disc mode `ell` is replaced by `k`, which must then be
/// a nonzero integer.
pub fn scaling_sweep(
    profile: &VelocityProfile,
    k: f64,
    ell: i32,
    nu_list: &[f64],
    geometry: Geometry,
    settings: &DecaySettings,
) -> Result<SweepReport> {
    if nu_list.len() < MIN_SWEEP_POINTS {
        return Err(Error::WindowTooSmall { found: nu_list.len(), needed: MIN_SWEEP_POINTS });
    }
    if k == 0.0 {
        return Err(Error::InvalidMode("sweeps need k != 0".into()));
    }
    if nu_list.iter().any(|&nu| !(nu > 0.0 && nu <= k.abs())) {
        return Err(Error::InvalidParameter("every nu must satisfy 0 < nu <= |k|".into()));
    }
    let (lo, hi) = nu_list.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    if (hi / lo).log10() < 2.0 - 1e-12 {
        return Err(Error::InvalidParameter("nu values must span at least two decades".into()));
    }
    let ell = match geometry {
        Geometry::Pipe => ell,
        Geometry::Disc => {
            if k.fract() != 0.0 {
                return Err(Error::InvalidMode(format!("disc mode needs an integer wavenumber, got {k}")));
            }
            k as i32
        }
    };
    let rows = nu_list
        .par_iter()
        .map(|&nu| sweep_row(profile, k, ell, nu, settings))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.nu.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.fit_rate.ln()).collect();
    let (alpha, _, stderr) = linear_regression(&x, &y);
    Ok(SweepReport { rows, exponent_alpha: alpha, alpha_stderr: stderr })
}

/// Decay of the disc mode `ℓ`: the pipe operator with `k = ℓ` and angular
/// wavenumber `ℓ`, without the axial factor, started from seeded random
/// data (trial 0 of `settings`).
pub fn disc_decay(
    profile: &VelocityProfile,
    nu: f64,
    ell: i32,
    t_grid: &[f64],
    settings: &DecaySettings,
) -> Result<DecayTrace> {
    if ell == 0 {
        return Err(Error::InvalidMode("the l = 0 disc mode is plain heat decay".into()));
    }
    if !(nu < 1.0) {
        return Err(Error::InvalidParameter(format!("disc mode needs nu < 1, got {nu}")));
    }
    let grid = build_grid(profile.radius(), settings.grid_size, ell)?;
    let op = assemble_operator(&grid, profile, nu, ell as f64, ell)?;
    propagate(&op, &trial_data(&op, settings, 0), t_grid, false)
}

/// `t_i = t_max * i / count`, `i = 0..=count`.
pub fn uniform_times(t_max: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|i| t_max * i as f64 / count as f64).collect()
}

/// `0` followed by `count` log-spaced times over `[t_min, t_max]`.
pub fn log_times(t_min: f64, t_max: f64, count: usize) -> Vec<f64> {
    let (a, b) = (t_min.ln(), t_max.ln());
    std::iter::once(0.0)
        .chain((0..count).map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poiseuille() -> VelocityProfile {
        VelocityProfile::new(vec![1.0, 0.0, -1.0], 1.0).unwrap()
    }

    #[test]
    fn lambda_branches() {
        assert!((lambda_rate(1e-4, 1.0, 2).unwrap() - 1e-2).abs() < 1e-15);
        assert!((lambda_rate(0.1, 0.01, 2).unwrap() - 1e-3).abs() < 1e-15);
        for m in 1..6 {
            let s = 0.37;
            assert!((lambda_rate(s, s, m).unwrap() - s).abs() < 1e-14);
        }
        assert!(matches!(lambda_rate(1e-3, 0.0, 2), Err(Error::InvalidMode(_))));
    }

    #[test]
    fn synthetic_fits() {
        let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
        let trace = DecayTrace {
            norms: times.iter().map(|t| 3.0 * (-5.0 * t).exp()).collect(),
            times: times.clone(),
            fit: None,
        };
        let fit = fit_decay(&trace, FitWindow::DropFraction(0.0)).unwrap();
        assert!((fit.rate - 5.0).abs() < 1e-12);
        assert!((fit.prefactor - 3.0).abs() < 1e-12);
        assert!(fit.residual <= 1e-12);

        let flat = DecayTrace { norms: vec![2.0; 40], times, fit: None };
        let fit = fit_decay(&flat, FitWindow::DropFraction(0.1)).unwrap();
        assert!(fit.rate.abs() < 1e-15);
        assert!(matches!(fit_decay(&flat, FitWindow::default()), Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn time_grid_validation() {
        let grid = build_grid(1.0, 16, 0).unwrap();
        let op = assemble_operator(&grid, &poiseuille(), 1e-2, 1.0, 0).unwrap();
        let g = vec![C64::new(1.0, 0.0); 16];
        assert!(propagate(&op, &g, &[0.1, 0.2], false).is_err());
        assert!(propagate(&op, &g, &[0.0, 0.2, 0.2], false).is_err());
        assert!(propagate(&op, &vec![C64::new(0.0, 0.0); 16], &[0.0, 1.0], false).is_err());
    }

    #[test]
    fn constant_mode_is_conserved() {
        let grid = build_grid(1.0, 24, 0).unwrap();
        let op = assemble_operator(&grid, &poiseuille(), 1e-2, 0.0, 0).unwrap();
        let g = vec![C64::new(1.0, 0.0); 24];
        let trace = propagate(&op, &g, &uniform_times(50.0, 20), false).unwrap();
        for n in &trace.norms {
            assert!((n / trace.norms[0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn hermitian_wei_slack() {
        let grid = build_grid(1.0, 24, 1).unwrap();
        let op = assemble_operator(&grid, &poiseuille(), 1e-2, 0.0, 1).unwrap();
        let g = trial_data(&op, &DecaySettings::default(), 0);
        let trace = propagate(&op, &g, &log_times(0.1, 100.0, 20), false).unwrap();
        let psi = spectral_abscissa(&op).unwrap();
        assert!(wei_bound_check(&trace, psi) <= 0.0);
        assert!((wei_bound_check(&DecayTrace::new(vec![0.0], vec![1.0]), 0.0) - (1.0 - FRAC_PI_2.exp())).abs() < 1e-15);
    }

    #[test]
    fn sweep_guards() {
        let p = poiseuille();
        let s = DecaySettings::default();
        assert!(matches!(
            scaling_sweep(&p, 1.0, 0, &[1e-3], Geometry::Pipe, &s),
            Err(Error::WindowTooSmall { found: 1, needed: 4 })
        ));
        assert!(matches!(
            disc_decay(&p, 1e-3, 0, &[0.0, 1.0], &s),
            Err(Error::InvalidMode(_))
        ));
    }
}
