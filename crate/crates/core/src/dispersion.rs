//! The `k`-integral majorant `∫ e^{-c₁ Λ_{ν,k} t} dk` and its comparison
//! with the envelope `C₂ (√(ν/t) + e^{-c₂ ν t} / t)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::integrate;

pub const K_INTEGRAL_RTOL: f64 = 1e-8;
/// `I_high` is cut where its integrand drops below this fraction of its peak.
pub const TRUNCATION: f64 = 1e-16;
/// Largest admissible ratio of `I(t)` to the fitted envelope.
pub const ENVELOPE_FACTOR: f64 = 3.0;

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

/// `(∫_{|k|≤ν} e^{-c₁ k² t/ν} dk, ∫_{|k|>ν} e^{-c₁ ν^{m/(m+2)} |k|^{2/(m+2)} t} dk)`.
///
/// The high part is computed in `u = |k|^{2/(m+2)}`, where it reads
/// `(m + 2) ∫_{u₀}^∞ u^{m/2} e^{-a u} du` with `a = c₁ ν^{m/(m+2)} t`.
pub fn k_integral(nu: f64, t: f64, m: usize, c1: f64) -> Result<(f64, f64)> {
    check_positive("nu", nu)?;
    check_positive("t", t)?;
    check_positive("c1", c1)?;
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let b = c1 * t / nu;
    let low = 2.0 * integrate(|k| (-b * k * k).exp(), 0.0, nu, K_INTEGRAL_RTOL, 0.0)?;

    let mf = m as f64;
    let p = 0.5 * mf;
    let a = c1 * nu.powf(mf / (mf + 2.0)) * t;
    let u0 = nu.powf(2.0 / (mf + 2.0));
    let peak = u0.max(p / a);
    let log_f = |u: f64| p * u.ln() - a * u;
    let target = log_f(peak) + TRUNCATION.ln();
    let mut upper = peak.max(u0) * 2.0 + 1.0 / a;
    while log_f(upper) > target {
        upper *= 2.0;
    }
    let (mut lo, mut hi) = (peak, upper);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // scale out the peak value so the integrand stays O(1)
    let shift = log_f(peak);
    let f = |u: f64| (log_f(u) - shift).exp();
    let mut high = 0.0;
    if peak > u0 {
        high += integrate(f, u0, peak, K_INTEGRAL_RTOL, 0.0)?;
    }
    high += integrate(f, peak, hi, K_INTEGRAL_RTOL, 0.0)?;
    Ok((low, (mf + 2.0) * shift.exp() * high))
}

/// `C₂ (√(ν/t) + e^{-c₂ ν t} / t)`.
pub fn dispersion_envelope(nu: f64, t: f64, c2: f64, big_c2: f64) -> f64 {
    big_c2 * ((nu / t).sqrt() + (-c2 * nu * t).exp() / t)
}

/// `e^{-½c₁νt} ∫_{|k|>ν} e^{-½c₁ν^{m/(m+2)}|k|^{2/(m+2)}t} dk`, an upper
/// bound for the high part because `Λ_{ν,k} ≥ ν` when `|k| ≥ ν`.
pub fn factorized_high_bound(nu: f64, t: f64, m: usize, c1: f64) -> Result<f64> {
    let (_, half) = k_integral(nu, t, m, 0.5 * c1)?;
    Ok((-0.5 * c1 * nu * t).exp() * half)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispersionReport {
    pub nu: f64,
    pub m: usize,
    pub times: Vec<f64>,
    pub i_low: Vec<f64>,
    pub i_high: Vec<f64>,
    pub envelope: Vec<f64>,
    /// `(I_low + I_high) / envelope` per time.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// `I_high t e^{½c₁νt}`: bounded when the high part decays like
    /// `t^{-1} e^{-½c₁νt}`.
    pub high_branch: Vec<f64>,
    pub c1_used: f64,
    pub c2_used: f64,
    pub c2_fit: f64,
}

/// Evaluates the integrals on `t_grid` and fits `C₂` so that the envelope
/// matches `I` at the first time. Does not enforce the envelope.
pub fn dispersion_report(nu: f64, m: usize, c1: f64, c2: f64, t_grid: &[f64]) -> Result<DispersionReport> {
    if t_grid.len() < 2 {
        return Err(Error::InvalidParameter("time grid needs at least two points".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || !(t_grid[0] > 0.0) {
        return Err(Error::InvalidParameter("time grid must be positive and increasing".into()));
    }
    check_positive("c1", c1)?;
    check_positive("c2", c2)?;
    if c2 > 0.5 * c1 * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("c2 = {c2} exceeds c1/2 = {}", 0.5 * c1)));
    }
    let parts = t_grid
        .par_iter()
        .map(|&t| k_integral(nu, t, m, c1))
        .collect::<Result<Vec<_>>>()?;
    let (i_low, i_high): (Vec<f64>, Vec<f64>) = parts.into_iter().unzip();
    let unit: Vec<f64> = t_grid.iter().map(|&t| dispersion_envelope(nu, t, c2, 1.0)).collect();
    let c2_fit = (i_low[0] + i_high[0]) / unit[0];
    let envelope: Vec<f64> = unit.iter().map(|u| c2_fit * u).collect();
    let ratios: Vec<f64> = (0..t_grid.len()).map(|i| (i_low[i] + i_high[i]) / envelope[i]).collect();
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let high_branch = t_grid
        .iter()
        .zip(&i_high)
        .map(|(&t, h)| h * t * (0.5 * c1 * nu * t).exp())
        .collect();
    Ok(DispersionReport {
        nu,
        m,
        times: t_grid.to_vec(),
        i_low,
        i_high,
        envelope,
        ratios,
        max_ratio,
        high_branch,
        c1_used: c1,
        c2_used: c2,
        c2_fit,
    })
}

/// [`dispersion_report`] followed by the check `I(t) ≤ 3 · envelope(t)`.
pub fn verify_dispersion(nu: f64, m: usize, c1: f64, c2: f64, t_grid: &[f64]) -> Result<DispersionReport> {
    let report = dispersion_report(nu, m, c1, c2, t_grid)?;
    if let Some(i) = report.ratios.iter().position(|&r| !(r <= ENVELOPE_FACTOR)) {
        return Err(Error::EnvelopeViolation { time: report.times[i], ratio: report.ratios[i] });
    }
    Ok(report)
}

/// Log-spaced times over `[t_min, t_max]`.
pub fn log_grid(t_min: f64, t_max: f64, count: usize) -> Vec<f64> {
    let (a, b) = (t_min.ln(), t_max.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_arithmetic() {
        let e = dispersion_envelope(1e-2, 1.0, 1.0, 1.0);
        assert!((e - (0.1 + (-0.01f64).exp())).abs() < 1e-15);
        assert!((e - 1.0900).abs() < 1e-4);
    }

    #[test]
    fn low_part_limits() {
        let (low, _) = k_integral(1e-3, 1e-9, 2, 1.0).unwrap();
        assert!((low / 2e-3 - 1.0).abs() < 1e-8);
        let nu = 1e-3;
        let t = 1e6;
        let (low, _) = k_integral(nu, t, 2, 1.0).unwrap();
        assert!((low / (std::f64::consts::PI * nu / t).sqrt() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn high_part_closed_form_m2() {
        // (m+2) ∫_{u0}^∞ u e^{-a u} du = 4 e^{-a u0} (u0/a + 1/a²)
        let (nu, t, c1): (f64, f64, f64) = (1e-3, 1.0, 1.0);
        let a = c1 * nu.sqrt() * t;
        let u0 = nu.sqrt();
        let exact = 4.0 * (-a * u0).exp() * (u0 / a + 1.0 / (a * a));
        let (_, high) = k_integral(nu, t, 2, c1).unwrap();
        assert!((high / exact - 1.0).abs() < 1e-8);
    }

    #[test]
    fn guards() {
        assert!(matches!(dispersion_report(1e-3, 2, 1.0, 0.5, &[1.0]), Err(Error::InvalidParameter(_))));
        assert!(matches!(dispersion_report(1e-3, 2, 1.0, 0.6, &[1.0, 2.0]), Err(Error::InvalidParameter(_))));
    }
}
