//! Pseudospectral abscissa `Ψ(H) = inf_λ σ_min(H - i k λ)` and numerical
//! audits of the resolvent estimate's ingredients.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{smallest_singular_value, C64};
use crate::operator::{dirichlet_form, weighted_norm, ModeOperator, RadialGrid};
use crate::profiles::{VelocityProfile, DEFAULT_DELTA0};
use crate::semigroup::lambda_rate;

pub const DEFAULT_LAMBDA_SAMPLES: usize = 129;
pub const MIN_LAMBDA_SAMPLES: usize = 33;

/// Smallest singular value of `H - i k λ` in the weighted norm.
pub fn sigma_min_at(op: &ModeOperator, lambda: f64) -> Result<f64> {
    let mut m: Array2<C64> = op.symmetrized.clone();
    let shift = C64::new(0.0, op.k * lambda);
    for i in 0..m.nrows() {
        m[[i, i]] -= shift;
    }
    smallest_singular_value(&m)
}

#[derive(Clone, Debug)]
pub struct SigmaCurve {
    pub lambdas: Vec<f64>,
    pub sigmas: Vec<f64>,
    /// `(λ*, σ*)` after golden-section refinement.
    pub refined_min: (f64, f64),
}

#[derive(Clone, Debug)]
pub struct PsaResult {
    pub psi: f64,
    pub argmin: f64,
    pub curve: SigmaCurve,
    /// `Ψ / Λ_{ν,k}`; `None` when `k = 0`.
    pub c1_effective: Option<f64>,
}

/// Default golden-section tolerance on `λ`.
pub fn default_refine_tol(op: &ModeOperator) -> f64 {
    let (lo, hi) = op.velocity_range;
    (1e-6 * op.k.abs() * (hi - lo)).max(1e-12)
}

/// Uniform `λ` samples over `[min v - d/4, max v + d/4]`, `d = max v - min v`.
pub fn lambda_grid(range: (f64, f64), count: usize) -> Vec<f64> {
    let (lo, hi) = range;
    let margin = 0.25 * (hi - lo);
    let (a, b) = (lo - margin, hi + margin);
    (0..count).map(|i| a + (b - a) * i as f64 / (count - 1) as f64).collect()
}

pub fn sigma_curve(op: &ModeOperator, grid_count: usize, refine_tol: f64) -> Result<SigmaCurve> {
    if grid_count < MIN_LAMBDA_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_LAMBDA_SAMPLES} lambda samples required, got {grid_count}"
        )));
    }
    if !(refine_tol > 0.0) {
        return Err(Error::InvalidParameter("refine_tol must be positive".into()));
    }
    let lambdas = lambda_grid(op.velocity_range, grid_count);
    let sigmas = lambdas
        .par_iter()
        .map(|&l| sigma_min_at(op, l))
        .collect::<Result<Vec<f64>>>()?;
    let (imin, &smin) = sigmas
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");
    let mut best = (lambdas[imin], smin);
    if op.k != 0.0 {
        let a = lambdas[imin.saturating_sub(1)];
        let b = lambdas[(imin + 1).min(grid_count - 1)];
        let refined = golden_section(|l| sigma_min_at(op, l), a, b, refine_tol)?;
        if refined.1 < best.1 {
            best = refined;
        }
    }
    Ok(SigmaCurve { lambdas, sigmas, refined_min: best })
}

fn golden_section<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

pub fn pseudo_abscissa(op: &ModeOperator, grid_count: usize, refine_tol: f64) -> Result<PsaResult> {
    let curve = sigma_curve(op, grid_count, refine_tol)?;
    let (argmin, psi) = curve.refined_min;
    let c1_effective = if op.k == 0.0 {
        None
    } else {
        Some(psi / lambda_rate(op.nu, op.k, op.order)?)
    };
    Ok(PsaResult { psi, argmin, curve, c1_effective })
}

/// `min_λ σ_min(H - i k λ) / Λ_{ν,k}` using nondegeneracy order `m`.
pub fn resolvent_lower_bound(op: &ModeOperator, m: usize) -> Result<f64> {
    let rate = lambda_rate(op.nu, op.k, m)?;
    let psa = pseudo_abscissa(op, DEFAULT_LAMBDA_SAMPLES, default_refine_tol(op))?;
    Ok(psa.psi / rate)
}

/// Terms of the inequality
/// `∫_{[0,R]\Ẽ} |g|² ≤ ¼‖g‖² + (1/(|k|δ^m) + ν/(k²δ^{2m+2})) ‖H_λ g‖‖g‖`.
#[derive(Clone, Debug)]
pub struct AwayAudit {
    pub lhs: f64,
    pub rhs: f64,
    /// `⟨(v - λ) χ g, g⟩ / δ^m`, which dominates `lhs`.
    pub multiplier_term: f64,
    pub residual: f64,
}

/// Terms of `∫_Ẽ |g|² ≤ ½‖g‖² + (C̃δ²/ν) ‖H_λ g‖‖g‖` with `C̃ = 2C₀²`.
#[derive(Clone, Debug)]
pub struct NearAudit {
    pub lhs: f64,
    pub rhs: f64,
    pub c0: f64,
    pub residual: f64,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= DEFAULT_DELTA0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, {DEFAULT_DELTA0}], got {delta}")));
    }
    Ok(())
}

fn integral_over(grid: &RadialGrid, g: &[C64], set: &[(f64, f64)]) -> Result<f64> {
    set.iter().map(|&(a, b)| grid.integrate_sq_over(g, a, b)).sum()
}

/// `φ(s) = s` on `[-1, 1]`, `sign(s)` outside.
pub fn phi(s: f64) -> f64 {
    s.clamp(-1.0, 1.0)
}

pub fn verify_away_bound(
    op: &ModeOperator,
    profile: &VelocityProfile,
    lambda: f64,
    delta: f64,
    g: &[C64],
) -> Result<AwayAudit> {
    check_delta(delta)?;
    let grid = &op.grid;
    let m = profile.order() as i32;
    let dm = delta.powi(m);
    let (e, e_tilde) = profile.neighborhood_sets(lambda, delta)?;

    let norm = weighted_norm(g, grid)?;
    let lhs = (norm * norm - integral_over(grid, g, e_tilde.intervals())?).max(0.0);
    let h_norm = weighted_norm(&op.apply_shifted(g, lambda)?, grid)?;
    let k = op.k.abs();
    let coeff = if k == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (k * dm) + op.nu / (k * k * delta.powi(2 * m + 2))
    };
    let product = h_norm * norm;
    let rhs = 0.25 * norm * norm + if product == 0.0 { 0.0 } else { coeff * product };

    let multiplier_term = grid
        .nodes()
        .iter()
        .zip(grid.quad_weights())
        .zip(g)
        .map(|((&r, &w), gj)| {
            let dv = profile.eval(r) - lambda;
            let chi = phi(dv.signum() * e.distance(r) / dm);
            dv * chi * gj.norm_sqr() * w
        })
        .sum::<f64>()
        / dm;
    Ok(AwayAudit { lhs, rhs, multiplier_term, residual: rhs - lhs })
}

pub fn verify_near_bound(
    op: &ModeOperator,
    profile: &VelocityProfile,
    lambda: f64,
    delta: f64,
    g: &[C64],
) -> Result<NearAudit> {
    check_delta(delta)?;
    let grid = &op.grid;
    let (_, e_tilde) = profile.neighborhood_sets(lambda, delta)?;
    let covering = profile.covering(lambda, delta)?;
    let c0 = covering.constant();
    let norm = weighted_norm(g, grid)?;
    let lhs = integral_over(grid, g, e_tilde.intervals())?;
    let h_norm = weighted_norm(&op.apply_shifted(g, lambda)?, grid)?;
    let rhs = 0.5 * norm * norm + 2.0 * c0 * c0 * delta * delta / op.nu * h_norm * norm;
    Ok(NearAudit { lhs, rhs, c0, residual: rhs - lhs })
}

/// `(∫_{R1≤r≤R2} |g|² r dr, 2 (R2 - R1) ‖g‖ ‖∇g‖)`.
pub fn poincare_check(grid: &RadialGrid, g: &[C64], r1: f64, r2: f64) -> Result<(f64, f64)> {
    if !(0.0 <= r1 && r1 <= r2 && r2 <= grid.radius()) {
        return Err(Error::InvalidParameter(format!("need 0 <= R1 <= R2 <= R, got [{r1}, {r2}]")));
    }
    let lhs = grid.integrate_sq_over(g, r1, r2)?;
    let stiffness = crate::operator::assemble_stiffness(grid, grid.ell());
    let grad = dirichlet_form(&stiffness, g, grid)?.max(0.0).sqrt();
    let rhs = 2.0 * (r2 - r1) * weighted_norm(g, grid)? * grad;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{assemble_operator, build_grid};
    use crate::sampling::{random_smooth, rng_from_seed};

    fn poiseuille() -> VelocityProfile {
        VelocityProfile::new(vec![1.0, 0.0, -1.0], 1.0).unwrap()
    }

    #[test]
    fn hermitian_kernel_gives_zero_abscissa() {
        let grid = build_grid(1.0, 32, 0).unwrap();
        let op = assemble_operator(&grid, &poiseuille(), 1e-2, 0.0, 0).unwrap();
        let psa = pseudo_abscissa(&op, 33, 1e-6).unwrap();
        assert!(psa.psi < 1e-10);
        assert!(psa.c1_effective.is_none());
    }

    #[test]
    fn imaginary_part_bound_outside_range() {
        let grid = build_grid(1.0, 48, 0).unwrap();
        let op = assemble_operator(&grid, &poiseuille(), 1e-3, 2.0, 0).unwrap();
        for (lambda, d) in [(1.3, 0.3), (-0.5, 0.5)] {
            assert!(sigma_min_at(&op, lambda).unwrap() >= 2.0 * d * (1.0 - 1e-12));
        }
    }

    #[test]
    fn refined_minimum_not_above_grid() {
        let grid = build_grid(1.0, 48, 0).unwrap();
        let op = assemble_operator(&grid, &poiseuille(), 1e-3, 1.0, 0).unwrap();
        let curve = sigma_curve(&op, 33, 1e-8).unwrap();
        let gmin = curve.sigmas.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(curve.refined_min.1 <= gmin);
        assert!(matches!(sigma_curve(&op, 32, 1e-8), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn zero_vector_audits() {
        let grid = build_grid(1.0, 32, 0).unwrap();
        let p = poiseuille();
        let op = assemble_operator(&grid, &p, 1e-3, 1.0, 0).unwrap();
        let z = vec![C64::new(0.0, 0.0); 32];
        assert_eq!(verify_away_bound(&op, &p, 0.5, 0.1, &z).unwrap().residual, 0.0);
        assert_eq!(verify_near_bound(&op, &p, 0.5, 0.1, &z).unwrap().residual, 0.0);
        assert_eq!(poincare_check(&grid, &z, 0.0, 1.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn away_bound_with_empty_neighborhood() {
        let grid = build_grid(1.0, 32, 0).unwrap();
        let p = poiseuille();
        let op = assemble_operator(&grid, &p, 1e-3, 1.0, 0).unwrap();
        let mut rng = rng_from_seed(3);
        for _ in 0..20 {
            let g = random_smooth(&grid, 8, &mut rng);
            let audit = verify_away_bound(&op, &p, 1.5, 0.1, &g).unwrap();
            let n = weighted_norm(&g, &grid).unwrap();
            assert!((audit.lhs - n * n).abs() <= 1e-12 * n * n);
            assert!(audit.residual >= 0.0);
            assert!(audit.multiplier_term >= audit.lhs * (1.0 - 1e-12));
        }
    }
}
