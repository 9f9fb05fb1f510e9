//! Bessel functions of the first kind and the zeros of their derivatives,
//! used to validate the radial Laplacian.

use std::f64::consts::PI;

/// `J_n(x) = (1/π) ∫_0^π cos(nτ - x sin τ) dτ`. The integrand extends to a
/// smooth periodic function, so the trapezoid rule converges geometrically.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let points = 64 + 2 * x.abs().ceil() as usize;
    let h = PI / points as f64;
    let f = |tau: f64| (n as f64 * tau - x * tau.sin()).cos();
    let mut sum = 0.5 * (f(0.0) + f(PI));
    for i in 1..points {
        sum += f(i as f64 * h);
    }
    sum * h / PI
}

/// `J_n'(x) = (J_{n-1}(x) - J_{n+1}(x)) / 2`.
pub fn bessel_j_prime(n: i32, x: f64) -> f64 {
    0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
}

/// First `count` positive zeros of `J_n'`, ascending. For `n = 0` the zero
/// at the origin is not included.
pub fn bessel_prime_zeros(n: i32, count: usize) -> Vec<f64> {
    let mut zeros = Vec::with_capacity(count);
    let step = 0.05;
    let mut a = 1e-3;
    let mut fa = bessel_j_prime(n, a);
    while zeros.len() < count {
        let b = a + step;
        let fb = bessel_j_prime(n, b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa.signum() != fb.signum() {
            let (mut lo, mut hi, flo) = (a, b, fa);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let fm = bessel_j_prime(n, mid);
                if fm.signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    zeros
}

/// Magnitudes of the Neumann eigenvalues of `(1/r)∂_r(r∂_r) - ℓ²/r²` on the
/// disc of radius `R`, ascending; includes `0` for `ℓ = 0`.
pub fn neumann_eigenvalues(ell: i32, radius: f64, count: usize) -> Vec<f64> {
    let n = ell.abs();
    let mut out = Vec::with_capacity(count);
    if n == 0 {
        out.push(0.0);
    }
    let need = count.saturating_sub(out.len());
    out.extend(bessel_prime_zeros(n, need).into_iter().map(|j| (j / radius).powi(2)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((bessel_j(0, 0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1, 2.5) - 0.497_094_102_464_274_5).abs() < 1e-14);
        assert!((bessel_j(-1, 2.5) + bessel_j(1, 2.5)).abs() < 1e-15);
    }

    #[test]
    fn derivative_zeros() {
        let z0 = bessel_prime_zeros(0, 2);
        assert!((z0[0] - 3.831_705_970_207_512).abs() < 1e-12);
        assert!((z0[1] - 7.015_586_669_815_619).abs() < 1e-12);
        let z1 = bessel_prime_zeros(1, 1);
        assert!((z1[0] - 1.841_183_781_340_659_3).abs() < 1e-12);
    }
}
