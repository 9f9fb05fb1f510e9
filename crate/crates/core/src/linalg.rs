//! Dense numerical kernels shared by the operator, pseudospectral and
//! semigroup modules: Gauss-Legendre rules, barycentric interpolation, the
//! matrix exponential and an L-stable implicit one-step map.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Inverse, JobSvd, SVDDC};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = theta.cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Barycentric weights for Gauss-Legendre nodes, `(-1)^j sqrt((1 - x_j^2) w_j)`.
pub fn gauss_barycentric_weights(nodes: &[f64], weights: &[f64]) -> Vec<f64> {
    nodes
        .iter()
        .zip(weights)
        .enumerate()
        .map(|(j, (&x, &w))| {
            let s = ((1.0 - x * x) * w).sqrt();
            if j % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .collect()
}

/// Row vector of barycentric interpolation coefficients at `x`.
pub fn interpolation_row(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    if let Some(j) = nodes.iter().position(|&xj| xj == x) {
        let mut row = vec![0.0; nodes.len()];
        row[j] = 1.0;
        return row;
    }
    let terms: Vec<f64> = nodes.iter().zip(bary).map(|(&xj, &b)| b / (x - xj)).collect();
    let total: f64 = terms.iter().sum();
    terms.into_iter().map(|t| t / total).collect()
}

/// First-derivative collocation matrix of the polynomial interpolant through
/// `nodes`. Diagonal entries use the negative-sum identity so that constants
/// are differentiated to zero up to rounding in the row sums only.
pub fn differentiation_matrix(nodes: &[f64], bary: &[f64]) -> Array2<f64> {
    let n = nodes.len();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[[i, j]] = v;
                diag -= v;
            }
        }
        d[[i, i]] = diag;
    }
    d
}

fn one_norm(a: &Array2<C64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, C64::new(1.0, 0.0))
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA13: f64 = 5.371920351148152;

/// Numerator and denominator parts `U`, `V` of the diagonal Padé
/// approximant `(V + U)/(V - U)` to `e^{A/2^s}`, and the scaling power `s`
/// (Higham's 2005 parameter choice, degrees 3 to 13).
fn pade_parts(a: &Array2<C64>) -> Result<(Array2<C64>, Array2<C64>, u32)> {
    let n = a.nrows();
    let eye = identity(n);
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::DecompositionFailure("non-finite matrix in expm".into()));
    }
    let a2 = a.dot(a);
    for &(m, theta) in &THETA {
        if norm <= theta {
            let b: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let mut powers = vec![eye.clone(), a2.clone()];
            while powers.len() <= m / 2 {
                let next = powers.last().unwrap().dot(&a2);
                powers.push(next);
            }
            let mut u_inner = Array2::<C64>::zeros((n, n));
            let mut v = Array2::<C64>::zeros((n, n));
            for (j, p) in powers.iter().enumerate() {
                u_inner.scaled_add(C64::from(b[2 * j + 1]), p);
                v.scaled_add(C64::from(b[2 * j]), p);
            }
            return Ok((a.dot(&u_inner), v, 0));
        }
    }

    let s = ((norm / THETA13).log2().ceil()).max(0.0) as i32;
    let scale = C64::from(0.5f64.powi(s));
    let a = a.mapv(|z| z * scale);
    let a2 = a2.mapv(|z| z * scale * scale);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let b = PADE13.map(C64::from);

    let mut inner = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    inner = a6.dot(&inner) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &eye * b[1];
    let u = a.dot(&inner);
    let mut v = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    v = a6.dot(&v) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &eye * b[0];
    Ok((u, v, s as u32))
}

/// Matrix exponential by scaling and squaring with diagonal Padé
/// approximants.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let (u, v, s) = pade_parts(a)?;
    let mut r = pade_quotient(&u, &v)?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// `e^A - I`. The Padé quotient minus the identity is `2 (V - U)^{-1} U`,
/// and squaring goes through [`square_increment`], so eigenvalues of `e^A`
/// close to 1 keep their relative accuracy. Entries of `e^A` far below 1
/// only carry absolute accuracy.
pub fn expm_increment(a: &Array2<C64>) -> Result<Array2<C64>> {
    let (u, v, s) = pade_parts(a)?;
    let f = (&v - &u).inv()?.dot(&u) * C64::from(2.0);
    Ok(square_increment(f, s))
}

fn pade_quotient(u: &Array2<C64>, v: &Array2<C64>) -> Result<Array2<C64>> {
    let q = v - u;
    let p = v + u;
    Ok(q.inv()?.dot(&p))
}

/// Poles and residues of the stability function of the three-stage Radau IIA
/// method, `R(z) = (1 + 2z/5 + z^2/20) / (1 - 3z/5 + 3z^2/20 - z^3/60)`,
/// written as `sum_i c_i / (z - p_i)`.
pub const RADAU_POLES: [(f64, f64); 3] = [
    (2.6810828736277514, -3.0504301992474123),
    (2.6810828736277514, 3.0504301992474123),
    (3.637834252744497, 0.0),
];
pub const RADAU_RESIDUES: [(f64, f64); 3] = [
    (7.648749087422906, -4.171640244747433),
    (7.648749087422906, 4.171640244747433),
    (-18.297498174845835, 0.0),
];

/// Scalar Radau IIA stability function from the partial-fraction form.
pub fn radau_stability(z: C64) -> C64 {
    RADAU_POLES
        .iter()
        .zip(&RADAU_RESIDUES)
        .map(|(&(pr, pi), &(cr, ci))| C64::new(cr, ci) / (z - C64::new(pr, pi)))
        .sum()
}

/// One-step map `R(-h K)` of the Radau IIA method applied to `g' = -K g`.
/// The poles sit in the right half plane, so for accretive `K` every
/// resolvent `(h K + p_i)^{-1}` has norm at most `1 / Re p_i`.
pub fn radau_step_matrix(k: &Array2<C64>, h: f64) -> Result<Array2<C64>> {
    let n = k.nrows();
    let mut out = Array2::<C64>::zeros((n, n));
    for (&(pr, pi), &(cr, ci)) in RADAU_POLES.iter().zip(&RADAU_RESIDUES) {
        let mut shifted = k.mapv(|z| z * h);
        let p = C64::new(pr, pi);
        for i in 0..n {
            shifted[[i, i]] += p;
        }
        // c / (-hK - p) = -c (hK + p)^{-1}
        out.scaled_add(-C64::new(cr, ci), &shifted.inv()?);
    }
    Ok(out)
}

/// `R(-h K) - I` without cancellation: since `R(0) = 1`,
/// `R(-hK) - I = sum_i (c_i / p_i) (hK + p_i)^{-1} hK`.
pub fn radau_step_increment(k: &Array2<C64>, h: f64) -> Result<Array2<C64>> {
    let n = k.nrows();
    let hk = k.mapv(|z| z * h);
    let mut out = Array2::<C64>::zeros((n, n));
    for (&(pr, pi), &(cr, ci)) in RADAU_POLES.iter().zip(&RADAU_RESIDUES) {
        let p = C64::new(pr, pi);
        let mut shifted = hk.clone();
        for i in 0..n {
            shifted[[i, i]] += p;
        }
        out.scaled_add(C64::new(cr, ci) / p, &shifted.inv()?.dot(&hk));
    }
    Ok(out)
}

/// `(I + F)^(2^levels) - I`, squaring in the increment so that eigenvalues
/// close to 1 keep their relative accuracy.
pub fn square_increment(mut f: Array2<C64>, levels: u32) -> Array2<C64> {
    for _ in 0..levels {
        f = f.dot(&f) + &f * C64::from(2.0);
    }
    f
}

/// Smallest singular value of a square complex matrix.
pub fn smallest_singular_value(a: &Array2<C64>) -> Result<f64> {
    let (_, s, _) = a.svddc(JobSvd::None)?;
    s.iter()
        .copied()
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))))
        .ok_or_else(|| Error::DecompositionFailure("empty matrix".into()))
}

pub fn inverse(a: &Array2<C64>) -> Result<Array2<C64>> {
    Ok(a.inv()?)
}

/// Eigenvalues and right eigenvectors of a general complex matrix.
pub fn eigen_decomposition(a: &Array2<C64>) -> Result<(Array1<C64>, Array2<C64>)> {
    Ok(a.eig()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [8usize, 17, 64, 192] {
            let (x, w) = gauss_legendre(n);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n} sum={total}");
            // degree 2n-2 monomial
            let d = 2 * n - 2;
            let approx: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(d as i32)).sum();
            let exact = 2.0 / (d as f64 + 1.0);
            assert!((approx - exact).abs() < 1e-12 * exact.max(1.0), "n={n}");
        }
    }

    #[test]
    fn differentiation_is_exact_on_polynomials() {
        let (x, w) = gauss_legendre(12);
        let b = gauss_barycentric_weights(&x, &w);
        let d = differentiation_matrix(&x, &b);
        let f: Array1<f64> = x.iter().map(|t| t.powi(5) - 2.0 * t).collect();
        let df = d.dot(&f);
        for (i, t) in x.iter().enumerate() {
            assert!((df[i] - (5.0 * t.powi(4) - 2.0)).abs() < 1e-11);
        }
        let row = interpolation_row(&x, &b, 1.0);
        let at_one: f64 = row.iter().zip(&f).map(|(r, v)| r * v).sum();
        assert!((at_one + 1.0).abs() < 1e-12);
    }

    #[test]
    fn expm_matches_scalar_and_diagonal_cases() {
        let mut a = Array2::<C64>::zeros((3, 3));
        a[[0, 0]] = C64::new(-0.01, 0.3);
        a[[1, 1]] = C64::new(-2.0, -1.0);
        a[[2, 2]] = C64::new(-40.0, 25.0);
        let e = expm(&a).unwrap();
        for i in 0..3 {
            let want = a[[i, i]].exp();
            assert!((e[[i, i]] - want).norm() < 1e-13 * want.norm().max(1e-300) + 1e-300);
        }
        // nilpotent Jordan block: exp([[0,1],[0,0]]) = [[1,1],[0,1]]
        let mut j = Array2::<C64>::zeros((2, 2));
        j[[0, 1]] = C64::new(1.0, 0.0);
        let ej = expm(&j).unwrap();
        assert!((ej[[0, 1]] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn radau_partial_fractions_match_rational_form() {
        for &(re, im) in &[(-0.3, 0.2), (-5.0, 1.0), (0.1, -2.0)] {
            let z = C64::new(re, im);
            let p = C64::new(1.0, 0.0) + z * 0.4 + z * z / 20.0;
            let q = C64::new(1.0, 0.0) - z * 0.6 + z * z * 0.15 - z * z * z / 60.0;
            assert!((radau_stability(z) - p / q).norm() < 1e-13);
        }
        // L-stability
        assert!(radau_stability(C64::new(-1e8, 0.0)).norm() < 1e-7);
        // order 5: error ~ z^6
        let z = C64::new(-0.01, 0.01);
        assert!((radau_stability(z) - z.exp()).norm() < 1e-13);
    }
}
