//! Real polynomials in monomial form with exact derivatives and real-root
//! isolation on a closed interval.
//!
//! Root isolation recurses on the derivative: the critical points split the
//! interval into monotone pieces, each holding at most one simple root, which
//! is then bracketed by bisection. Critical points where the polynomial
//! vanishes (to a tolerance scaled by the coefficient magnitudes) are reported
//! as roots, so even-multiplicity roots are not lost.

/// Polynomial with coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as f64)
            .collect();
        Self::new(coeffs)
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// `self - c`.
    pub fn minus_constant(&self, c: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        coeffs[0] -= c;
        Self::new(coeffs)
    }

    /// Upper bound of `|p(x)|` over `|x| <= extent` from the coefficient
    /// magnitudes; used to scale "is this zero" decisions.
    pub fn magnitude(&self, extent: f64) -> f64 {
        let e = extent.abs().max(1.0);
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.abs() * e.powi(i as i32))
            .sum()
    }

    /// All real roots in `[a, b]`, sorted ascending.
    pub fn real_roots(&self, a: f64, b: f64) -> Vec<f64> {
        if self.is_zero() || a > b {
            return Vec::new();
        }
        let zero_tol = 64.0 * f64::EPSILON * self.magnitude(a.abs().max(b.abs()));
        let mut roots = match self.degree() {
            Some(0) | None => Vec::new(),
            Some(1) => {
                let r = -self.coeffs[0] / self.coeffs[1];
                if (a..=b).contains(&r) {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            Some(_) => {
                let mut knots = vec![a];
                knots.extend(self.derivative().real_roots(a, b));
                knots.push(b);
                let mut found = Vec::new();
                for w in knots.windows(2) {
                    let (lo, hi) = (w[0], w[1]);
                    if hi <= lo {
                        continue;
                    }
                    let (flo, fhi) = (self.eval(lo), self.eval(hi));
                    if flo.abs() > zero_tol && fhi.abs() > zero_tol && flo.signum() != fhi.signum()
                    {
                        found.push(self.bisect(lo, hi, flo));
                    }
                }
                for &k in &knots {
                    if self.eval(k).abs() <= zero_tol {
                        found.push(k);
                    }
                }
                found
            }
        };
        roots.sort_by(f64::total_cmp);
        let merge_tol = 1e-12 * (b - a).max(1e-300);
        roots.dedup_by(|x, y| (*x - *y).abs() <= merge_tol);
        roots
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
        let slo = flo.signum();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = self.eval(mid);
            if fm == 0.0 {
                return mid;
            }
            if fm.signum() == slo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims_and_evaluates() {
        let p = Polynomial::new(vec![1.0, 0.0, -1.0, 0.0]);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.eval(0.5), 0.75);
        assert_eq!(p.derivative().coeffs(), &[0.0, -2.0]);
        assert!(Polynomial::new(vec![0.0]).is_zero());
    }

    #[test]
    fn simple_and_double_roots() {
        // (x - 0.3)(x - 0.7) = x^2 - x + 0.21
        let p = Polynomial::new(vec![0.21, -1.0, 1.0]);
        let r = p.real_roots(0.0, 1.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 0.3).abs() < 1e-14 && (r[1] - 0.7).abs() < 1e-14);

        // (x - 0.5)^2, tangential
        let q = Polynomial::new(vec![0.25, -1.0, 1.0]);
        let r = q.real_roots(0.0, 1.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn roots_at_endpoints_and_outside() {
        let p = Polynomial::new(vec![0.0, 0.0, -1.0]);
        assert_eq!(p.real_roots(0.0, 1.0), vec![0.0]);
        let q = Polynomial::new(vec![2.0, 0.0, -1.0]);
        assert!(q.real_roots(0.0, 1.0).is_empty());
    }

    #[test]
    fn quartic_level_set() {
        // (1 - x^2)^2 - 0.25 has roots x^2 = 0.5 in [0, 1]
        let p = Polynomial::new(vec![0.75, 0.0, -2.0, 0.0, 1.0]);
        let r = p.real_roots(0.0, 1.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.5f64.sqrt()).abs() < 1e-14);
    }
}
