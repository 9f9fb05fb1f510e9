//! Radial velocity profiles, their nondegeneracy order, level sets and the
//! interval coverings of level-set neighborhoods.

use crate::error::{Error, Result};
use crate::poly::Polynomial;

pub const DEFAULT_ORDER_CAP: usize = 8;
/// Largest thickness parameter accepted by [`VelocityProfile::covering`].
pub const DEFAULT_DELTA0: f64 = 0.25;

/// Relative threshold below which a derivative value counts as vanishing.
const VANISH_REL: f64 = 1e-9;

/// Polynomial profile `v(r)` on `[0, R]` together with its nondegeneracy
/// order `m`: the smallest `m` such that `v', ..., v^(m)` never vanish
/// simultaneously on `[0, R]`.
#[derive(Clone, Debug)]
pub struct VelocityProfile {
    poly: Polynomial,
    radius: f64,
    order: usize,
    order_cap: usize,
}

impl VelocityProfile {
    pub fn new(coeffs: Vec<f64>, radius: f64) -> Result<Self> {
        Self::with_order_cap(coeffs, radius, DEFAULT_ORDER_CAP)
    }

    pub fn with_order_cap(coeffs: Vec<f64>, radius: f64, order_cap: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("profile coefficients must be finite".into()));
        }
        if order_cap == 0 {
            return Err(Error::InvalidParameter("order_cap must be at least 1".into()));
        }
        let poly = Polynomial::new(coeffs);
        let order = detect_order(&poly, radius, order_cap)?;
        Ok(Self { poly, radius, order, order_cap })
    }

    pub fn coeffs(&self) -> &[f64] {
        self.poly.coeffs()
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn order_cap(&self) -> usize {
        self.order_cap
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.poly.eval(r)
    }

    pub fn derivative_at(&self, n: usize, r: f64) -> f64 {
        self.poly.nth_derivative(n).eval(r)
    }

    /// Exact `(min v, max v)` over `[0, R]`.
    pub fn range(&self) -> (f64, f64) {
        let mut pts = vec![0.0, self.radius];
        pts.extend(self.poly.derivative().real_roots(0.0, self.radius));
        pts.iter().map(|&r| self.eval(r)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
    }

    /// `sup |v|` over `[0, R]`.
    pub fn sup_norm(&self) -> f64 {
        let (lo, hi) = self.range();
        lo.abs().max(hi.abs())
    }

    /// Points of `[0, R]` where `v(r) = lambda`, located to within `tol`.
    pub fn level_set(&self, lambda: f64, tol: f64) -> Vec<f64> {
        let shifted = self.poly.minus_constant(lambda);
        if shifted.is_zero() {
            return Vec::new();
        }
        let scale = tol * self.sup_norm().max(1.0);
        shifted
            .real_roots(0.0, self.radius)
            .into_iter()
            .filter(|&r| shifted.eval(r).abs() <= scale.max(1e3 * f64::EPSILON * shifted.magnitude(self.radius)))
            .collect()
    }

    /// Lowest derivative order `n >= 1` that does not vanish at `r`.
    pub fn local_order(&self, r: f64) -> Option<usize> {
        local_order(&self.poly, r, self.radius, self.order_cap)
    }

    /// `(E, Ẽ)` where `E = {r : |v(r) - lambda| < delta^m}` and `Ẽ` is the
    /// set of points within distance `delta^m` of `E`, both inside `[0, R]`.
    pub fn neighborhood_sets(&self, lambda: f64, delta: f64) -> Result<(IntervalSet, IntervalSet)> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        let thickness = delta.powi(self.order as i32);
        let mut knots = vec![0.0, self.radius];
        for level in [lambda - thickness, lambda + thickness] {
            let p = self.poly.minus_constant(level);
            if p.is_zero() {
                return Err(Error::DegenerateProfile("profile coincides with a band edge".into()));
            }
            knots.extend(p.real_roots(0.0, self.radius));
        }
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let inside: Vec<(f64, f64)> = knots
            .windows(2)
            .filter(|w| w[1] > w[0])
            .filter(|w| (self.eval(0.5 * (w[0] + w[1])) - lambda).abs() < thickness)
            .map(|w| (w[0], w[1]))
            .collect();
        let e = IntervalSet::from_intervals(inside);
        let e_tilde = e.inflate(thickness, 0.0, self.radius);
        Ok((e, e_tilde))
    }

    /// Covering of `Ẽ` by finitely many intervals `B_{R0 δ + δ^m}(r_i)`, one
    /// per connected component of `E`, with the smallest power-of-two
    /// multiple of the starting `R0` that achieves containment.
    pub fn covering(&self, lambda: f64, delta: f64) -> Result<CoveringResult> {
        self.covering_with_threshold(lambda, delta, DEFAULT_DELTA0)
    }

    pub fn covering_with_threshold(&self, lambda: f64, delta: f64, delta0: f64) -> Result<CoveringResult> {
        if !(delta > 0.0 && delta <= delta0) {
            return Err(Error::InvalidParameter(format!(
                "covering needs 0 < delta <= {delta0}, got {delta}"
            )));
        }
        let m = self.order;
        let thickness = delta.powi(m as i32);
        let (e, e_tilde) = self.neighborhood_sets(lambda, delta)?;
        if e_tilde.is_empty() {
            return Ok(CoveringResult {
                lambda,
                delta,
                family: Vec::new(),
                total_length: 0.0,
                roots: Vec::new(),
                local_orders: Vec::new(),
                inflation_radius: 0.0,
                count: 0,
            });
        }

        let level = self.level_set(lambda, 1e-14);
        let mut anchors = Vec::new();
        let mut orders = Vec::new();
        let mut taylor_radius: f64 = 0.0;
        for &(a, b) in e.intervals() {
            let inside: Vec<f64> = level.iter().copied().filter(|&r| r >= a && r <= b).collect();
            let anchor = if inside.len() == 1 { inside[0] } else { 0.5 * (a + b) };
            let n = self.local_order(anchor).unwrap_or(m).clamp(1, m);
            // v(r) ≈ λ + a_n (r - r_i)^n
            let a_n = self.derivative_at(n, anchor) / factorial(n);
            if a_n != 0.0 {
                taylor_radius = taylor_radius.max((thickness / a_n.abs()).powf(1.0 / n as f64) / delta);
            }
            anchors.push(anchor);
            orders.push(n);
        }

        let mut r0 = taylor_radius.clamp(0.25, 1.0);
        // keeps endpoints that coincide with those of Ẽ inside after rounding
        let pad = 1e-12 * self.radius;
        for _ in 0..48 {
            let half = r0 * delta + thickness + pad;
            let family: Vec<(f64, f64)> = anchors
                .iter()
                .map(|&c| ((c - half).max(0.0), (c + half).min(self.radius)))
                .collect();
            let union = IntervalSet::from_intervals(family.clone());
            if union.contains_set(&e_tilde) {
                let total_length = family.iter().map(|(lo, hi)| hi - lo).sum();
                return Ok(CoveringResult {
                    lambda,
                    delta,
                    count: family.len(),
                    family,
                    total_length,
                    roots: anchors,
                    local_orders: orders,
                    inflation_radius: r0,
                });
            }
            r0 *= 2.0;
        }
        Err(Error::CoverageFailure { r0 })
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn local_order(poly: &Polynomial, r: f64, radius: f64, cap: usize) -> Option<usize> {
    let mut d = poly.derivative();
    for n in 1..=cap {
        if d.is_zero() {
            return None;
        }
        let scale = d.magnitude(radius);
        if d.eval(r).abs() > VANISH_REL * scale {
            return Some(n);
        }
        d = d.derivative();
    }
    None
}

/// Smallest `m <= order_cap` for which `v', ..., v^(m)` have no common zero
/// in `[0, R]`. Only the zeros of `v'` need checking; at each one the order
/// is the first non-vanishing higher derivative.
pub fn detect_order(poly: &Polynomial, radius: f64, order_cap: usize) -> Result<usize> {
    let d1 = poly.derivative();
    if d1.is_zero() {
        return Err(Error::NoValidOrder { cap: order_cap });
    }
    let mut m = 1;
    for c in d1.real_roots(0.0, radius) {
        let n = local_order(poly, c, radius, order_cap).ok_or(Error::NoValidOrder { cap: order_cap })?;
        m = m.max(n);
    }
    Ok(m)
}

/// Finite union of disjoint, sorted, nonempty intervals.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
    measure: f64,
}

impl IntervalSet {
    /// Normalizes arbitrary intervals: drops empty ones, sorts and merges
    /// overlapping or touching pieces.
    pub fn from_intervals(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|(lo, hi)| hi > lo);
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        let measure = merged.iter().map(|(lo, hi)| hi - lo).sum();
        Self { intervals: merged, measure }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Closed-set membership.
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| x >= lo && x <= hi)
    }

    /// Distance from `x` to the closure of the set; infinite when empty.
    pub fn distance(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(lo, hi)| if x < lo { lo - x } else if x > hi { x - hi } else { 0.0 })
            .fold(f64::INFINITY, f64::min)
    }

    /// Every interval of `other` lies inside one interval of `self`.
    pub fn contains_set(&self, other: &IntervalSet) -> bool {
        let slack = 1e-14 * self.intervals.last().map_or(1.0, |i| i.1.abs().max(1.0));
        other.intervals.iter().all(|&(lo, hi)| {
            self.intervals.iter().any(|&(a, b)| lo >= a - slack && hi <= b + slack)
        })
    }

    /// `{x in [lo, hi] : dist(x, self) < radius}`.
    pub fn inflate(&self, radius: f64, lo: f64, hi: f64) -> Self {
        Self::from_intervals(
            self.intervals.iter().map(|&(a, b)| ((a - radius).max(lo), (b + radius).min(hi))).collect(),
        )
    }

    /// Complement inside `[lo, hi]`.
    pub fn complement(&self, lo: f64, hi: f64) -> Self {
        let mut out = Vec::new();
        let mut cursor = lo;
        for &(a, b) in &self.intervals {
            if a > cursor {
                out.push((cursor, a.min(hi)));
            }
            cursor = cursor.max(b);
        }
        if cursor < hi {
            out.push((cursor, hi));
        }
        Self::from_intervals(out)
    }
}

/// Finite family of intervals covering `Ẽ_{λ,δ}` built around level-set
/// points.
#[derive(Clone, Debug)]
pub struct CoveringResult {
    pub lambda: f64,
    pub delta: f64,
    pub family: Vec<(f64, f64)>,
    pub total_length: f64,
    /// Anchor of each interval: the level-set point of a component of `E`
    /// when it has exactly one, its midpoint otherwise.
    pub roots: Vec<f64>,
    pub local_orders: Vec<usize>,
    pub inflation_radius: f64,
    pub count: usize,
}

impl CoveringResult {
    /// Empirical covering constant `Σ|V| / δ`.
    pub fn constant(&self) -> f64 {
        self.total_length / self.delta
    }

    pub fn contains(&self, x: f64) -> bool {
        self.family.iter().any(|&(lo, hi)| x >= lo && x <= hi)
    }
}
