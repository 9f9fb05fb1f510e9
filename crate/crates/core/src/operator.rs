//! Radial discretization of `(1/r) ∂_r (r ∂_r) - ℓ²/r²` on the disc of
//! radius `R` with a Neumann condition at `r = R`, and assembly of the mode
//! operator `H = -ν Δ + i k v(r)`.
//!
//! The scheme is a Galerkin method in the variable `s = r²`. A mode-`ℓ`
//! function is represented as `g(r) = r^|ℓ| p(r²)` with `p` a polynomial of
//! degree `n - 1`, which builds the regularity at the origin into the trial
//! space (even extension for `ℓ = 0`, `g(0) = 0` otherwise). Unknowns are the
//! nodal values of `g` at the Gauss-Legendre points in `s`, so no node sits at
//! `r = 0`. The Dirichlet form
//!
//! ```text
//! a(g, g) = ∫ (|g_r|² + ℓ²|g|²/r²) r dr = |ℓ| R^{2|ℓ|} |p(R²)|² + 2 ∫ s^{|ℓ|+1} |p'(s)|² ds
//! ```
//!
//! is evaluated exactly by the same Gauss rule (for `|ℓ| <= 2`), and the
//! Neumann condition is natural. The mass matrix is the diagonal of
//! quadrature weights for `r dr`, so the discrete Laplacian is self-adjoint
//! and nonpositive in the weighted inner product.

use std::io::Write;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{
    differentiation_matrix, gauss_barycentric_weights, gauss_legendre, interpolation_row, C64,
};
use crate::profiles::VelocityProfile;

pub const MIN_GRID_SIZE: usize = 8;

/// Collocation nodes on `(0, R]` with quadrature weights for `r dr`.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    quad_weights: Vec<f64>,
    radius: f64,
    ell: i32,
    /// Gauss-Legendre nodes on `[-1, 1]`, `s = R² (1 + x) / 2`.
    ref_nodes: Vec<f64>,
    ref_weights: Vec<f64>,
    bary: Vec<f64>,
}

/// Builds the grid for `n` nodes. The nodes do not depend on `ell`; it is
/// stored so that interpolation and the Dirichlet form use the matching
/// origin behavior.
pub fn build_grid(radius: f64, n: usize, ell: i32) -> Result<RadialGrid> {
    if n < MIN_GRID_SIZE {
        return Err(Error::InvalidSize(n));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let (x, w) = gauss_legendre(n);
    let bary = gauss_barycentric_weights(&x, &w);
    let nodes = x.iter().map(|&xi| radius * (0.5 * (1.0 + xi)).sqrt()).collect();
    let r2 = radius * radius;
    // ∫_0^R f r dr = (1/2) ∫_0^{R²} f ds = (R²/4) ∫_{-1}^{1} f dx
    let quad_weights = w.iter().map(|&wi| 0.25 * r2 * wi).collect();
    Ok(RadialGrid { nodes, quad_weights, radius, ell, ref_nodes: x, ref_weights: w, bary })
}

impl RadialGrid {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn ell(&self) -> i32 {
        self.ell
    }

    /// `∫_0^R f r dr` from nodal values.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.quad_weights).map(|(a, w)| a * w).sum()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.size() {
            return Err(Error::SizeMismatch { expected: self.size(), got: len });
        }
        Ok(())
    }

    /// Evaluates the trial-space interpolant of nodal values `g` at `r`.
    pub fn interpolate(&self, g: &[C64], r: f64) -> Result<C64> {
        self.check_len(g.len())?;
        let l = self.ell.unsigned_abs() as i32;
        let x = 2.0 * (r / self.radius).powi(2) - 1.0;
        let row = interpolation_row(&self.ref_nodes, &self.bary, x);
        let p: C64 = row
            .iter()
            .zip(g)
            .zip(&self.nodes)
            .map(|((c, gj), rj)| gj * (c / rj.powi(l)))
            .sum();
        Ok(p * r.powi(l))
    }

    /// `∫_a^b |g|² r dr` of the interpolant, by a Gauss rule in `s` that is
    /// exact for the trial space when `|ℓ| <= 1`.
    pub fn integrate_sq_over(&self, g: &[C64], a: f64, b: f64) -> Result<f64> {
        self.check_len(g.len())?;
        let (a, b) = (a.max(0.0), b.min(self.radius));
        if b <= a {
            return Ok(0.0);
        }
        let (sa, sb) = (a * a, b * b);
        let (x, w) = gauss_legendre(self.size() + 2);
        let mut total = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let s = sa + 0.5 * (sb - sa) * (1.0 + xi);
            total += wi * self.interpolate(g, s.sqrt())?.norm_sqr();
        }
        Ok(0.25 * (sb - sa) * total)
    }
}

/// Symmetric positive semidefinite matrix of the Dirichlet form `a(g, h)`
/// on nodal values.
pub fn assemble_stiffness(grid: &RadialGrid, ell: i32) -> Array2<f64> {
    let n = grid.size();
    let l = ell.unsigned_abs() as i32;
    let r2 = grid.radius * grid.radius;
    // d/ds = (2 / R²) d/dx
    let d = differentiation_matrix(&grid.ref_nodes, &grid.bary).mapv(|v| v * 2.0 / r2);
    let weights: Array1<f64> = grid
        .ref_nodes
        .iter()
        .zip(&grid.ref_weights)
        .map(|(&x, &w)| {
            let s = 0.5 * r2 * (1.0 + x);
            // 2 * (ds weight) * s^{l+1}
            2.0 * (0.5 * r2 * w) * s.powi(l + 1)
        })
        .collect();
    let wd = &d * &weights.view().insert_axis(ndarray::Axis(1));
    let mut a = d.t().dot(&wd);
    if l > 0 {
        let e = interpolation_row(&grid.ref_nodes, &grid.bary, 1.0);
        let c = l as f64 * grid.radius.powi(2 * l);
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] += c * e[i] * e[j];
            }
        }
        // p_j = g_j / r_j^l
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] /= grid.nodes[i].powi(l) * grid.nodes[j].powi(l);
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = avg;
            a[[j, i]] = avg;
        }
    }
    a
}

/// Discrete `(1/r)∂_r(r∂_r) - ℓ²/r²` with the Neumann condition at `R`:
/// `L = -W^{-1} A` with `W` the quadrature weights and `A` the stiffness.
pub fn assemble_laplacian(grid: &RadialGrid, ell: i32) -> Array2<f64> {
    let mut a = assemble_stiffness(grid, ell);
    for (i, mut row) in a.rows_mut().into_iter().enumerate() {
        let w = grid.quad_weights[i];
        row.mapv_inplace(|v| -v / w);
    }
    a
}

/// `Σ conj(g1_j) g2_j w_j ≈ ∫_0^R conj(g1) g2 r dr`. The angular factor 2π is
/// omitted throughout.
pub fn weighted_inner(g1: &[C64], g2: &[C64], grid: &RadialGrid) -> Result<C64> {
    grid.check_len(g1.len())?;
    grid.check_len(g2.len())?;
    Ok(g1.iter().zip(g2).zip(&grid.quad_weights).map(|((a, b), w)| a.conj() * b * w).sum())
}

pub fn weighted_norm(g: &[C64], grid: &RadialGrid) -> Result<f64> {
    Ok(weighted_inner(g, g, grid)?.re.max(0.0).sqrt())
}

/// `H = -ν Δ_ℓ + i k v(r)` at fixed `(ν, k, ℓ)`, on nodal values.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    pub matrix: Array2<C64>,
    pub nu: f64,
    pub k: f64,
    pub ell: i32,
    pub grid: RadialGrid,
    pub laplacian: Array2<f64>,
    /// Dirichlet-form matrix, `-W L`.
    pub stiffness: Array2<f64>,
    /// `v(r_j)` at the nodes.
    pub velocity: Vec<f64>,
    /// Exact `(min v, max v)` on `[0, R]`.
    pub velocity_range: (f64, f64),
    /// Nondegeneracy order of the profile.
    pub order: usize,
    /// `W^{1/2} H W^{-1/2}`: the same operator in coordinates where the
    /// weighted inner product is Euclidean.
    pub symmetrized: Array2<C64>,
}

pub fn assemble_operator(
    grid: &RadialGrid,
    profile: &VelocityProfile,
    nu: f64,
    k: f64,
    ell: i32,
) -> Result<ModeOperator> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
    }
    if !k.is_finite() {
        return Err(Error::InvalidParameter("k must be finite".into()));
    }
    if (profile.radius() - grid.radius()).abs() > 1e-14 * grid.radius() {
        return Err(Error::InvalidParameter("profile and grid radii differ".into()));
    }
    let n = grid.size();
    let stiffness = assemble_stiffness(grid, ell);
    let laplacian = assemble_laplacian(grid, ell);
    let velocity: Vec<f64> = grid.nodes.iter().map(|&r| profile.eval(r)).collect();

    let mut matrix = laplacian.mapv(|v| C64::new(-nu * v, 0.0));
    let sqrt_w: Vec<f64> = grid.quad_weights.iter().map(|w| w.sqrt()).collect();
    let mut symmetrized = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            symmetrized[[i, j]] = C64::new(nu * stiffness[[i, j]] / (sqrt_w[i] * sqrt_w[j]), 0.0);
        }
        matrix[[i, i]] += C64::new(0.0, k * velocity[i]);
        symmetrized[[i, i]] += C64::new(0.0, k * velocity[i]);
    }
    Ok(ModeOperator {
        matrix,
        nu,
        k,
        ell,
        grid: grid.clone(),
        laplacian,
        stiffness,
        velocity,
        velocity_range: profile.range(),
        order: profile.order(),
        symmetrized,
    })
}

impl ModeOperator {
    pub fn size(&self) -> usize {
        self.grid.size()
    }

    /// `H g`.
    pub fn apply(&self, g: &[C64]) -> Result<Vec<C64>> {
        self.apply_shifted(g, 0.0)
    }

    /// `H_λ g = (H - i k λ) g`.
    pub fn apply_shifted(&self, g: &[C64], lambda: f64) -> Result<Vec<C64>> {
        self.grid.check_len(g.len())?;
        let gv = Array1::from(g.to_vec());
        let mut out = self.matrix.dot(&gv);
        let shift = C64::new(0.0, self.k * lambda);
        out.iter_mut().zip(g).for_each(|(o, gi)| *o -= shift * gi);
        Ok(out.to_vec())
    }

    /// Discrete `‖∇g‖² = ∫ (|g_r|² + ℓ²|g|²/r²) r dr`.
    pub fn gradient_norm_sq(&self, g: &[C64]) -> Result<f64> {
        dirichlet_form(&self.stiffness, g, &self.grid)
    }

    /// Nodal values to symmetrized coordinates, `h_j = sqrt(w_j) g_j`.
    pub fn to_symmetric(&self, g: &[C64]) -> Result<Array1<C64>> {
        self.grid.check_len(g.len())?;
        Ok(g.iter().zip(&self.grid.quad_weights).map(|(x, w)| x * w.sqrt()).collect())
    }

    pub fn from_symmetric(&self, h: &Array1<C64>) -> Vec<C64> {
        h.iter().zip(&self.grid.quad_weights).map(|(x, w)| x / w.sqrt()).collect()
    }

    /// Writes the nodal matrix as a MatrixMarket coordinate file with
    /// one-based `row col re im` entries.
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.size();
        writeln!(out, "%%MatrixMarket matrix coordinate complex general")?;
        writeln!(out, "% H = -nu*Lap + i*k*v(r); nu={:e} k={:e} ell={}", self.nu, self.k, self.ell)?;
        writeln!(out, "{n} {n} {}", n * n)?;
        for i in 0..n {
            for j in 0..n {
                let z = self.matrix[[i, j]];
                writeln!(out, "{} {} {:.17e} {:.17e}", i + 1, j + 1, z.re, z.im)?;
            }
        }
        Ok(())
    }
}

pub(crate) fn dirichlet_form(stiffness: &Array2<f64>, g: &[C64], grid: &RadialGrid) -> Result<f64> {
    grid.check_len(g.len())?;
    let n = g.len();
    let mut total = C64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = C64::new(0.0, 0.0);
        for j in 0..n {
            row += g[j] * stiffness[[i, j]];
        }
        total += g[i].conj() * row;
    }
    Ok(total.re)
}

/// `‖∇g‖²` for nodal values on a grid, using the grid's own `ℓ`.
pub fn gradient_norm_sq(grid: &RadialGrid, g: &[C64]) -> Result<f64> {
    dirichlet_form(&assemble_stiffness(grid, grid.ell()), g, grid)
}
