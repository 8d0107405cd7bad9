use serde::Serialize;

use super::basis::EigenBasis;
use crate::moebius::{moebius_map_into, BallPoint};
use crate::numerics::symmetric_eigendecomposition;
use crate::sphere::{GridFunction, ProductGrid, RadialProfile};
use crate::{Error, Result};

/// Coordinate functions `X_{e_a}∘φ_ξ`, `a = 0..=n`, with gradients from the
/// closed-form differential `dφ_ξ(t) = s·R_y t`, `y = x + ξ`,
/// `s = (1 − |ξ|²)/|y|²`, `R_y` the reflection across `y^⊥`.
pub fn rotated_coordinates(xi: &BallPoint, grid: &ProductGrid) -> Result<Vec<GridFunction>> {
    let d = grid.n + 1;
    if xi.dim() != d {
        return Err(Error::domain(format!("ξ lives in R^{} but the grid is on S^{}", xi.dim(), grid.n)));
    }
    let xi = xi.coords();
    let mut out: Vec<GridFunction> = (0..d).map(|_| GridFunction::zeros(grid)).collect();
    let mut img = vec![0.0; d];
    let mut y = vec![0.0; d];
    for i in 0..grid.len() {
        let x = grid.point(i);
        let s = moebius_map_into(xi, x, &mut img);
        let mut y2 = 0.0;
        for k in 0..d {
            y[k] = x[k] + xi[k];
            y2 += y[k] * y[k];
        }
        for (a, fun) in out.iter_mut().enumerate() {
            fun.values[i] = img[a];
            // s·P_x(R_y e_a)
            let mut g: Vec<f64> = (0..d).map(|k| -2.0 * y[a] * y[k] / y2).collect();
            g[a] += 1.0;
            let gx: f64 = g.iter().zip(x).map(|(p, q)| p * q).sum();
            for k in 0..d {
                fun.grad[i * d + k] = s * (g[k] - gx * x[k]);
            }
        }
    }
    Ok(out)
}

/// `G_q` in the standard basis of `R^{n+1}` and its diagonalization.
#[derive(Debug, Clone, Serialize)]
pub struct BilinearForm {
    pub matrix: Vec<Vec<f64>>,
    /// `max |G − Gᵀ|` before symmetrization.
    pub asymmetry: f64,
    pub eigenvalues: Vec<f64>,
    /// Orthonormal `e_i` with `G_q(e_i, e_j) = 0` for `i ≠ j`.
    pub eigvecs: Vec<Vec<f64>>,
    /// `max_{i≠j} |G_q(e_i, e_j)|` recomputed from the matrix.
    pub offdiag: f64,
    /// Frobenius norm.
    pub norm: f64,
}

/// `G_q(v, w) = λ·∫ X_v∘φ X_w∘φ dμ_q − ∫ ∇(X_v∘φ·u)·∇(X_w∘φ·u) dv_g` with
/// `u = Σ q_i f_i` and `λ = lambda_next`.
pub fn assemble_bilinear_form(q: &[f64], xi: &BallPoint, basis: &EigenBasis, lambda_next: f64) -> Result<BilinearForm> {
    if q.len() != basis.len() {
        return Err(Error::domain(format!("q has {} coordinates for a basis of {}", q.len(), basis.len())));
    }
    let grid = &basis.grid;
    let coords = rotated_coordinates(xi, grid)?;
    let u = basis.combine(q);
    let u2: Vec<f64> = u.values.iter().map(|v| v * v).collect();
    let products: Vec<GridFunction> = coords.iter().map(|v| v.product(&u)).collect();
    let d = coords.len();
    let mut g = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in 0..d {
            let mass: f64 = (0..grid.len()).map(|i| coords[a].values[i] * coords[b].values[i] * u2[i] * grid.weights[i]).sum();
            g[a][b] = lambda_next * mass - grid.gradient_inner(&products[a], &products[b]);
        }
    }
    let mut asymmetry: f64 = 0.0;
    for a in 0..d {
        for b in 0..a {
            asymmetry = asymmetry.max((g[a][b] - g[b][a]).abs());
        }
    }
    let eig = symmetric_eigendecomposition(&g);
    let sym: Vec<Vec<f64>> = (0..d).map(|a| (0..d).map(|b| 0.5 * (g[a][b] + g[b][a])).collect()).collect();
    let mut offdiag: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let v: f64 = (0..d).map(|a| (0..d).map(|b| eig.vectors[i][a] * sym[a][b] * eig.vectors[j][b]).sum::<f64>()).sum();
                offdiag = offdiag.max(v.abs());
            }
        }
    }
    let norm = sym.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    Ok(BilinearForm { matrix: sym, asymmetry, eigenvalues: eig.values, eigvecs: eig.vectors, offdiag, norm })
}

/// Relative defect of `∫|∇(vu)|² = ∫ v²·u·Δ_g u + ∫ u²|∇v|²` for
/// `u = Σ c_i f_i`, with `Δ_g u` taken from the eigen-expansion.
pub fn product_rule_residual(basis: &EigenBasis, u_coeffs: &[f64], v: &GridFunction) -> Result<f64> {
    if u_coeffs.len() != basis.len() || v.values.len() != basis.grid.len() {
        return Err(Error::domain("coefficient or sample count does not match the basis"));
    }
    let grid = &basis.grid;
    let u = basis.combine(u_coeffs);
    let lap = basis.laplacian_of(u_coeffs);
    let vu = v.product(&u);
    let lhs = grid.gradient_inner(&vu, &vu);
    let first: f64 = (0..grid.len()).map(|i| v.values[i] * v.values[i] * u.values[i] * lap[i] * grid.weights[i]).sum();
    let gv = v.grad_norm_sq(grid);
    let second: f64 = (0..grid.len()).map(|i| u.values[i] * u.values[i] * gv[i] * grid.weights[i]).sum();
    let defect = (lhs - first - second).abs();
    Ok(if lhs > 0.0 { defect / lhs } else { defect })
}

pub const ENERGY_THETA_POINTS: usize = 160;
pub const ENERGY_FIBER_DEGREE: usize = 120;

/// `(∫ (Σ_i |∇(X_{e_i}∘φ_ξ)|²)^{n/2} dv₀)^{2/n}` on the round sphere.
pub fn conformal_energy(xi: &BallPoint, n: usize) -> Result<f64> {
    conformal_energy_with(xi, n, ENERGY_THETA_POINTS, ENERGY_FIBER_DEGREE)
}

pub fn conformal_energy_with(xi: &BallPoint, n: usize, theta_points: usize, fiber_degree: usize) -> Result<f64> {
    if xi.norm() > 0.9 {
        return Err(Error::domain(format!("|ξ| = {} exceeds 0.9", xi.norm())));
    }
    let grid = ProductGrid::new(&RadialProfile::round(n)?, theta_points, fiber_degree)?;
    let coords = rotated_coordinates(xi, &grid)?;
    let mut total = vec![0.0; grid.len()];
    for c in &coords {
        for (t, g) in total.iter_mut().zip(c.grad_norm_sq(&grid)) {
            *t += g;
        }
    }
    let half = n as f64 / 2.0;
    let integral: f64 = total.iter().zip(&grid.weights).map(|(t, w)| t.powf(half) * w).sum();
    Ok(integral.powf(1.0 / half))
}
