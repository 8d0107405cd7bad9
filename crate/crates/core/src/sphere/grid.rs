use std::f64::consts::PI;

use super::constants::check_dimension;
use super::profile::RadialProfile;
use crate::numerics::gauss_legendre_rule;
use crate::{Error, Result};

/// Quadrature on the unit sphere `S^d ⊂ R^{d+1}`; weights sum to its volume.
#[derive(Debug, Clone)]
pub struct FiberRule {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl FiberRule {
    /// Recursive product rule integrating polynomials of degree `≤ degree`.
    ///
    /// `S¹` uses equispaced points, `S²` Gauss nodes in the polar cosine, and
    /// higher spheres split off one polar angle at a time. The polar factor is
    /// exact when its weight `(1 − t²)^{(d−2)/2}` is a polynomial (even `d`)
    /// and spectrally accurate otherwise.
    pub fn new(dim: usize, degree: usize) -> FiberRule {
        assert!(dim >= 1, "fiber sphere needs dimension ≥ 1");
        if dim == 1 {
            let m = degree + 1;
            let points = (0..m)
                .map(|j| {
                    let a = 2.0 * PI * j as f64 / m as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect();
            return FiberRule { dim, points, weights: vec![2.0 * PI / m as f64; m] };
        }
        let inner = FiberRule::new(dim - 1, degree);
        let (ts, ws): (Vec<f64>, Vec<f64>) = if dim.is_multiple_of(2) {
            let weight_degree = dim - 2;
            let m = (degree + weight_degree) / 2 + 1;
            let rule = gauss_legendre_rule(m, -1.0, 1.0);
            let half = (dim as i32 - 2) / 2;
            rule.nodes.iter().zip(&rule.weights).map(|(&t, &w)| (t, w * (1.0 - t * t).powi(half))).unzip()
        } else {
            let m = degree + dim + 12;
            let rule = gauss_legendre_rule(m, 0.0, PI);
            rule.nodes.iter().zip(&rule.weights).map(|(&psi, &w)| (psi.cos(), w * psi.sin().powi(dim as i32 - 1))).unzip()
        };
        let mut points = Vec::with_capacity(ts.len() * inner.points.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for (&t, &w) in ts.iter().zip(&ws) {
            let s = (1.0 - t * t).max(0.0).sqrt();
            for (p, &wi) in inner.points.iter().zip(&inner.weights) {
                let mut q = Vec::with_capacity(dim + 1);
                q.push(t);
                q.extend(p.iter().map(|v| s * v));
                points.push(q);
                weights.push(w * wi);
            }
        }
        FiberRule { dim, points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Tensor grid on `S^n`: Gauss–Legendre in the polar angle `θ` times a fiber
/// rule on `S^{n−1}`. Points are `x = (cos θ, sin θ·ω)` in `R^{n+1}`.
#[derive(Debug, Clone)]
pub struct ProductGrid {
    pub n: usize,
    pub profile: RadialProfile,
    pub theta: Vec<f64>,
    pub fiber: FiberRule,
    /// Flattened point coordinates, stride `n + 1`.
    coords: Vec<f64>,
    /// Round volume weights `w_θ sin^{n−1}θ w_ω`.
    pub round_weights: Vec<f64>,
    /// Weights of `dv_g`.
    pub weights: Vec<f64>,
    /// `e^{−2f}` per point (converts round gradient norms to `g`).
    pub inv_e2f: Vec<f64>,
}

impl ProductGrid {
    pub fn new(profile: &RadialProfile, theta_points: usize, fiber_degree: usize) -> Result<Self> {
        let n = profile.dimension;
        check_dimension(n)?;
        if theta_points < 2 {
            return Err(Error::domain("product grid needs at least 2 polar nodes"));
        }
        let rule = gauss_legendre_rule(theta_points, 0.0, PI);
        let fiber = FiberRule::new(n - 1, fiber_degree);
        let total = rule.len() * fiber.len();
        let mut coords = Vec::with_capacity(total * (n + 1));
        let mut round_weights = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut inv_e2f = Vec::with_capacity(total);
        for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let (s, c) = t.sin_cos();
            let f = profile.value(t);
            let radial = wt * s.powi(n as i32 - 1);
            let conf = (n as f64 * f).exp();
            for (w, &ww) in fiber.points.iter().zip(&fiber.weights) {
                coords.push(c);
                coords.extend(w.iter().map(|v| s * v));
                round_weights.push(radial * ww);
                weights.push(radial * ww * conf);
                inv_e2f.push((-2.0 * f).exp());
            }
        }
        Ok(ProductGrid { n, profile: profile.clone(), theta: rule.nodes, fiber, coords, round_weights, weights, inv_e2f })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.n + 1;
        &self.coords[i * d..(i + 1) * d]
    }

    /// Flattened point coordinates, stride `n + 1`.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `(polar index, fiber index)` of a flat point index.
    pub fn split(&self, i: usize) -> (usize, usize) {
        (i / self.fiber.len(), i % self.fiber.len())
    }

    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `∫ v dv_g`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.weights).map(|((x, y), w)| x * y * w).sum()
    }

    /// Squared critical norm `(∫ |u|^{2n/(n−2)} dv_g)^{(n−2)/n}`.
    pub fn critical_norm(&self, values: &[f64]) -> f64 {
        let p = 2.0 * self.n as f64 / (self.n as f64 - 2.0);
        let s: f64 = values.iter().zip(&self.weights).map(|(v, w)| v.abs().powf(p) * w).sum();
        s.powf(2.0 / p)
    }

    /// `∫ ⟨∇a, ∇b⟩_g dv_g`.
    pub fn gradient_inner(&self, a: &GridFunction, b: &GridFunction) -> f64 {
        let d = self.n + 1;
        (0..self.len())
            .map(|i| {
                let ga = &a.grad[i * d..(i + 1) * d];
                let gb = &b.grad[i * d..(i + 1) * d];
                let dot: f64 = ga.iter().zip(gb).map(|(x, y)| x * y).sum();
                dot * self.inv_e2f[i] * self.weights[i]
            })
            .sum()
    }

    /// Unit polar direction `e_θ = (−sin θ, cos θ·ω)` at a point.
    pub fn polar_direction(&self, i: usize) -> Vec<f64> {
        let (a, b) = self.split(i);
        let (s, c) = self.theta[a].sin_cos();
        let mut e = Vec::with_capacity(self.n + 1);
        e.push(-s);
        e.extend(self.fiber.points[b].iter().map(|v| c * v));
        e
    }
}

/// Values and round-metric gradients (ambient vectors in `R^{n+1}`, stride
/// `n + 1`) of a function on a [`ProductGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub values: Vec<f64>,
    pub grad: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: &ProductGrid) -> Self {
        GridFunction { values: vec![0.0; grid.len()], grad: vec![0.0; grid.len() * (grid.n + 1)] }
    }

    pub fn constant(grid: &ProductGrid, c: f64) -> Self {
        GridFunction { values: vec![c; grid.len()], grad: vec![0.0; grid.len() * (grid.n + 1)] }
    }

    /// A function of `θ` alone, given as `θ ↦ (u, u′)`.
    pub fn radial(grid: &ProductGrid, u: impl Fn(f64) -> (f64, f64)) -> Self {
        let mut out = GridFunction::zeros(grid);
        let d = grid.n + 1;
        for i in 0..grid.len() {
            let (a, _) = grid.split(i);
            let (v, dv) = u(grid.theta[a]);
            out.values[i] = v;
            for (k, e) in grid.polar_direction(i).into_iter().enumerate() {
                out.grad[i * d + k] = dv * e;
            }
        }
        out
    }

    /// A restricted linear function `x ↦ ⟨c, x⟩`.
    pub fn linear(grid: &ProductGrid, c: &[f64]) -> Self {
        let d = grid.n + 1;
        let mut out = GridFunction::zeros(grid);
        for i in 0..grid.len() {
            let x = grid.point(i);
            let cx: f64 = c.iter().zip(x).map(|(a, b)| a * b).sum();
            out.values[i] = cx;
            for k in 0..d {
                out.grad[i * d + k] = c[k] - cx * x[k];
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        GridFunction { values: self.values.iter().map(|v| s * v).collect(), grad: self.grad.iter().map(|v| s * v).collect() }
    }

    /// `self + s·other`.
    pub fn axpy(&mut self, s: f64, other: &GridFunction) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
        for (a, b) in self.grad.iter_mut().zip(&other.grad) {
            *a += s * b;
        }
    }

    /// Pointwise product with the Leibniz gradient.
    pub fn product(&self, other: &GridFunction) -> Self {
        let d = self.grad.len() / self.values.len().max(1);
        let values: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        let mut grad = vec![0.0; self.grad.len()];
        for i in 0..self.values.len() {
            for k in 0..d {
                grad[i * d + k] = self.values[i] * other.grad[i * d + k] + other.values[i] * self.grad[i * d + k];
            }
        }
        GridFunction { values, grad }
    }

    /// `|∇u|²_g` per point.
    pub fn grad_norm_sq(&self, grid: &ProductGrid) -> Vec<f64> {
        let d = grid.n + 1;
        (0..grid.len()).map(|i| self.grad[i * d..(i + 1) * d].iter().map(|v| v * v).sum::<f64>() * grid.inv_e2f[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::sphere_volume;

    #[test]
    fn fiber_rules_integrate_constants_and_monomials() {
        for dim in 1..=4 {
            let r = FiberRule::new(dim, 6);
            let total: f64 = r.weights.iter().sum();
            assert!((total - sphere_volume(dim)).abs() < 1e-12 * total, "dim {dim}");
            // ∫ x₀² = vol/(d+1)
            let x2: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0] * p[0]).sum();
            assert!((x2 - total / (dim as f64 + 1.0)).abs() < 1e-12 * total);
            let x4: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[dim].powi(4)).sum();
            let d1 = dim as f64 + 1.0;
            assert!((x4 - 3.0 * total / (d1 * (d1 + 2.0))).abs() < 1e-12 * total);
            assert!(r.points.iter().all(|p| (p.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn product_grid_volume_matches_metric() {
        let p = RadialProfile::cosine(3, 0.3).unwrap();
        let g = ProductGrid::new(&p, 48, 6).unwrap();
        let m = crate::sphere::radial_metric_assemble(&p).unwrap();
        assert!((g.volume() - m.volume).abs() < 1e-12 * m.volume);
    }

    #[test]
    fn linear_function_gradients() {
        // ∫ |∇x₁|² = n·∫ x₁² on the round sphere
        let p = RadialProfile::round(3).unwrap();
        let g = ProductGrid::new(&p, 24, 6).unwrap();
        for c in [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]] {
            let u = GridFunction::linear(&g, &c);
            let e = g.gradient_inner(&u, &u);
            let l2 = g.inner(&u.values, &u.values);
            assert!((e - 3.0 * l2).abs() < 1e-12, "{e} vs {}", 3.0 * l2);
        }
        let r = GridFunction::radial(&g, |t| (t.cos(), -t.sin()));
        let l = GridFunction::linear(&g, &[1.0, 0.0, 0.0, 0.0]);
        assert!(r.values.iter().zip(&l.values).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(r.grad.iter().zip(&l.grad).all(|(a, b)| (a - b).abs() < 1e-14));
    }
}
