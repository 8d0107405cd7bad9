use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::numerics::{gauss_legendre_rule, generalized_symmetric_eigen};
use crate::sphere::{
    harmonic_dimension, ConformalMetric, GridFunction, ProductGrid, SphericalHarmonics, BRANCH_MERGE_TOL,
};
use crate::{Error, Result};

pub const DEFAULT_THETA_POINTS: usize = 80;
pub const DEFAULT_FIBER_DEGREE: usize = 12;
/// Gegenbauer terms per angular branch in the Ritz space.
const RITZ_TERMS: usize = 18;
/// Only the lower half of each branch's Ritz values is trusted.
const RITZ_KEEP: usize = RITZ_TERMS / 2;
const MAX_BRANCH: usize = 12;
const GRAM_TOL: f64 = 1e-8;

/// Which separated eigenfunction `T_{ℓ,r}(θ)·Y_h(ω)` a basis element is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Mode {
    pub l: usize,
    pub radial: usize,
    pub harmonic: usize,
}

/// `T(θ) = sin^ℓ θ · Σ_j c_j C_j^{(ℓ+(n−1)/2)}(cos θ)`.
#[derive(Debug, Clone)]
pub(crate) struct RadialShape {
    pub l: usize,
    pub n: usize,
    pub coeffs: Vec<f64>,
}

/// Gegenbauer values and first two derivatives `C_j, C_j′, C_j″` at `t`.
fn gegenbauer(lambda: f64, terms: usize, t: f64) -> [Vec<f64>; 3] {
    let mut c = vec![0.0; terms];
    let mut d1 = vec![0.0; terms];
    let mut d2 = vec![0.0; terms];
    c[0] = 1.0;
    if terms > 1 {
        c[1] = 2.0 * lambda * t;
        d1[1] = 2.0 * lambda;
    }
    for j in 1..terms.saturating_sub(1) {
        let a = 2.0 * (j as f64 + lambda);
        let b = j as f64 + 2.0 * lambda - 1.0;
        let k = j as f64 + 1.0;
        c[j + 1] = (a * t * c[j] - b * c[j - 1]) / k;
        d1[j + 1] = (a * (c[j] + t * d1[j]) - b * d1[j - 1]) / k;
        d2[j + 1] = (a * (2.0 * d1[j] + t * d2[j]) - b * d2[j - 1]) / k;
    }
    [c, d1, d2]
}

/// Per-term `(T, T′, T″, T/sin θ)` of the branch-`ℓ` Ritz functions.
fn ritz_terms(l: usize, n: usize, t: f64) -> Vec<[f64; 4]> {
    let (s, c) = t.sin_cos();
    let [p, dp, ddp] = gegenbauer(l as f64 + (n as f64 - 1.0) / 2.0, RITZ_TERMS, c);
    let lf = l as f64;
    let sl = s.powi(l as i32);
    let sl1 = if l == 0 { 0.0 } else { s.powi(l as i32 - 1) };
    let sl2 = if l < 2 { 0.0 } else { s.powi(l as i32 - 2) };
    (0..RITZ_TERMS)
        .map(|j| {
            let v = sl * p[j];
            let d = lf * sl1 * c * p[j] - sl * s * dp[j];
            let dd = lf * (lf - 1.0) * sl2 * c * c * p[j] - lf * sl * p[j] - (2.0 * lf + 1.0) * sl * c * dp[j]
                + sl * s * s * ddp[j];
            [v, d, dd, sl1 * p[j]]
        })
        .collect()
}

impl RadialShape {
    /// `(T, T′, T″, T/sin θ)`.
    pub fn eval(&self, t: f64) -> [f64; 4] {
        let terms = ritz_terms(self.l, self.n, t);
        let mut out = [0.0; 4];
        for (c, tj) in self.coeffs.iter().zip(&terms) {
            for k in 0..4 {
                out[k] += c * tj[k];
            }
        }
        out
    }
}

struct RitzBranch {
    values: Vec<f64>,
    shapes: Vec<RadialShape>,
}

/// Rayleigh–Ritz for `−(pT′)′ + qT = μρT` on the span of `sin^ℓθ·C_j(cos θ)`.
fn ritz_branch(metric: &ConformalMetric, l: usize, nodes: &[f64], weights: &[f64]) -> Result<RitzBranch> {
    let n = metric.n;
    let nf = n as f64;
    let coupling = (l * (l + n - 2)) as f64;
    let mut a = vec![vec![0.0; RITZ_TERMS]; RITZ_TERMS];
    let mut b = vec![vec![0.0; RITZ_TERMS]; RITZ_TERMS];
    for (&t, &w) in nodes.iter().zip(weights) {
        let f = metric.profile.value(t);
        let s = t.sin();
        let base = w * s.powi(n as i32 - 1);
        let stiff = base * ((nf - 2.0) * f).exp();
        let mass = base * (nf * f).exp();
        let terms = ritz_terms(l, n, t);
        for i in 0..RITZ_TERMS {
            for j in 0..=i {
                let ti = &terms[i];
                let tj = &terms[j];
                let av = stiff * (ti[1] * tj[1] + coupling * ti[3] * tj[3]);
                let bv = mass * ti[0] * tj[0];
                a[i][j] += av;
                b[i][j] += bv;
            }
        }
    }
    for i in 0..RITZ_TERMS {
        for j in 0..i {
            a[j][i] = a[i][j];
            b[j][i] = b[i][j];
        }
    }
    let eig = generalized_symmetric_eigen(&a, &b)
        .ok_or_else(|| Error::Numerical { what: format!("Ritz mass matrix of branch {l}"), residual: f64::NAN })?;
    let mut values = Vec::new();
    let mut shapes = Vec::new();
    for (v, mut c) in eig.values.into_iter().zip(eig.vectors).take(RITZ_KEEP) {
        let shape = RadialShape { l, n, coeffs: c.clone() };
        // sign: T positive just off the north pole
        let probe = shape.eval(1e-3)[0];
        let peak = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let flip = if probe.abs() > 1e-12 * peak.max(1e-300) { probe < 0.0 } else { c.iter().find(|x| x.abs() > 1e-8 * peak).is_some_and(|x| *x < 0.0) };
        if flip {
            c.iter_mut().for_each(|x| *x = -*x);
        }
        values.push(v);
        shapes.push(RadialShape { l, n, coeffs: c });
    }
    Ok(RitzBranch { values, shapes })
}

/// Orthonormal eigenfunctions `f₀, …, f_{N−1}` of `Δ_g` sampled on a product grid.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub metric: ConformalMetric,
    pub grid: ProductGrid,
    pub functions: Vec<GridFunction>,
    pub eigenvalues: Vec<f64>,
    pub modes: Vec<Mode>,
    /// `L²(dv_g)` Gram matrix on the grid.
    pub gram: Vec<Vec<f64>>,
    pub(crate) shapes: Vec<RadialShape>,
}

impl EigenBasis {
    pub fn new(metric: &ConformalMetric, size: usize) -> Result<Self> {
        EigenBasis::with_grid(metric, size, DEFAULT_THETA_POINTS, DEFAULT_FIBER_DEGREE)
    }

    /// The `size` lowest eigenfunctions; ties between branches (relative gap
    /// below the branch merge tolerance) are ordered by `(ℓ, radial, harmonic)`.
    pub fn with_grid(metric: &ConformalMetric, size: usize, theta_points: usize, fiber_degree: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::domain("basis size must be positive"));
        }
        if theta_points < 2 * RITZ_TERMS {
            return Err(Error::domain(format!("need at least {} polar nodes", 2 * RITZ_TERMS)));
        }
        let n = metric.n;
        let rule = gauss_legendre_rule(theta_points, 0.0, PI);

        let mut branches: Vec<RitzBranch> = Vec::new();
        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        let kth = |cands: &[(f64, usize, usize)]| -> f64 {
            let mut vals: Vec<(f64, usize)> = cands.iter().map(|&(v, l, _)| (v, harmonic_dimension(l, n))).collect();
            vals.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut seen = 0;
            for (v, m) in vals {
                seen += m;
                if seen >= size {
                    return v;
                }
            }
            f64::INFINITY
        };
        for l in 0..=MAX_BRANCH {
            let br = ritz_branch(metric, l, &rule.nodes, &rule.weights)?;
            let bottom = br.values[0];
            if l > 0 && bottom > kth(&candidates) * (1.0 + 10.0 * BRANCH_MERGE_TOL) + 1e-12 {
                break;
            }
            candidates.extend(br.values.iter().enumerate().map(|(r, &v)| (v, l, r)));
            branches.push(br);
        }
        if kth(&candidates) == f64::INFINITY {
            return Err(Error::domain(format!("basis size {size} exceeds the supported number of modes")));
        }

        // flatten with multiplicity, cluster near-equal values, order clusters by mode
        let mut flat: Vec<(f64, Mode)> = Vec::new();
        for &(v, l, r) in &candidates {
            for h in 0..harmonic_dimension(l, n) {
                flat.push((v, Mode { l, radial: r, harmonic: h }));
            }
        }
        flat.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut ordered: Vec<(f64, Mode)> = Vec::with_capacity(flat.len());
        let mut i = 0;
        while i < flat.len() {
            let anchor = flat[i].0;
            let mut j = i + 1;
            while j < flat.len() && (flat[j].0 - anchor).abs() <= BRANCH_MERGE_TOL * anchor.abs().max(1.0) {
                j += 1;
            }
            let mut cluster = flat[i..j].to_vec();
            cluster.sort_by_key(|(_, m)| (m.l, m.radial, m.harmonic));
            ordered.extend(cluster);
            i = j;
        }
        ordered.truncate(size);

        let max_l = ordered.iter().map(|(_, m)| m.l).max().unwrap_or(0);
        let grid = ProductGrid::new(&metric.profile, theta_points, fiber_degree.max(2 * max_l + 2))?;
        let harmonics = SphericalHarmonics::new(n, max_l);
        let fiber_vals: Vec<(Vec<f64>, Vec<Vec<f64>>)> =
            grid.fiber.points.iter().map(|w| harmonics.eval_all_with_gradient(w)).collect();

        let mut functions = Vec::with_capacity(size);
        let mut shapes = Vec::with_capacity(size);
        let mut modes = Vec::with_capacity(size);
        let mut eigenvalues = Vec::with_capacity(size);
        for (v, mode) in ordered {
            let shape = branches[mode.l].shapes[mode.radial].clone();
            let hidx = harmonics.of_degree(mode.l)[mode.harmonic];
            let radial: Vec<[f64; 4]> = grid.theta.iter().map(|&t| shape.eval(t)).collect();
            let d = n + 1;
            let mut fun = GridFunction::zeros(&grid);
            for i in 0..grid.len() {
                let (a, b) = grid.split(i);
                let [tv, td, _, tsin] = radial[a];
                let (yv, yg) = (&fiber_vals[b].0[hidx], &fiber_vals[b].1[hidx]);
                fun.values[i] = tv * yv;
                let e = grid.polar_direction(i);
                for k in 0..d {
                    let fiber_part = if k == 0 { 0.0 } else { tsin * yg[k - 1] };
                    fun.grad[i * d + k] = td * yv * e[k] + fiber_part;
                }
            }
            functions.push(fun);
            shapes.push(shape);
            modes.push(mode);
            eigenvalues.push(v);
        }
        let gram: Vec<Vec<f64>> = functions
            .iter()
            .map(|a| functions.iter().map(|b| grid.inner(&a.values, &b.values)).collect())
            .collect();
        let defect = gram_defect(&gram);
        if defect > GRAM_TOL {
            return Err(Error::Numerical { what: "eigenbasis orthonormality".into(), residual: defect });
        }
        Ok(EigenBasis { metric: metric.clone(), grid, functions, eigenvalues, modes, gram, shapes })
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// `Σ c_i f_i` with gradient.
    pub fn combine(&self, coeffs: &[f64]) -> GridFunction {
        let mut out = GridFunction::zeros(&self.grid);
        for (c, f) in coeffs.iter().zip(&self.functions) {
            if *c != 0.0 {
                out.axpy(*c, f);
            }
        }
        out
    }

    /// `count` band-limited functions `Σ c_i f_i` with coefficients uniform
    /// in `[−1, 1]`, reproducible from `seed`.
    pub fn random_combinations(&self, count: usize, seed: u64) -> Vec<(Vec<f64>, GridFunction)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let c: Vec<f64> = (0..self.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let f = self.combine(&c);
                (c, f)
            })
            .collect()
    }

    /// `Δ_g(Σ c_i f_i) = Σ c_i λ_i f_i`.
    pub fn laplacian_of(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for ((c, f), lam) in coeffs.iter().zip(&self.functions).zip(&self.eigenvalues) {
            for (o, v) in out.iter_mut().zip(&f.values) {
                *o += c * lam * v;
            }
        }
        out
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn gram_defect(&self) -> f64 {
        gram_defect(&self.gram)
    }

    /// `‖Δ_g f_i − λ_i f_i‖_{L²(dv_g)}` per basis function, with `Δ_g` applied
    /// to the closed-form radial factor on an independent fine rule.
    pub fn laplacian_residuals(&self) -> Vec<f64> {
        let n = self.metric.n;
        let nf = n as f64;
        let rule = gauss_legendre_rule(400, 0.0, PI);
        self.shapes
            .iter()
            .zip(&self.eigenvalues)
            .map(|(shape, &lam)| {
                let coupling = (shape.l * (shape.l + n - 2)) as f64;
                let mut acc = 0.0;
                for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let (f, f1, _) = self.metric.profile.derivatives(t);
                    let (s, c) = t.sin_cos();
                    let [tv, td, tdd, _] = shape.eval(t);
                    let lap = (-2.0 * f).exp()
                        * (-tdd - (nf - 1.0) * c / s * td - (nf - 2.0) * f1 * td + coupling * tv / (s * s));
                    let r = lap - lam * tv;
                    acc += w * r * r * (nf * f).exp() * s.powi(n as i32 - 1);
                }
                acc.sqrt()
            })
            .collect()
    }
}

fn gram_defect(gram: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in gram.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - want).abs());
        }
    }
    worst
}
