//! Conformal automorphisms `φ_ξ` of `S^m`, discrete measures and
//! center-of-mass balancing.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::numerics::{lu_solve, norm, vector_root_solve, RootOptions};
use crate::sphere::FiberRule;
use crate::{Error, Result};

/// Iterates of the balancing solver stay in `|ξ| ≤ 1 − BALL_MARGIN`.
pub const BALL_MARGIN: f64 = 1e-6;
pub const DEFAULT_BALANCE_TOL: f64 = 1e-8;

/// A point of the open unit ball of `R^{m+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    coords: Vec<f64>,
}

impl BallPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let r = norm(&coords);
        if !(r < 1.0 - 1e-12) {
            return Err(Error::domain(format!("|ξ| = {r} is not inside the open unit ball")));
        }
        Ok(BallPoint { coords })
    }

    pub fn origin(dim: usize) -> Self {
        BallPoint { coords: vec![0.0; dim] }
    }

    /// `t·e_axis` in `R^dim`.
    pub fn on_axis(dim: usize, axis: usize, t: f64) -> Result<Self> {
        let mut c = vec![0.0; dim];
        c[axis] = t;
        BallPoint::new(c)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }
}

/// `φ_ξ(x) = ξ + (1 − |ξ|²)/|x + ξ|² · (x + ξ)` for a unit vector `x`.
pub fn moebius_map(xi: &BallPoint, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    moebius_map_into(xi.coords(), x, &mut out);
    out
}

/// Allocation-free [`moebius_map`]; returns the conformal factor `(1 − |ξ|²)/|x + ξ|²`.
pub fn moebius_map_into(xi: &[f64], x: &[f64], out: &mut [f64]) -> f64 {
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    let mut y2 = 0.0;
    for (a, b) in x.iter().zip(xi) {
        y2 += (a + b) * (a + b);
    }
    let s = (1.0 - xi2) / y2;
    let mut r2 = 0.0;
    for ((o, a), b) in out.iter_mut().zip(x).zip(xi) {
        *o = b + s * (a + b);
        r2 += *o * *o;
    }
    let drift = r2.sqrt() - 1.0;
    if drift.abs() > 1e-14 {
        let r = r2.sqrt();
        out.iter_mut().for_each(|v| *v /= r);
    }
    s
}

/// Uniform random point on the unit sphere of `R^d` by rejection from the cube.
pub fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.iter().map(|x| x / r).collect();
        }
    }
}

/// Quadrature-weighted points on the unit sphere of `R^{dim}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub dim: usize,
    /// Flattened coordinates, stride `dim`.
    coords: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).ok_or_else(|| Error::invalid("empty measure"))?;
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid("points have different dimensions"));
        }
        DiscreteMeasure::from_flat(dim, points.concat(), weights)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim < 2 || coords.len() != dim * weights.len() {
            return Err(Error::invalid("coordinate and weight counts do not match"));
        }
        for (i, p) in coords.chunks(dim).enumerate() {
            let r = norm(p);
            if (r - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!("point {i} has norm {r}, not 1")));
            }
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        if !(weights.iter().sum::<f64>() > 0.0) {
            return Err(Error::invalid("total mass must be positive"));
        }
        Ok(DiscreteMeasure { dim, coords, weights })
    }

    /// `len` independent uniform points on the unit sphere of `R^{dim}` with
    /// weights uniform in `[0.5, 1.5]`.
    pub fn random(dim: usize, len: usize, seed: u64) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("empty measure"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coords = Vec::with_capacity(dim * len);
        let mut weights = Vec::with_capacity(len);
        for _ in 0..len {
            coords.extend(random_unit(&mut rng, dim));
            weights.push(rng.gen_range(0.5..=1.5));
        }
        DiscreteMeasure::from_flat(dim, coords, weights)
    }

    /// Quadrature measure of a fiber rule (uniform measure on the sphere).
    pub fn from_rule(rule: &FiberRule) -> Self {
        DiscreteMeasure { dim: rule.dim + 1, coords: rule.points.concat(), weights: rule.weights.clone() }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim)
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest mass carried by a single location (coincident points merged).
    pub fn max_atom(&self) -> f64 {
        let mut atoms: HashMap<Vec<u64>, f64> = HashMap::new();
        for (p, w) in self.points().zip(&self.weights) {
            *atoms.entry(p.iter().map(|v| (v + 0.0).to_bits()).collect()).or_default() += w;
        }
        atoms.into_values().fold(0.0, f64::max)
    }

    /// Reads CSV with columns `x0, …, xm, weight`.
    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let dim = headers.len().checked_sub(1).filter(|d| *d >= 2).ok_or_else(|| Error::invalid("need columns x0..xm,weight"))?;
        for (i, h) in headers.iter().take(dim).enumerate() {
            if h != format!("x{i}") {
                return Err(Error::invalid(format!("unexpected column {h}, expected x{i}")));
            }
        }
        if &headers[dim] != "weight" {
            return Err(Error::invalid("last column must be weight"));
        }
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals: std::result::Result<Vec<f64>, _> = rec.iter().map(|s| s.parse::<f64>()).collect();
            let vals = vals.map_err(|e| Error::invalid(format!("bad number: {e}")))?;
            if vals.len() != dim + 1 {
                return Err(Error::invalid("ragged measure row"));
            }
            coords.extend_from_slice(&vals[..dim]);
            weights.push(vals[dim]);
        }
        DiscreteMeasure::from_flat(dim, coords, weights)
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        DiscreteMeasure::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.dim).map(|i| format!("x{i}")).collect();
        header.push("weight".into());
        w.write_record(&header)?;
        for (p, wt) in self.points().zip(&self.weights) {
            let mut row: Vec<String> = p.iter().map(|v| format!("{v:e}")).collect();
            row.push(format!("{wt:e}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `(Σ w_i φ_ξ(x_i)) / Σ w_i`.
pub fn center_of_mass_residual(xi: &BallPoint, mu: &DiscreteMeasure) -> Vec<f64> {
    residual_at(xi.coords(), mu)
}

fn residual_at(xi: &[f64], mu: &DiscreteMeasure) -> Vec<f64> {
    let d = mu.dim;
    let mut acc = vec![0.0; d];
    let mut img = vec![0.0; d];
    for (p, w) in mu.points().zip(&mu.weights) {
        if *w == 0.0 {
            continue;
        }
        moebius_map_into(xi, p, &mut img);
        for k in 0..d {
            acc[k] += w * img[k];
        }
    }
    let m = mu.total_mass();
    acc.iter_mut().for_each(|v| *v /= m);
    acc
}

/// Residual and its exact Jacobian in `ξ`.
fn residual_and_jacobian(xi: &[f64], mu: &DiscreteMeasure) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = mu.dim;
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    let mut r = vec![0.0; d];
    let mut jac = vec![vec![0.0; d]; d];
    let mut y = vec![0.0; d];
    for (p, w) in mu.points().zip(&mu.weights) {
        if *w == 0.0 {
            continue;
        }
        let mut y2 = 0.0;
        for k in 0..d {
            y[k] = p[k] + xi[k];
            y2 += y[k] * y[k];
        }
        let s = (1.0 - xi2) / y2;
        // ∂φ_a/∂ξ_b = (1 + s)δ_ab + y_a·(−2ξ_b − 2s·y_b)/|y|²
        for a in 0..d {
            r[a] += w * (xi[a] + s * y[a]);
            for b in 0..d {
                let mut v = w * y[a] * (-2.0 * xi[b] - 2.0 * s * y[b]) / y2;
                if a == b {
                    v += w * (1.0 + s);
                }
                jac[a][b] += v;
            }
        }
    }
    let m = mu.total_mass();
    r.iter_mut().for_each(|v| *v /= m);
    jac.iter_mut().flatten().for_each(|v| *v /= m);
    (r, jac)
}

#[derive(Debug, Clone, Serialize)]
pub struct BalanceOutcome {
    pub xi: BallPoint,
    pub residual: f64,
    /// Newton iterations, polishing steps included.
    pub iterations: usize,
}

/// Balancing point `ξ` with `‖center_of_mass_residual(ξ, μ)‖ ≤ 1e−8`, from `ξ = 0`.
pub fn balance(mu: &DiscreteMeasure) -> Result<BallPoint> {
    Ok(balance_from(mu, &BallPoint::origin(mu.dim), DEFAULT_BALANCE_TOL)?.xi)
}

/// Damped finite-difference Newton from `start`, followed by exact-Jacobian
/// Newton polishing while the residual keeps decreasing.
pub fn balance_from(mu: &DiscreteMeasure, start: &BallPoint, tol: f64) -> Result<BalanceOutcome> {
    if start.dim() != mu.dim {
        return Err(Error::domain("start point and measure dimensions differ"));
    }
    let total = mu.total_mass();
    if mu.max_atom() > 0.5 * total {
        return Err(Error::domain("an atom carries more than half of the mass; the balancing point escapes to the boundary"));
    }
    let inside = |x: &[f64]| norm(x) <= 1.0 - BALL_MARGIN;
    let sol = vector_root_solve(|x| residual_at(x, mu), start.coords(), inside, &RootOptions::with_tol(tol))?;
    let mut x = sol.x;
    let mut rn = sol.residual_norm;
    let mut iterations = sol.iterations;
    for _ in 0..4 {
        let (r, jac) = residual_and_jacobian(&x, mu);
        let Some(step) = lu_solve(jac, r.iter().map(|v| -v).collect()) else { break };
        let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
        if !inside(&trial) {
            break;
        }
        let tn = norm(&residual_at(&trial, mu));
        if !(tn < rn) {
            break;
        }
        x = trial;
        rn = tn;
        iterations += 1;
    }
    Ok(BalanceOutcome { xi: BallPoint { coords: x }, residual: rn, iterations })
}

/// Same weights on new points.
pub fn pushforward(mu: &DiscreteMeasure, images: &[Vec<f64>]) -> Result<DiscreteMeasure> {
    if images.len() != mu.len() {
        return Err(Error::domain(format!("{} images for {} points", images.len(), mu.len())));
    }
    DiscreteMeasure::new(images.to_vec(), mu.weights.clone())
}
