//! Continuous piecewise-linear finite elements for
//! `−(p T′)′ + q T = λ ρ T` on a mesh of `[0, π]`.

use std::f64::consts::PI;

use super::quadrature::gauss_legendre_rule;
use super::tridiag::SymTridiagPencil;
use crate::{Error, Result};

/// Boundary treatment at a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleCondition {
    /// Do-nothing condition; the singular `p(pole) = 0` enforces regularity.
    RegularDecay,
    /// `T = 0` at the pole (angular modes `ℓ ≥ 1`).
    ValueZero,
}

type Coefficient<'a> = Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>;

pub struct SturmLiouvilleProblem<'a> {
    pub p: Coefficient<'a>,
    pub q: Coefficient<'a>,
    pub rho: Coefficient<'a>,
    pub mesh: Vec<f64>,
    pub left: PoleCondition,
    pub right: PoleCondition,
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    /// Nodal values on the full mesh (including pole nodes, zero where pinned).
    pub samples: Vec<f64>,
}

const CELL_GAUSS_POINTS: usize = 4;

impl<'a> SturmLiouvilleProblem<'a> {
    pub fn new(
        p: impl Fn(f64) -> f64 + Send + Sync + 'a,
        q: impl Fn(f64) -> f64 + Send + Sync + 'a,
        rho: impl Fn(f64) -> f64 + Send + Sync + 'a,
        mesh: Vec<f64>,
        left: PoleCondition,
        right: PoleCondition,
    ) -> Self {
        SturmLiouvilleProblem { p: Box::new(p), q: Box::new(q), rho: Box::new(rho), mesh, left, right }
    }

    /// Uniform mesh of `nodes` points on `[0, π]`.
    pub fn uniform_mesh(nodes: usize) -> Vec<f64> {
        let h = PI / (nodes - 1) as f64;
        (0..nodes).map(|i| if i + 1 == nodes { PI } else { i as f64 * h }).collect()
    }

    fn validate(&self) -> Result<()> {
        let m = &self.mesh;
        if m.len() < 3 {
            return Err(Error::domain("mesh needs at least 3 nodes"));
        }
        if m[0] != 0.0 || *m.last().unwrap() != PI {
            return Err(Error::domain("mesh endpoints must be exactly 0 and π"));
        }
        if m.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("mesh must be strictly increasing"));
        }
        for &t in &m[1..m.len() - 1] {
            if !((self.p)(t) > 0.0) || !((self.rho)(t) > 0.0) {
                return Err(Error::domain(format!("p and ρ must be positive at interior node {t}")));
            }
        }
        Ok(())
    }

    /// Assembles the stiffness/mass pencil on the free nodes.
    /// Returns the pencil and the index range of free nodes in the mesh.
    pub fn assemble(&self) -> Result<(SymTridiagPencil, std::ops::Range<usize>)> {
        self.validate()?;
        let n = self.mesh.len();
        let gauss = gauss_legendre_rule(CELL_GAUSS_POINTS, 0.0, 1.0);
        let mut kd = vec![0.0; n];
        let mut ko = vec![0.0; n - 1];
        let mut md = vec![0.0; n];
        let mut mo = vec![0.0; n - 1];
        for c in 0..n - 1 {
            let (a, b) = (self.mesh[c], self.mesh[c + 1]);
            let h = b - a;
            let (mut ip, mut q00, mut q01, mut q11, mut r00, mut r01, mut r11) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            for (s, w) in gauss.nodes.iter().zip(&gauss.weights) {
                let t = a + s * h;
                let w = w * h;
                let (phi0, phi1) = (1.0 - s, *s);
                ip += w * (self.p)(t);
                let qv = w * (self.q)(t);
                let rv = w * (self.rho)(t);
                q00 += qv * phi0 * phi0;
                q01 += qv * phi0 * phi1;
                q11 += qv * phi1 * phi1;
                r00 += rv * phi0 * phi0;
                r01 += rv * phi0 * phi1;
                r11 += rv * phi1 * phi1;
            }
            let stiff = ip / (h * h);
            kd[c] += stiff + q00;
            kd[c + 1] += stiff + q11;
            ko[c] += -stiff + q01;
            md[c] += r00;
            md[c + 1] += r11;
            mo[c] += r01;
        }
        let start = usize::from(self.left == PoleCondition::ValueZero);
        let end = n - usize::from(self.right == PoleCondition::ValueZero);
        let pencil = SymTridiagPencil {
            k_diag: kd[start..end].to_vec(),
            k_off: ko[start..end - 1].to_vec(),
            m_diag: md[start..end].to_vec(),
            m_off: mo[start..end - 1].to_vec(),
        };
        Ok((pencil, start..end))
    }
}

const RESIDUAL_LIMIT: f64 = 1e-8;

fn eigenpairs(pencil: &SymTridiagPencil, free: std::ops::Range<usize>, n: usize, values: Vec<f64>) -> Result<Vec<Eigenpair>> {
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    let mut out = Vec::with_capacity(values.len());
    for value in values {
        let x = pencil.eigenvector(value, &vectors)?;
        // Rayleigh quotient: second-order accurate in the eigenvector error.
        let value = pencil.apply_k(&x).iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() / pencil.m_inner(&x, &x);
        let residual = pencil.residual(value, &x);
        if !(residual <= RESIDUAL_LIMIT) {
            return Err(Error::Numerical { what: "Sturm–Liouville inverse iteration".into(), residual });
        }
        let mut samples = vec![0.0; n];
        samples[free.clone()].copy_from_slice(&x);
        vectors.push(x);
        out.push(Eigenpair { value, samples });
    }
    Ok(out)
}

/// The `count` smallest eigenpairs, ascending, with `ρ`-orthonormal eigenfunctions.
pub fn sturm_liouville_eigs(prob: &SturmLiouvilleProblem<'_>, count: usize) -> Result<Vec<Eigenpair>> {
    if count == 0 {
        return Err(Error::domain("count must be positive"));
    }
    if count + 2 > prob.mesh.len() {
        return Err(Error::domain(format!("count {count} exceeds mesh size − 2 = {}", prob.mesh.len() - 2)));
    }
    let (pencil, free) = prob.assemble()?;
    let values = pencil.smallest(count);
    eigenpairs(&pencil, free, prob.mesh.len(), values)
}

/// Eigenvalues strictly below `limit` (values only), at most `cap`.
pub fn sturm_liouville_eigenvalues_below(prob: &SturmLiouvilleProblem<'_>, limit: f64, cap: usize) -> Result<Vec<f64>> {
    let (pencil, _) = prob.assemble()?;
    Ok(pencil.below(limit, cap))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_string() {
        let mesh = SturmLiouvilleProblem::uniform_mesh(2001);
        let prob = SturmLiouvilleProblem::new(|_| 1.0, |_| 0.0, |_| 1.0, mesh, PoleCondition::ValueZero, PoleCondition::ValueZero);
        let pairs = sturm_liouville_eigs(&prob, 3).unwrap();
        for (k, pair) in pairs.iter().enumerate() {
            let exact = ((k + 1) * (k + 1)) as f64;
            assert!((pair.value - exact).abs() / exact < 1e-5, "{} vs {exact}", pair.value);
            assert_eq!(pair.samples[0], 0.0);
        }
    }

    #[test]
    fn round_three_sphere_radial_branch() {
        let mesh = SturmLiouvilleProblem::uniform_mesh(4000);
        let s2 = |t: f64| t.sin().powi(2);
        let prob = SturmLiouvilleProblem::new(s2, |_| 0.0, s2, mesh, PoleCondition::RegularDecay, PoleCondition::RegularDecay);
        let pairs = sturm_liouville_eigs(&prob, 4).unwrap();
        assert!(pairs[0].value.abs() < 1e-10, "{}", pairs[0].value);
        for (k, pair) in pairs.iter().enumerate().skip(1) {
            let exact = (k * (k + 2)) as f64;
            assert!((pair.value - exact).abs() / exact < 1e-6, "k={k}: {}", pair.value);
        }
    }

    #[test]
    fn round_three_sphere_first_angular_branch() {
        let mesh = SturmLiouvilleProblem::uniform_mesh(4000);
        let s2 = |t: f64| t.sin().powi(2);
        let prob = SturmLiouvilleProblem::new(s2, |_| 2.0, s2, mesh, PoleCondition::ValueZero, PoleCondition::ValueZero);
        let pairs = sturm_liouville_eigs(&prob, 1).unwrap();
        assert!((pairs[0].value - 3.0).abs() / 3.0 < 1e-6, "{}", pairs[0].value);
    }

    #[test]
    fn eigenfunctions_are_rho_orthonormal() {
        let mesh = SturmLiouvilleProblem::uniform_mesh(1500);
        let s2 = |t: f64| t.sin().powi(2);
        let prob = SturmLiouvilleProblem::new(s2, |_| 0.0, s2, mesh, PoleCondition::RegularDecay, PoleCondition::RegularDecay);
        let (pencil, _) = prob.assemble().unwrap();
        let pairs = sturm_liouville_eigs(&prob, 5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let d = pencil.m_inner(&pairs[i].samples, &pairs[j].samples);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_too_many_eigenvalues() {
        let mesh = SturmLiouvilleProblem::uniform_mesh(5);
        let prob = SturmLiouvilleProblem::new(|_| 1.0, |_| 0.0, |_| 1.0, mesh, PoleCondition::ValueZero, PoleCondition::ValueZero);
        assert!(sturm_liouville_eigs(&prob, 4).is_err());
    }
}
