use std::f64::consts::PI;

use super::constants::{geometric_constants, harmonic_dimension, sphere_volume, GeometricConstants};
use super::profile::RadialProfile;
use crate::numerics::{
    gauss_legendre_rule, sturm_liouville_eigenvalues_below, sturm_liouville_eigs, PoleCondition, QuadratureRule,
    SturmLiouvilleProblem,
};
use crate::spectrum::{Convention, Spectrum};
use crate::{Error, Result};

pub const DEFAULT_MESH_NODES: usize = 4000;

/// Relative distance below which eigenvalues from different angular
/// branches are treated as one multiple eigenvalue.
pub const BRANCH_MERGE_TOL: f64 = 1e-5;

const VOLUME_PANELS: usize = 32;
const VOLUME_POINTS: usize = 64;

/// `g = e^{2f} g₀` on `S^n` for a radial profile, sampled on a θ-mesh.
#[derive(Debug, Clone)]
pub struct ConformalMetric {
    pub profile: RadialProfile,
    pub n: usize,
    pub mesh: Vec<f64>,
    pub e2f: Vec<f64>,
    /// Volume density `e^{nf} sin^{n−1}θ` (per unit fiber volume).
    pub density: Vec<f64>,
    pub scalar: Vec<f64>,
    pub volume: f64,
    pub max_s: f64,
    pub min_s: f64,
    /// Lower bound of the Ricci eigenvalues of `g`.
    pub ricci_min: f64,
    /// `min e^f / max e^f`.
    pub conformal_ratio: f64,
    pub constants: GeometricConstants,
    /// `∫ p dθ` over each mesh cell, `p = e^{(n−2)f} sin^{n−1}θ`.
    cell_stiffness: Vec<f64>,
}

fn sin_pow(t: f64, k: i32) -> f64 {
    if k == 0 {
        1.0
    } else {
        t.sin().powi(k)
    }
}

/// `cot θ · f′(θ)`, with its limit `f″` at the poles.
fn cot_times(t: f64, d1: f64, d2: f64) -> f64 {
    let s = t.sin();
    if s.abs() < 1e-7 {
        d2
    } else {
        t.cos() / s * d1
    }
}

/// Scalar curvature `S_g(θ)` of `e^{2f} g₀`.
pub fn scalar_curvature(profile: &RadialProfile, t: f64) -> f64 {
    let n = profile.dimension as f64;
    let (f, d1, d2) = profile.derivatives(t);
    let lap = -d2 - (n - 1.0) * cot_times(t, d1, d2);
    (-2.0 * f).exp() * (n * (n - 1.0) + 2.0 * (n - 1.0) * lap - (n - 1.0) * (n - 2.0) * d1 * d1)
}

/// Ricci eigenvalues `(radial, tangential)` of `e^{2f} g₀` relative to `g`.
pub fn ricci_eigenvalues(profile: &RadialProfile, t: f64) -> (f64, f64) {
    let n = profile.dimension as f64;
    let (f, d1, d2) = profile.derivatives(t);
    let ct = cot_times(t, d1, d2);
    let lap = -d2 - (n - 1.0) * ct;
    let s = (-2.0 * f).exp();
    let radial = (n - 1.0) - (n - 2.0) * d2 + lap;
    let tangential = (n - 1.0) - (n - 2.0) * ct + lap - (n - 2.0) * d1 * d1;
    (s * radial, s * tangential)
}

/// Golden-section search for an extremum of `h` on `[a, b]`.
fn golden<F: Fn(f64) -> f64>(h: F, mut a: f64, mut b: f64, maximize: bool) -> (f64, f64) {
    let sign = if maximize { -1.0 } else { 1.0 };
    let g = |t: f64| sign * h(t);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > 1e-11 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    
    [a, b, c, d].into_iter().map(|t| (t, h(t))).fold((f64::NAN, f64::NAN), |acc, cur| {
        if acc.1.is_nan() || (maximize && cur.1 > acc.1) || (!maximize && cur.1 < acc.1) {
            cur
        } else {
            acc
        }
    })
}

/// Extremum of `h` over `[0, π]`: mesh scan, then golden-section refinement
/// around the best node. Also compares the pole values directly.
fn refined_extremum<F: Fn(f64) -> f64>(h: F, mesh: &[f64], samples: &[f64], maximize: bool) -> f64 {
    let better = |x: f64, y: f64| if maximize { x > y } else { x < y };
    let mut idx = 0;
    for (i, &v) in samples.iter().enumerate() {
        if better(v, samples[idx]) {
            idx = i;
        }
    }
    let lo = mesh[idx.saturating_sub(1)];
    let hi = mesh[(idx + 1).min(mesh.len() - 1)];
    let (_, v) = golden(&h, lo, hi, maximize);
    let mut best = samples[idx];
    if better(v, best) {
        best = v;
    }
    best
}

impl ConformalMetric {
    pub fn dimension(&self) -> usize {
        self.n
    }

    /// `a` with `Ric_g ≥ (n−1)a²`, when the Ricci curvature is positive.
    pub fn ricci_a(&self) -> Option<f64> {
        (self.ricci_min > 0.0).then(|| (self.ricci_min / (self.n as f64 - 1.0)).sqrt())
    }

    /// Lower bound for the isoperimetric constant of `g` obtained by comparing
    /// with the round sphere: `(min e^f / max e^f)^{n−1} · C_iso(round)`.
    pub fn isoperimetric_lower_bound(&self) -> f64 {
        self.conformal_ratio.powi(self.n as i32 - 1) * self.constants.c_iso_round
    }

    /// `λ·vol^{2/n}`.
    pub fn normalize(&self, lambda: f64) -> f64 {
        lambda * self.volume.powf(2.0 / self.n as f64)
    }

    /// Volume of the fiber `S^{n−1}`.
    pub fn fiber_volume(&self) -> f64 {
        sphere_volume(self.n - 1)
    }

    /// Trapezoid rule on the mesh against `dv_g`; `values[i]` at `mesh[i]`.
    ///
    /// The integrand vanishes to order `n − 1 ≥ 2` at the poles, so the end
    /// corrections are of high order.
    pub fn integrate_radial(&self, values: &[f64]) -> f64 {
        let m = &self.mesh;
        let mut s = 0.0;
        for i in 0..m.len() - 1 {
            let h = m[i + 1] - m[i];
            s += 0.5 * h * (values[i] * self.density[i] + values[i + 1] * self.density[i + 1]);
        }
        s * self.fiber_volume()
    }

    /// `∫ |∇u|²_g dv_g` for the piecewise-linear interpolant of `u`.
    pub fn dirichlet_energy(&self, u: &[f64]) -> f64 {
        let m = &self.mesh;
        let mut s = 0.0;
        for i in 0..m.len() - 1 {
            let h = m[i + 1] - m[i];
            let d = (u[i + 1] - u[i]) / h;
            s += d * d * self.cell_stiffness[i];
        }
        s * self.fiber_volume()
    }

    /// Angular-mode Sturm–Liouville problem for branch `l` on the metric's mesh.
    pub fn branch_problem(&self, l: usize) -> SturmLiouvilleProblem<'_> {
        let n = self.n as i32;
        let lf = l as f64;
        let coupling = lf * (lf + n as f64 - 2.0);
        let prof = &self.profile;
        let p = move |t: f64| sin_pow(t, n - 1) * ((n as f64 - 2.0) * prof.value(t)).exp();
        let q = move |t: f64| {
            if coupling == 0.0 {
                0.0
            } else {
                coupling * ((n as f64 - 2.0) * prof.value(t)).exp() * sin_pow(t, n - 3)
            }
        };
        let rho = move |t: f64| sin_pow(t, n - 1) * (n as f64 * prof.value(t)).exp();
        let pole = if l == 0 { PoleCondition::RegularDecay } else { PoleCondition::ValueZero };
        SturmLiouvilleProblem::new(p, q, rho, self.mesh.clone(), pole, pole)
    }
}

/// Samples `e^{2f}`, the volume density and `S_g` on a uniform mesh, and
/// computes volume, extrema of `S_g`, a Ricci lower bound and the conformal ratio.
pub fn radial_metric_assemble(profile: &RadialProfile) -> Result<ConformalMetric> {
    radial_metric_assemble_with_mesh(profile, DEFAULT_MESH_NODES)
}

pub fn radial_metric_assemble_with_mesh(profile: &RadialProfile, nodes: usize) -> Result<ConformalMetric> {
    let n = profile.dimension;
    let constants = geometric_constants(n)?;
    if nodes < 16 {
        return Err(Error::domain(format!("mesh of {nodes} nodes is too coarse")));
    }
    for pole in [0.0, PI] {
        let d1 = profile.derivatives(pole).1;
        if d1.abs() > 1e-9 {
            return Err(Error::invalid(format!("f′ = {d1:.3e} at pole θ = {pole}; metric is not smooth there")));
        }
    }
    let ni = n as i32;
    let nf = n as f64;
    let mesh = SturmLiouvilleProblem::uniform_mesh(nodes);
    let mut e2f = Vec::with_capacity(nodes);
    let mut density = Vec::with_capacity(nodes);
    let mut scalar = Vec::with_capacity(nodes);
    let mut ricci = Vec::with_capacity(nodes);
    let mut fmin = f64::INFINITY;
    let mut fmax = f64::NEG_INFINITY;
    for &t in &mesh {
        let f = profile.value(t);
        fmin = fmin.min(f);
        fmax = fmax.max(f);
        e2f.push((2.0 * f).exp());
        density.push((nf * f).exp() * sin_pow(t, ni - 1));
        scalar.push(scalar_curvature(profile, t));
        let (r, s) = ricci_eigenvalues(profile, t);
        ricci.push(r.min(s));
    }
    if scalar.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("scalar curvature is not finite on the mesh"));
    }

    let rule = QuadratureRule::composite(VOLUME_POINTS, VOLUME_PANELS, 0.0, PI);
    let volume = rule.integrate(|t| (nf * profile.value(t)).exp() * sin_pow(t, ni - 1)) * sphere_volume(n - 1);

    let s_of = |t: f64| scalar_curvature(profile, t);
    let max_s = refined_extremum(s_of, &mesh, &scalar, true);
    let min_s = refined_extremum(s_of, &mesh, &scalar, false);
    let ric_of = |t: f64| {
        let (r, s) = ricci_eigenvalues(profile, t);
        r.min(s)
    };
    let ricci_min = refined_extremum(ric_of, &mesh, &ricci, false);
    let f_min = refined_extremum(|t| profile.value(t), &mesh, &mesh.iter().map(|&t| profile.value(t)).collect::<Vec<_>>(), false);
    let f_max = refined_extremum(|t| profile.value(t), &mesh, &mesh.iter().map(|&t| profile.value(t)).collect::<Vec<_>>(), true);
    let conformal_ratio = (f_min.min(fmin) - f_max.max(fmax)).exp();

    let gauss = gauss_legendre_rule(4, 0.0, 1.0);
    let cell_stiffness = mesh
        .windows(2)
        .map(|w| {
            let h = w[1] - w[0];
            gauss
                .nodes
                .iter()
                .zip(&gauss.weights)
                .map(|(s, wt)| {
                    let t = w[0] + s * h;
                    wt * h * sin_pow(t, ni - 1) * ((nf - 2.0) * profile.value(t)).exp()
                })
                .sum()
        })
        .collect();

    Ok(ConformalMetric {
        profile: profile.clone(),
        n,
        mesh,
        e2f,
        density,
        scalar,
        volume,
        max_s,
        min_s,
        ricci_min,
        conformal_ratio,
        constants,
        cell_stiffness,
    })
}

/// First `count` eigenvalues of `Δ_g` counted with multiplicity, assembled
/// from the angular branches `ℓ = 0, 1, …` until a branch bottom exceeds the
/// largest collected value.
pub fn conformal_spectrum(metric: &ConformalMetric, count: usize) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::domain("count must be positive"));
    }
    let n = metric.n;
    let radial = sturm_liouville_eigs(&metric.branch_problem(0), count)?;
    let mut raw: Vec<(f64, usize)> = radial.iter().map(|p| (p.value, 1)).collect();
    let mut lambda_max = kth_flat(&raw, count);
    for l in 1.. {
        let limit = lambda_max * (1.0 + 10.0 * BRANCH_MERGE_TOL) + 1e-12;
        let values = sturm_liouville_eigenvalues_below(&metric.branch_problem(l), limit, count)?;
        if values.is_empty() {
            break;
        }
        let mult = harmonic_dimension(l, n);
        // refine by inverse iteration for the values actually kept
        let pairs = sturm_liouville_eigs(&metric.branch_problem(l), values.len())?;
        raw.extend(pairs.iter().map(|p| (p.value, mult)));
        lambda_max = kth_flat(&raw, count);
    }
    let merged = Spectrum::from_unsorted(Convention::Closed, n, raw, BRANCH_MERGE_TOL)?;
    Ok(merged.truncate_flat(count))
}

/// The `count`-th smallest value (1-based) of a multiset given as `(value, multiplicity)`.
fn kth_flat(raw: &[(f64, usize)], count: usize) -> f64 {
    let mut sorted = raw.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut seen = 0;
    for (v, m) in sorted {
        seen += m;
        if seen >= count {
            return v;
        }
    }
    f64::INFINITY
}

fn critical_exponent(n: usize) -> f64 {
    2.0 * n as f64 / (n as f64 - 2.0)
}

/// Squared critical Sobolev norm `(∫ |u|^{2n/(n−2)} dv_g)^{(n−2)/n}` of a
/// radial function sampled on the metric's mesh.
pub fn critical_norm(u: &[f64], metric: &ConformalMetric) -> Result<f64> {
    if u.len() != metric.mesh.len() {
        return Err(Error::domain(format!("{} samples for a mesh of {} nodes", u.len(), metric.mesh.len())));
    }
    let p = critical_exponent(metric.n);
    let powered: Vec<f64> = u.iter().map(|v| v.abs().powf(p)).collect();
    Ok(metric.integrate_radial(&powered).powf(2.0 / p))
}

/// Yamabe quotient `∫(4(n−1)/(n−2)|∇u|² + S_g u²) dv_g / ‖u‖²_{2n/(n−2)}` of a
/// radial function sampled on the metric's mesh.
pub fn yamabe_quotient(u: &[f64], metric: &ConformalMetric) -> Result<f64> {
    let denom = critical_norm(u, metric)?;
    if !(denom > 0.0) {
        return Err(Error::domain("Yamabe quotient of the zero function"));
    }
    let nf = metric.n as f64;
    let su2: Vec<f64> = u.iter().zip(&metric.scalar).map(|(v, s)| s * v * v).collect();
    let num = 4.0 * (nf - 1.0) / (nf - 2.0) * metric.dirichlet_energy(u) + metric.integrate_radial(&su2);
    Ok(num / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_metric_basics() {
        let m = radial_metric_assemble(&RadialProfile::round(4).unwrap()).unwrap();
        assert!((m.volume - sphere_volume(4)).abs() < 1e-12 * m.volume);
        assert!(m.scalar.iter().all(|s| (s - 12.0).abs() < 1e-12));
        assert!((m.max_s - 12.0).abs() < 1e-12 && (m.min_s - 12.0).abs() < 1e-12);
        assert!((m.ricci_a().unwrap() - 1.0).abs() < 1e-12);
        assert!((m.isoperimetric_lower_bound() - m.constants.c_iso_round).abs() < 1e-14);
    }

    #[test]
    fn constant_profile_is_a_homothety() {
        let c = 0.4;
        let m = radial_metric_assemble(&RadialProfile::constant(3, c).unwrap()).unwrap();
        assert!((m.volume - 2.0 * PI * PI * (3.0 * c).exp()).abs() < 1e-11);
        assert!((m.max_s - 6.0 * (-2.0 * c).exp()).abs() < 1e-12);
        assert!((m.min_s - m.max_s).abs() < 1e-12);
    }

    #[test]
    fn cosine_max_scalar_matches_dense_sampling() {
        let p = RadialProfile::cosine(3, 0.3).unwrap();
        let m = radial_metric_assemble(&p).unwrap();
        let dense = (0..=100_000)
            .map(|i| {
                let t = PI * i as f64 / 100_000.0;
                // closed form for f = ε cos θ, n = 3
                let e = 0.3;
                let (f, d1) = (e * t.cos(), -e * t.sin());
                let lap = 3.0 * e * t.cos();
                (-2.0 * f).exp() * (6.0 + 4.0 * lap - 2.0 * d1 * d1)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((m.max_s - dense).abs() < 1e-8, "{} vs {dense}", m.max_s);
    }

    #[test]
    fn scalar_curvature_at_pole_is_the_limit() {
        let p = RadialProfile::cosine(3, 0.3).unwrap();
        let at = scalar_curvature(&p, 0.0);
        let near = scalar_curvature(&p, 1e-4);
        assert!((at - near).abs() < 1e-6);
    }

    #[test]
    fn round_three_sphere_spectrum() {
        let m = radial_metric_assemble(&RadialProfile::round(3).unwrap()).unwrap();
        let s = conformal_spectrum(&m, 14).unwrap();
        let flat = s.flatten();
        assert_eq!(flat.len(), 14);
        assert_eq!(flat[0], 0.0);
        for (i, v) in flat.iter().enumerate().skip(1) {
            let exact = if i <= 4 { 3.0 } else { 8.0 };
            assert!((v - exact).abs() / exact < 1e-6, "λ_{i} = {v}");
        }
    }

    #[test]
    fn constant_one_critical_norm_and_yamabe() {
        let m = radial_metric_assemble(&RadialProfile::round(3).unwrap()).unwrap();
        let one = vec![1.0; m.mesh.len()];
        let cn = critical_norm(&one, &m).unwrap();
        assert!((cn - (2.0 * PI * PI).powf(1.0 / 3.0)).abs() < 1e-12);
        let twice: Vec<f64> = one.iter().map(|v| 2.0 * v).collect();
        assert!((critical_norm(&twice, &m).unwrap() - 4.0 * cn).abs() < 1e-12);
        let y = yamabe_quotient(&one, &m).unwrap();
        assert!((y - m.constants.y_sphere).abs() < 1e-12 * y);
        assert!(yamabe_quotient(&vec![0.0; m.mesh.len()], &m).is_err());
    }

    #[test]
    fn critical_norm_of_first_radial_eigenfunction() {
        let m = radial_metric_assemble(&RadialProfile::round(3).unwrap()).unwrap();
        let u: Vec<f64> = m.mesh.iter().map(|t| t.cos()).collect();
        let got = critical_norm(&u, &m).unwrap();
        // dense midpoint oracle, 1e5 points
        let k = 100_000;
        let h = PI / k as f64;
        let s: f64 = (0..k)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                t.cos().powi(6) * t.sin().powi(2) * h
            })
            .sum::<f64>()
            * 4.0
            * PI;
        assert!((got - s.powf(1.0 / 3.0)).abs() < 1e-6);
    }
}
