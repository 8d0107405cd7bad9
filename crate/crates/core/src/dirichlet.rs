//! Closed-form Dirichlet spectra of boxes and balls, disjoint unions, and the
//! ball-degeneration experiment.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::numerics::{bessel_zeros_below, BESSEL_MAX_INDEX, BESSEL_MAX_ORDER};
use crate::sphere::{ball_volume, harmonic_dimension};
use crate::spectrum::{Convention, Spectrum};
use crate::verify::InequalityReport;
use crate::{Error, Result};

/// Values closer than this (relative) are one eigenvalue.
const MERGE_TOL: f64 = 1e-12;
/// Lattice/Bessel search targets this multiple of the Weyl count.
const WEYL_OVERSHOOT: f64 = 1.5;
pub const MAX_BALL_DIMENSION: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub sides: Vec<f64>,
}

impl BoxSpec {
    pub fn new(sides: Vec<f64>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::domain("a box needs at least one side"));
        }
        if sides.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::domain("box sides must be positive"));
        }
        Ok(BoxSpec { sides })
    }

    pub fn unit_cube(n: usize) -> Self {
        BoxSpec { sides: vec![1.0; n] }
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub n: usize,
    pub radius: f64,
}

impl BallSpec {
    pub fn new(n: usize, radius: f64) -> Result<Self> {
        if !(2..=MAX_BALL_DIMENSION).contains(&n) {
            return Err(Error::domain(format!("ball dimension {n} outside [2, {MAX_BALL_DIMENSION}]")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::domain("ball radius must be positive"));
        }
        Ok(BallSpec { n, radius })
    }

    pub fn unit(n: usize) -> Result<Self> {
        BallSpec::new(n, 1.0)
    }
}

/// Weyl estimate of `Λ` with `N(Λ) ≈ target`: `N ≈ ω_n·vol·Λ^{n/2}/(2π)^n`.
fn weyl_level(n: usize, volume: f64, target: f64) -> f64 {
    let c = ball_volume(n) * volume / (2.0 * PI).powi(n as i32);
    (target / c).powf(2.0 / n as f64)
}

/// `λ_p = π² Σ (p_i/a_i)²` for all `p_i ≥ 1` with `λ_p ≤ limit`.
fn lattice_below(sides: &[f64], limit: f64) -> Vec<(f64, usize)> {
    fn rec(sides: &[f64], budget: f64, acc: f64, out: &mut Vec<(f64, usize)>) {
        let Some((a, rest)) = sides.split_first() else {
            out.push((PI * PI * acc, 1));
            return;
        };
        let mut p = 1.0;
        loop {
            let term = (p / a) * (p / a);
            if term > budget {
                break;
            }
            rec(rest, budget - term, acc + term, out);
            p += 1.0;
        }
    }
    let mut out = Vec::new();
    rec(sides, limit / (PI * PI) * (1.0 + 1e-14), 0.0, &mut out);
    out
}

/// First `count` distinct Dirichlet eigenvalues of a box, with multiplicities.
///
/// Every lattice point below the search level is enumerated, so no
/// eigenvalue below the largest returned one is missed.
pub fn rectangle_spectrum(spec: &BoxSpec, count: usize) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::domain("count must be positive"));
    }
    let n = spec.sides.len();
    let mut level = weyl_level(n, spec.volume(), WEYL_OVERSHOOT * count as f64)
        .max(PI * PI * spec.sides.iter().map(|a| 1.0 / (a * a)).sum::<f64>());
    loop {
        let raw = lattice_below(&spec.sides, level);
        let merged = Spectrum::from_unsorted(Convention::Dirichlet, n, raw, MERGE_TOL)?;
        if merged.entries.len() >= count {
            let entries = merged.entries[..count].to_vec();
            return Spectrum::new(Convention::Dirichlet, n, entries);
        }
        level *= WEYL_OVERSHOOT;
    }
}

/// First `count` distinct Dirichlet eigenvalues `(j_{ℓ+n/2−1,k}/r)²` of a ball,
/// each with the multiplicity of degree-`ℓ` harmonics on `S^{n−1}`.
pub fn ball_spectrum(ball: &BallSpec, count: usize) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::domain("count must be positive"));
    }
    let n = ball.n;
    let r = ball.radius;
    let half = n as f64 / 2.0 - 1.0;
    let mut level = weyl_level(n, ball_volume(n) * r.powi(n as i32), WEYL_OVERSHOOT * count as f64);
    loop {
        let x_max = level.sqrt() * r;
        let mut raw = Vec::new();
        for l in 0.. {
            let nu = l as f64 + half;
            // j_{ν,1} > ν
            if nu >= x_max {
                break;
            }
            if nu > BESSEL_MAX_ORDER {
                return Err(Error::domain(format!("ball spectrum needs Bessel order {nu} > {BESSEL_MAX_ORDER}")));
            }
            let zeros = bessel_zeros_below(nu, x_max, BESSEL_MAX_INDEX + 1)?;
            if zeros.len() > BESSEL_MAX_INDEX {
                return Err(Error::domain(format!("ball spectrum needs more than {BESSEL_MAX_INDEX} zeros of J_{nu}")));
            }
            let m = harmonic_dimension(l, n);
            raw.extend(zeros.iter().map(|z| ((z / r) * (z / r), m)));
        }
        let merged = Spectrum::from_unsorted(Convention::Dirichlet, n, raw, MERGE_TOL)?;
        if merged.entries.len() >= count {
            return Spectrum::new(Convention::Dirichlet, n, merged.entries[..count].to_vec());
        }
        level *= WEYL_OVERSHOOT;
    }
}

/// Multiset union of Dirichlet spectra of the same dimension, cut at the
/// smallest of the parts' largest eigenvalues so that it has no gaps.
pub fn disjoint_union_spectrum(parts: &[Spectrum]) -> Result<Spectrum> {
    let first = parts.first().ok_or_else(|| Error::domain("union of an empty list of spectra"))?;
    if parts.iter().any(|p| p.convention != Convention::Dirichlet) {
        return Err(Error::domain("disjoint unions need Dirichlet spectra"));
    }
    if parts.iter().any(|p| p.dimension != first.dimension) {
        return Err(Error::domain("disjoint union parts have different dimensions"));
    }
    let cut = parts
        .iter()
        .map(|p| p.entries.last().map_or(f64::NEG_INFINITY, |e| e.eigenvalue))
        .fold(f64::INFINITY, f64::min);
    let raw: Vec<(f64, usize)> = parts
        .iter()
        .flat_map(|p| p.entries.iter())
        .filter(|e| e.eigenvalue <= cut)
        .map(|e| (e.eigenvalue, e.multiplicity))
        .collect();
    Spectrum::from_unsorted(Convention::Dirichlet, first.dimension, raw, MERGE_TOL)
}

/// `λ_{k+1}/λ_k` of `k` disjoint unit balls against the sharp constant and
/// the Thompson bound.
#[derive(Debug, Clone, Serialize)]
pub struct Degeneration {
    pub k: usize,
    pub n: usize,
    pub ratio: f64,
    /// `λ₂(B^n)/λ₁(B^n)`.
    pub sharp: f64,
    pub thompson: f64,
    pub reports: Vec<InequalityReport>,
}

pub fn degeneration_experiment(k: usize, n: usize, count: usize) -> Result<Degeneration> {
    if k < 2 {
        return Err(Error::domain("degeneration needs k ≥ 2 balls"));
    }
    let ball = ball_spectrum(&BallSpec::unit(n)?, count.max(2))?;
    let union = disjoint_union_spectrum(&vec![ball.clone(); k])?;
    let (l1, l2) = (ball.eigenvalue(1).unwrap(), ball.eigenvalue(2).unwrap());
    let lk = union.eigenvalue(k).ok_or_else(|| Error::domain("union spectrum too short"))?;
    let lk1 = union.eigenvalue(k + 1).ok_or_else(|| Error::domain("union spectrum too short"))?;
    let ratio = lk1 / lk;
    let sharp = l2 / l1;
    let thompson = 1.0 + 4.0 / n as f64;
    let reports = vec![
        InequalityReport::new("degeneration_sharp", Some(k), ratio, sharp).note("ratio of k equal balls vs λ₂(B)/λ₁(B)"),
        InequalityReport::new("degeneration_thompson", Some(k), ratio, thompson),
    ];
    Ok(Degeneration { k, n, ratio, sharp, thompson, reports })
}
