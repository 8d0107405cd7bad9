use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::spectrum::{Convention, Spectrum, SpectrumEntry};
use crate::{Error, Result};

pub const MIN_DIMENSION: usize = 3;
pub const MAX_DIMENSION: usize = 8;

/// Closed-form constants of the round sphere `S^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricConstants {
    pub n: usize,
    /// Volume of the unit sphere `S^n`.
    pub w_n: f64,
    /// Square of the sharp Sobolev constant `K(n, 2)`.
    pub k2: f64,
    /// Isoperimetric constant of the Euclidean unit ball.
    pub cstar: f64,
    /// Yamabe constant of the round conformal class, `n(n−1)·w_n^{2/n}`.
    pub y_sphere: f64,
    pub vc_default: f64,
    /// Isoperimetric constant of the round sphere, attained by a hemisphere.
    pub c_iso_round: f64,
}

/// `Γ(k/2)` for a positive integer `k`, by the half-step recursion from `Γ(1/2)` or `Γ(1)`.
pub(crate) fn gamma_half(k: u32) -> f64 {
    let mut g = if k.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if k.is_multiple_of(2) { 1.0 } else { 0.5 };
    while 2.0 * x < k as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Volume of the unit sphere `S^d ⊂ R^{d+1}`.
pub fn sphere_volume(d: usize) -> f64 {
    2.0 * PI.powf((d as f64 + 1.0) / 2.0) / gamma_half(d as u32 + 1)
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma_half(n as u32 + 2)
}

pub fn check_dimension(n: usize) -> Result<()> {
    if !(MIN_DIMENSION..=MAX_DIMENSION).contains(&n) {
        return Err(Error::domain(format!("dimension {n} outside [{MIN_DIMENSION}, {MAX_DIMENSION}]")));
    }
    Ok(())
}

pub fn geometric_constants(n: usize) -> Result<GeometricConstants> {
    check_dimension(n)?;
    let nf = n as f64;
    let w_n = sphere_volume(n);
    let w_nm1 = sphere_volume(n - 1);
    let w_2n = w_n.powf(2.0 / nf);
    let exponent = (nf - 1.0) / nf;
    Ok(GeometricConstants {
        n,
        w_n,
        k2: 4.0 / (nf * (nf - 2.0) * w_2n),
        cstar: w_nm1 / ball_volume(n).powf(exponent),
        y_sphere: nf * (nf - 1.0) * w_2n,
        vc_default: w_n,
        c_iso_round: w_nm1 / (0.5 * w_n).powf(exponent),
    })
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Dimension of the degree-`l` spherical harmonics on `S^{n−1} ⊂ R^n`.
///
/// Equals `(2l+n−2)(l+n−3)!/(l!(n−2)!)` for `l ≥ 1` and 1 for `l = 0`.
pub fn harmonic_dimension(l: usize, n: usize) -> usize {
    assert!(n >= 2, "harmonics need n ≥ 2");
    let (l, n) = (l as u64, n as u64);
    let lower = if l >= 2 { binomial(n + l - 3, l - 2) } else { 0 };
    (binomial(n + l - 1, l) - lower) as usize
}

/// First `count` distinct eigenvalues `k(k+n−1)` of round `S^n` with multiplicities.
pub fn round_spectrum(n: usize, count: usize) -> Result<Spectrum> {
    if n < 2 {
        return Err(Error::domain(format!("round spectrum needs n ≥ 2, got {n}")));
    }
    let entries = (0..count)
        .map(|k| SpectrumEntry { eigenvalue: (k * (k + n - 1)) as f64, multiplicity: harmonic_dimension(k, n + 1) })
        .collect();
    Spectrum::new(Convention::Closed, n, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_sphere_constants() {
        let c = geometric_constants(3).unwrap();
        assert!((c.w_n - 2.0 * PI * PI).abs() < 1e-13);
        let k2 = 4.0 / (3.0 * (2.0 * PI * PI).powf(2.0 / 3.0));
        assert!((c.k2 - k2).abs() < 1e-15);
        let cstar = 4.0 * PI / (4.0 * PI / 3.0).powf(2.0 / 3.0);
        assert!((c.cstar - cstar).abs() < 1e-13);
        assert!((c.c_iso_round - 4.0 * PI / (PI * PI).powf(2.0 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn low_dimensional_volumes() {
        assert!((sphere_volume(1) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_volume(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        assert!((ball_volume(2) - PI).abs() < 1e-15);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn unsupported_dimension() {
        assert!(geometric_constants(2).is_err());
        assert!(geometric_constants(9).is_err());
        for n in 3..=8 {
            let c = geometric_constants(n).unwrap();
            assert!(c.k2 > 0.0 && c.cstar > 0.0 && c.y_sphere > 0.0 && c.c_iso_round > 0.0);
        }
    }

    #[test]
    fn harmonic_dimensions() {
        // S²: 2l + 1
        for l in 0..10 {
            assert_eq!(harmonic_dimension(l, 3), 2 * l + 1);
        }
        // S³: (l + 1)²
        for l in 0..10 {
            assert_eq!(harmonic_dimension(l, 4), (l + 1) * (l + 1));
        }
        // factorial form
        for n in 3..9usize {
            for l in 1..8usize {
                let fact = |m: usize| (1..=m).product::<usize>();
                let want = (2 * l + n - 2) * fact(l + n - 3) / (fact(l) * fact(n - 2));
                assert_eq!(harmonic_dimension(l, n), want);
            }
        }
    }

    #[test]
    fn round_spectra() {
        let s = round_spectrum(3, 3).unwrap();
        let pairs: Vec<_> = s.entries.iter().map(|e| (e.eigenvalue, e.multiplicity)).collect();
        assert_eq!(pairs, vec![(0.0, 1), (3.0, 4), (8.0, 9)]);
        let s = round_spectrum(2, 2).unwrap();
        assert_eq!(s.entries[1].eigenvalue, 2.0);
        assert_eq!(s.entries[1].multiplicity, 3);
        let s = round_spectrum(4, 2).unwrap();
        assert_eq!((s.entries[1].eigenvalue, s.entries[1].multiplicity), (4.0, 5));
    }
}
