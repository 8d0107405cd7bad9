//! Bessel functions of the first kind and their positive zeros.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use super::quadrature::QuadratureRule;
use crate::{Error, Result};

pub const BESSEL_MAX_ORDER: f64 = 50.0;
pub const BESSEL_MAX_INDEX: usize = 100;

const SERIES_LIMIT: f64 = 12.0;

/// `J_ν(x)` for `ν ≥ 0`, `x ≥ 0`.
///
/// Ascending series for `x ≤ 12`; above that the Schläfli integral
/// representation evaluated by composite Gauss rules.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    assert!(nu >= 0.0 && x >= 0.0, "bessel_j needs ν ≥ 0 and x ≥ 0");
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        series(nu, x)
    } else {
        schlafli(nu, x)
    }
}

fn series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (nu * half.ln() - ln_gamma(nu + 1.0)).exp();
    let q = -half * half;
    let mut sum = term;
    for m in 1..500 {
        let mf = m as f64;
        term *= q / (mf * (mf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && mf > half {
            break;
        }
    }
    sum
}

fn schlafli(nu: f64, x: f64) -> f64 {
    let panels = ((nu + x) / 3.0).ceil() as usize + 2;
    let osc = QuadratureRule::composite(20, panels, 0.0, PI).integrate(|t| (nu * t - x * t.sin()).cos()) / PI;
    let s = (nu * PI).sin();
    if s.abs() < 1e-15 {
        return osc;
    }
    let t_max = (42.0 / x).asinh();
    let panels = (t_max * (x + nu) / 2.0).ceil() as usize + 4;
    let tail = QuadratureRule::composite(20, panels, 0.0, t_max).integrate(|t| (-x * t.sinh() - nu * t).exp());
    osc - s / PI * tail
}

fn bessel_dj(nu: f64, x: f64) -> f64 {
    nu / x * bessel_j(nu, x) - bessel_j(nu + 1.0, x)
}

fn check_order(nu: f64) -> Result<()> {
    if !(0.0..=BESSEL_MAX_ORDER).contains(&nu) {
        return Err(Error::domain(format!("Bessel order {nu} outside [0, {BESSEL_MAX_ORDER}]")));
    }
    Ok(())
}

fn refine(nu: f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    // bisect to a narrow bracket, then safeguarded Newton
    while b - a > 1e-4 {
        let m = 0.5 * (a + b);
        let fm = bessel_j(nu, m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..50 {
        let f = bessel_j(nu, x);
        if f == 0.0 {
            return x;
        }
        if (f > 0.0) == (fa > 0.0) {
            a = x;
        } else {
            b = x;
        }
        let step = f / bessel_dj(nu, x);
        let mut next = x - step;
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= 2e-16 * x {
            return next;
        }
        x = next;
    }
    x
}

/// Positive zeros of `J_ν` below `x_max`, ascending, at most `cap` of them.
///
/// Zeros are bracketed by a sign scan with step below the minimal zero
/// spacing, then refined.
pub fn bessel_zeros_below(nu: f64, x_max: f64, cap: usize) -> Result<Vec<f64>> {
    check_order(nu)?;
    let step = 0.4;
    let mut zeros = Vec::new();
    // J_ν > 0 on (0, j_{ν,1}) and j_{ν,1} > max(ν, 2.4)
    let mut a = nu.max(1.0);
    let mut fa = bessel_j(nu, a);
    while a < x_max && zeros.len() < cap {
        let b = a + step;
        let fb = bessel_j(nu, b);
        if fb == 0.0 || (fb > 0.0) != (fa > 0.0) {
            let z = if fb == 0.0 { b } else { refine(nu, a, b, fa) };
            if z < x_max {
                zeros.push(z);
            }
            let b2 = z + 1e-3;
            a = b2.max(b);
            fa = bessel_j(nu, a);
            continue;
        }
        a = b;
        fa = fb;
    }
    Ok(zeros)
}

/// The `k`-th positive zero `j_{ν,k}` (`k ≥ 1`).
pub fn bessel_zero(nu: f64, k: usize) -> Result<f64> {
    check_order(nu)?;
    if k == 0 || k > BESSEL_MAX_INDEX {
        return Err(Error::domain(format!("Bessel zero index {k} outside [1, {BESSEL_MAX_INDEX}]")));
    }
    // j_{ν,k} lies below the McMahon phase (k + ν/2 − 1/4)π for large k and
    // near ν + 1.86ν^{1/3} for k = 1; take a bound above both.
    let bound = (k as f64 + 0.5 * nu + 1.0) * PI + nu + 3.0 * nu.cbrt() + 4.0;
    let zeros = bessel_zeros_below(nu, bound, k)?;
    zeros
        .get(k - 1)
        .copied()
        .ok_or_else(|| Error::Numerical { what: format!("locating j_({nu},{k})"), residual: f64::NAN })
}
