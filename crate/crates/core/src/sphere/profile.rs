use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::constants::check_dimension;
use crate::{Error, Result};

/// Largest admissible second divided difference of tabulated samples.
pub const TABULATED_MAX_SECOND_DIFFERENCE: f64 = 1e4;

/// Conformal exponent `f(θ)` of a metric `g = e^{2f} g₀` on `S^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub family: ProfileFamily,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ProfileFamily {
    Constant { c: f64 },
    /// `f(θ) = ε·cos θ`.
    Cosine { eps: f64 },
    /// `height·exp(1 − 1/(1 − s²))` with `s = (θ − center)/width`, zero for `|s| ≥ 1`.
    Bump { center: f64, width: f64, height: f64 },
    Tabulated(TabulatedProfile),
}

/// Clamped cubic spline through `(theta, f)` samples with zero end slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedProfile {
    pub theta: Vec<f64>,
    pub f: Vec<f64>,
    /// Spline second derivatives at the knots.
    second: Vec<f64>,
}

impl TabulatedProfile {
    pub fn new(theta: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        let m = theta.len();
        if m != f.len() {
            return Err(Error::invalid("theta and f sample counts differ"));
        }
        if m < 4 {
            return Err(Error::invalid("tabulated profile needs at least 4 samples"));
        }
        if (theta[0]).abs() > 1e-12 || (theta[m - 1] - PI).abs() > 1e-12 {
            return Err(Error::invalid(format!("samples must cover [0, π], got [{}, {}]", theta[0], theta[m - 1])));
        }
        if theta.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("theta samples must be strictly increasing"));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite profile sample"));
        }
        let mut theta = theta;
        theta[0] = 0.0;
        theta[m - 1] = PI;

        let mut d2max: f64 = 0.0;
        for i in 1..m - 1 {
            let left = (f[i] - f[i - 1]) / (theta[i] - theta[i - 1]);
            let right = (f[i + 1] - f[i]) / (theta[i + 1] - theta[i]);
            d2max = d2max.max((2.0 * (right - left) / (theta[i + 1] - theta[i - 1])).abs());
        }
        if d2max > TABULATED_MAX_SECOND_DIFFERENCE {
            return Err(Error::invalid(format!(
                "second difference {d2max:.3e} exceeds {TABULATED_MAX_SECOND_DIFFERENCE:e}; profile is not C²"
            )));
        }
        let h0 = theta[1] - theta[0];
        let h1 = theta[m - 1] - theta[m - 2];
        let s0 = (f[1] - f[0]) / h0;
        let s1 = (f[m - 1] - f[m - 2]) / h1;
        if s0.abs() > h0 * d2max + 1e-9 || s1.abs() > h1 * d2max + 1e-9 {
            return Err(Error::invalid(format!(
                "pole slopes {s0:.3e}, {s1:.3e} incompatible with f′(0) = f′(π) = 0"
            )));
        }
        let second = clamped_spline(&theta, &f);
        Ok(TabulatedProfile { theta, f, second })
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            theta: f64,
            f: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut theta = Vec::new();
        let mut f = Vec::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            theta.push(row.theta);
            f.push(row.f);
        }
        TabulatedProfile::new(theta, f)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        TabulatedProfile::from_csv_reader(std::fs::File::open(path)?)
    }

    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let x = &self.theta;
        let m = x.len();
        let t = t.clamp(0.0, PI);
        let i = match x.partition_point(|&v| v <= t) {
            0 => 0,
            p if p >= m => m - 2,
            p => p - 1,
        };
        let h = x[i + 1] - x[i];
        let a = (x[i + 1] - t) / h;
        let b = (t - x[i]) / h;
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let (y0, y1) = (self.f[i], self.f[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let dd = a * m0 + b * m1;
        (v, d, dd)
    }
}

/// Second derivatives of the cubic spline with `s′ = 0` at both ends.
fn clamped_spline(x: &[f64], y: &[f64]) -> Vec<f64> {
    let m = x.len();
    let mut sub = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let h = |i: usize| x[i + 1] - x[i];
    diag[0] = h(0) / 3.0;
    sup[0] = h(0) / 6.0;
    rhs[0] = (y[1] - y[0]) / h(0);
    for i in 1..m - 1 {
        sub[i] = h(i - 1) / 6.0;
        diag[i] = (h(i - 1) + h(i)) / 3.0;
        sup[i] = h(i) / 6.0;
        rhs[i] = (y[i + 1] - y[i]) / h(i) - (y[i] - y[i - 1]) / h(i - 1);
    }
    sub[m - 1] = h(m - 2) / 6.0;
    diag[m - 1] = h(m - 2) / 3.0;
    rhs[m - 1] = -(y[m - 1] - y[m - 2]) / h(m - 2);
    // Thomas algorithm; the system is diagonally dominant.
    for i in 1..m {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut out = vec![0.0; m];
    out[m - 1] = rhs[m - 1] / diag[m - 1];
    for i in (0..m - 1).rev() {
        out[i] = (rhs[i] - sup[i] * out[i + 1]) / diag[i];
    }
    out
}

impl RadialProfile {
    pub fn constant(dimension: usize, c: f64) -> Result<Self> {
        RadialProfile::new(dimension, ProfileFamily::Constant { c })
    }

    pub fn round(dimension: usize) -> Result<Self> {
        RadialProfile::constant(dimension, 0.0)
    }

    pub fn cosine(dimension: usize, eps: f64) -> Result<Self> {
        RadialProfile::new(dimension, ProfileFamily::Cosine { eps })
    }

    pub fn bump(dimension: usize, center: f64, width: f64, height: f64) -> Result<Self> {
        RadialProfile::new(dimension, ProfileFamily::Bump { center, width, height })
    }

    pub fn tabulated(dimension: usize, theta: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        RadialProfile::new(dimension, ProfileFamily::Tabulated(TabulatedProfile::new(theta, f)?))
    }

    pub fn new(dimension: usize, family: ProfileFamily) -> Result<Self> {
        check_dimension(dimension)?;
        match &family {
            ProfileFamily::Constant { c } if !c.is_finite() => return Err(Error::invalid("constant must be finite")),
            ProfileFamily::Cosine { eps } if !eps.is_finite() => return Err(Error::invalid("ε must be finite")),
            ProfileFamily::Bump { center, width, height } => {
                if !(width.is_finite() && *width > 0.0 && height.is_finite() && center.is_finite()) {
                    return Err(Error::invalid("bump needs finite center, height and positive width"));
                }
                let at_pole = *center == 0.0 || *center == PI;
                let inside = center - width >= 0.0 && center + width <= PI;
                if !(inside || (at_pole && *width <= PI)) {
                    return Err(Error::invalid(format!(
                        "bump support [{}, {}] must lie in [0, π] or be centered at a pole",
                        center - width,
                        center + width
                    )));
                }
            }
            _ => {}
        }
        Ok(RadialProfile { family, dimension })
    }

    /// `(f, f′, f″)` at `θ`.
    pub fn derivatives(&self, t: f64) -> (f64, f64, f64) {
        match &self.family {
            ProfileFamily::Constant { c } => (*c, 0.0, 0.0),
            ProfileFamily::Cosine { eps } => (eps * t.cos(), -eps * t.sin(), -eps * t.cos()),
            ProfileFamily::Bump { center, width, height } => {
                let s = (t - center) / width;
                if s.abs() >= 1.0 {
                    return (0.0, 0.0, 0.0);
                }
                let r = 1.0 - s * s;
                let g = 1.0 - 1.0 / r;
                let g1 = -2.0 * s / (r * r);
                let g2 = -2.0 / (r * r) - 8.0 * s * s / (r * r * r);
                let v = height * g.exp();
                (v, v * g1 / width, v * (g1 * g1 + g2) / (width * width))
            }
            ProfileFamily::Tabulated(tab) => tab.eval(t),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivatives(t).0
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.family, ProfileFamily::Constant { .. })
    }
}
