//! Symmetric tridiagonal pencils `K x = λ M x` with `M` positive definite.

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SymTridiagPencil {
    pub k_diag: Vec<f64>,
    pub k_off: Vec<f64>,
    pub m_diag: Vec<f64>,
    pub m_off: Vec<f64>,
}

impl SymTridiagPencil {
    pub fn len(&self) -> usize {
        self.k_diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_diag.is_empty()
    }

    /// Number of pencil eigenvalues strictly below `sigma` (Sylvester inertia of `K − σM`).
    pub fn count_below(&self, sigma: f64) -> usize {
        let n = self.len();
        let scale = self.k_diag.iter().chain(&self.m_diag).fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
        let pivmin = 1e-290 * scale;
        let mut count = 0;
        let mut d = 0.0;
        for i in 0..n {
            let diag = self.k_diag[i] - sigma * self.m_diag[i];
            d = if i == 0 {
                diag
            } else {
                let e = self.k_off[i - 1] - sigma * self.m_off[i - 1];
                diag - e * e / d
            };
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Bracket `[lo, hi]` containing the whole spectrum.
    fn bounds(&self) -> (f64, f64) {
        // Gershgorin on K with the smallest M diagonal as a crude scale,
        // widened until the inertia count confirms it.
        let n = self.len();
        let mut hi: f64 = 1.0;
        for i in 0..n {
            let mut r = self.k_diag[i].abs();
            if i > 0 {
                r += self.k_off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.k_off[i].abs();
            }
            hi = hi.max(r);
        }
        let mmin = self.m_diag.iter().fold(f64::INFINITY, |a, &b| a.min(b)).max(1e-300);
        hi /= mmin;
        while self.count_below(hi) < n {
            hi *= 2.0;
        }
        let mut lo = -1.0;
        while self.count_below(lo) > 0 {
            lo *= 2.0;
        }
        (lo, hi)
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection on the inertia count.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        let (mut lo, mut hi) = self.bounds();
        self.bisect(index, &mut lo, &mut hi)
    }

    fn bisect(&self, index: usize, lo: &mut f64, hi: &mut f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (*lo + *hi);
            if mid <= *lo || mid >= *hi || (*hi - *lo) <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if self.count_below(mid) > index {
                *hi = mid;
            } else {
                *lo = mid;
            }
        }
        0.5 * (*lo + *hi)
    }

    /// The `count` smallest eigenvalues in ascending order.
    pub fn smallest(&self, count: usize) -> Vec<f64> {
        let count = count.min(self.len());
        let (lo, hi) = self.bounds();
        let mut out = Vec::with_capacity(count);
        let mut floor = lo;
        for j in 0..count {
            let mut a = floor;
            let mut b = hi;
            let v = self.bisect(j, &mut a, &mut b);
            out.push(v);
            floor = a;
        }
        out
    }

    /// All eigenvalues strictly below `limit`, at most `cap` of them.
    pub fn below(&self, limit: f64, cap: usize) -> Vec<f64> {
        let count = self.count_below(limit).min(cap);
        self.smallest(count)
    }

    fn apply_m(&self, x: &[f64]) -> Vec<f64> {
        mul(&self.m_diag, &self.m_off, x)
    }

    pub fn apply_k(&self, x: &[f64]) -> Vec<f64> {
        mul(&self.k_diag, &self.k_off, x)
    }

    pub fn m_inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.apply_m(x).iter().zip(y).map(|(a, b)| a * b).sum()
    }

    /// Eigenvector for the (approximate) eigenvalue `lambda` by shifted inverse
    /// iteration, `M`-orthogonalized against `deflate` and `M`-normalized.
    pub fn eigenvector(&self, lambda: f64, deflate: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.len();
        let scale = lambda.abs().max(1.0);
        let shift = lambda + 1e-13 * scale;
        let a_diag: Vec<f64> = (0..n).map(|i| self.k_diag[i] - shift * self.m_diag[i]).collect();
        let a_off: Vec<f64> = (0..n.saturating_sub(1)).map(|i| self.k_off[i] - shift * self.m_off[i]).collect();
        let lu = TridiagLu::factor(&a_diag, &a_off);

        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919 % 104729) as f64 / 104729.0)).collect();
        for _ in 0..4 {
            for d in deflate {
                let c = self.m_inner(&x, d);
                for (xi, di) in x.iter_mut().zip(d) {
                    *xi -= c * di;
                }
            }
            let rhs = self.apply_m(&x);
            x = lu.solve(&rhs);
            let nrm = self.m_inner(&x, &x).sqrt();
            if !nrm.is_finite() || nrm == 0.0 {
                return Err(Error::Numerical { what: "inverse iteration".into(), residual: f64::INFINITY });
            }
            x.iter_mut().for_each(|v| *v /= nrm);
        }
        for d in deflate {
            let c = self.m_inner(&x, d);
            for (xi, di) in x.iter_mut().zip(d) {
                *xi -= c * di;
            }
        }
        let nrm = self.m_inner(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= nrm);

        let peak = x.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if let Some(first) = x.iter().find(|v| v.abs() > 1e-8 * peak) {
            if *first < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
        }
        Ok(x)
    }

    /// Relative residual `‖Kx − λMx‖ / ((‖K‖ + |λ|‖M‖)‖x‖)`.
    pub fn residual(&self, lambda: f64, x: &[f64]) -> f64 {
        let kx = self.apply_k(x);
        let mx = self.apply_m(x);
        let r: f64 = kx.iter().zip(&mx).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
        let xn = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let s = (inf_norm(&self.k_diag, &self.k_off) + lambda.abs() * inf_norm(&self.m_diag, &self.m_off)) * xn;
        if s == 0.0 {
            r
        } else {
            r / s
        }
    }
}

fn inf_norm(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i].abs();
            if i > 0 {
                s += off[i - 1].abs();
            }
            if i + 1 < n {
                s += off[i].abs();
            }
            s
        })
        .fold(0.0, f64::max)
}

fn mul(diag: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i] * x[i];
            if i > 0 {
                s += off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += off[i] * x[i + 1];
            }
            s
        })
        .collect()
}

/// LU factorization of a general tridiagonal matrix with partial pivoting.
struct TridiagLu {
    // Row i of U holds u0[i] (diagonal), u1[i], u2[i] (two superdiagonals).
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    l: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64]) -> TridiagLu {
        let n = diag.len();
        let mut d = diag.to_vec();
        let mut du: Vec<f64> = off.to_vec();
        du.push(0.0);
        let dl: Vec<f64> = off.to_vec();
        let mut du2 = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut swapped = vec![false; n];
        let tiny = 1e-300;
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                let f = if d[i] == 0.0 { 0.0 } else { dl[i] / d[i] };
                l[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                // swap rows i and i+1
                let f = d[i] / dl[i];
                swapped[i] = true;
                l[i] = f;
                d[i] = dl[i];
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
            }
        }
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = tiny;
            }
        }
        TridiagLu { u0: d, u1: du, u2: du2, l, swapped }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let t = b[i];
                b[i] = b[i + 1];
                b[i + 1] = t - self.l[i] * b[i];
            } else {
                b[i + 1] -= self.l[i] * b[i];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiagPencil {
        SymTridiagPencil {
            k_diag: vec![2.0; n],
            k_off: vec![-1.0; n - 1],
            m_diag: vec![1.0; n],
            m_off: vec![0.0; n - 1],
        }
    }

    #[test]
    fn discrete_laplacian_eigenvalues() {
        let n = 50;
        let p = laplacian(n);
        let vals = p.smallest(5);
        for (j, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (j as f64 + 1.0) / (n as f64 + 1.0)).cos();
            assert!((v - exact).abs() < 1e-13, "{j}: {v} vs {exact}");
        }
        assert_eq!(p.count_below(vals[2] + 1e-9), 3);
    }

    #[test]
    fn pivoted_solve_matches_dense() {
        let diag = vec![0.0, 1.0, -3.0, 2.0, 1e-3];
        let off = vec![2.0, -1.0, 0.5, 4.0];
        let lu = TridiagLu::factor(&diag, &off);
        let b = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let x = lu.solve(&b);
        let ax = mul(&diag, &off, &x);
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_iteration_residual() {
        let p = laplacian(200);
        let vals = p.smallest(3);
        let mut found: Vec<Vec<f64>> = Vec::new();
        for &v in &vals {
            let x = p.eigenvector(v, &found).unwrap();
            assert!(p.residual(v, &x) < 1e-10);
            for y in &found {
                assert!(p.m_inner(&x, y).abs() < 1e-10);
            }
            found.push(x);
        }
    }
}
