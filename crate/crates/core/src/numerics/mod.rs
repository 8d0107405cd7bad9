//! Self-contained numerical kernels used by every other module.

mod bessel;
mod eigen;
mod quadrature;
mod roots;
mod sturm;
mod tridiag;

pub use bessel::{bessel_j, bessel_zero, bessel_zeros_below, BESSEL_MAX_INDEX, BESSEL_MAX_ORDER};
pub use eigen::{generalized_symmetric_eigen, symmetric_eigendecomposition, SymmetricEigen};
pub use quadrature::{gauss_legendre_rule, QuadratureRule};
pub use roots::{vector_root_solve, RootOptions, RootSolution};
pub use sturm::{
    sturm_liouville_eigenvalues_below, sturm_liouville_eigs, Eigenpair, PoleCondition, SturmLiouvilleProblem,
};
pub use tridiag::SymTridiagPencil;

/// Dense row-major square matrix helpers shared by the small solvers.
pub(crate) fn lu_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
