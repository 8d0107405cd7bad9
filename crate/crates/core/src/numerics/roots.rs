use super::{lu_solve, norm};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop once `‖residual(x)‖ ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions { tol: 1e-10, max_iter: 200 }
    }
}

impl RootOptions {
    pub fn with_tol(tol: f64) -> Self {
        RootOptions { tol, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct RootSolution {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Residual norm after each accepted iterate, starting with the initial point.
    pub history: Vec<f64>,
}

fn fd_step(x: f64) -> f64 {
    (1e-7f64).max(1e-7 * x.abs())
}

/// Damped Newton iteration with a forward-difference Jacobian.
///
/// Every accepted iterate satisfies `admissible`; steps are halved until the
/// trial point is admissible and the residual norm decreases.
pub fn vector_root_solve<F, A>(mut residual: F, start: &[f64], admissible: A, opts: &RootOptions) -> Result<RootSolution>
where
    F: FnMut(&[f64]) -> Vec<f64>,
    A: Fn(&[f64]) -> bool,
{
    if !(opts.tol > 0.0) {
        return Err(Error::domain("root tolerance must be positive"));
    }
    if !admissible(start) {
        return Err(Error::domain("starting point is not admissible"));
    }
    let d = start.len();
    let mut x = start.to_vec();
    let mut r = residual(&x);
    if r.len() != d {
        return Err(Error::domain(format!("residual has {} components for {} unknowns", r.len(), d)));
    }
    let mut rn = norm(&r);
    let mut history = vec![rn];
    let mut iterations = 0;

    while rn > opts.tol {
        if iterations >= opts.max_iter || !rn.is_finite() {
            return Err(Error::NonConvergence { what: "vector root solve".into(), best: x, residual: rn, iterations });
        }
        iterations += 1;

        // jac[i][j] = ∂r_i/∂x_j
        let mut jac = vec![vec![0.0; d]; d];
        for j in 0..d {
            let mut h = fd_step(x[j]);
            let mut xp = x.clone();
            xp[j] += h;
            if !admissible(&xp) {
                h = -h;
                xp[j] = x[j] + h;
            }
            let rp = residual(&xp);
            for i in 0..d {
                jac[i][j] = (rp[i] - r[i]) / h;
            }
        }

        let newton = lu_solve(jac.clone(), r.iter().map(|v| -v).collect());
        let gradient: Vec<f64> = (0..d).map(|j| -(0..d).map(|i| jac[i][j] * r[i]).sum::<f64>()).collect();
        let mut accepted = false;
        for direction in newton.into_iter().chain(std::iter::once(gradient)) {
            let mut alpha = 1.0;
            if direction.iter().all(|v| *v == 0.0) {
                continue;
            }
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&direction).map(|(a, b)| a + alpha * b).collect();
                if admissible(&trial) {
                    let rt = residual(&trial);
                    let tn = norm(&rt);
                    if tn < (1.0 - 1e-4 * alpha) * rn || (tn < rn && alpha < 1e-6) {
                        x = trial;
                        r = rt;
                        rn = tn;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if accepted {
                break;
            }
        }
        if !accepted {
            return Err(Error::NonConvergence { what: "vector root solve (line search)".into(), best: x, residual: rn, iterations });
        }
        history.push(rn);
    }
    Ok(RootSolution { x, residual_norm: rn, iterations, history })
}
