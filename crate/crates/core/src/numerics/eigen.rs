/// Eigenvalues in ascending order and the matching orthonormal eigenvectors.
///
/// `vectors[i]` is the unit eigenvector for `values[i]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi eigendecomposition of a dense symmetric matrix.
///
/// The input is symmetrized as `(A + Aᵀ)/2` first. Intended for the small
/// matrices of this crate (`n ≤` a few hundred).
pub fn symmetric_eigendecomposition(a: &[Vec<f64>]) -> SymmetricEigen {
    let n = a.len();
    assert!(a.iter().all(|row| row.len() == n), "matrix must be square");
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (a[i][j] + a[j][i])).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();

    let frob: f64 = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                m[p][q] = 0.0;
                m[q][p] = 0.0;
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].total_cmp(&m[j][j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|k| v[k][i]).collect()).collect();
    SymmetricEigen { values, vectors }
}

/// Solves `A c = μ B c` for symmetric `A` and positive definite `B`.
///
/// Returns `B`-orthonormal eigenvectors. `B` is diagonally rescaled before
/// its Cholesky factorization; `None` if `B` is not numerically positive definite.
pub fn generalized_symmetric_eigen(a: &[Vec<f64>], b: &[Vec<f64>]) -> Option<SymmetricEigen> {
    let n = a.len();
    let scale: Vec<f64> = (0..n).map(|i| 1.0 / b[i][i].sqrt()).collect();
    if scale.iter().any(|s| !s.is_finite()) {
        return None;
    }
    let bs: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| b[i][j] * scale[i] * scale[j]).collect()).collect();
    let as_: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[i][j] * scale[i] * scale[j]).collect()).collect();
    // B = L Lᵀ
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = bs[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 1e-14) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let forward = |col: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = (col[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
        }
        y
    };
    // C = L⁻¹ A L⁻ᵀ, built column by column
    let w: Vec<Vec<f64>> = (0..n).map(|j| forward(&(0..n).map(|i| as_[i][j]).collect::<Vec<_>>())).collect();
    let c: Vec<Vec<f64>> = (0..n).map(|i| forward(&(0..n).map(|j| w[j][i]).collect::<Vec<_>>())).collect();
    let e = symmetric_eigendecomposition(&c);
    let vectors = e
        .vectors
        .iter()
        .map(|y| {
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
            }
            x.iter().zip(&scale).map(|(v, s)| v * s).collect()
        })
        .collect();
    Some(SymmetricEigen { values: e.values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reconstruction_error(a: &[Vec<f64>], e: &SymmetricEigen) -> f64 {
        let n = a.len();
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| e.vectors[k][i] * e.values[k] * e.vectors[k][j]).sum();
                err = err.max((a[i][j] - r).abs());
            }
        }
        err
    }

    #[test]
    fn identity() {
        let a = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let e = symmetric_eigendecomposition(&a);
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_sorted_with_permuted_unit_vectors() {
        let a = vec![vec![2.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, 5.0]];
        let e = symmetric_eigendecomposition(&a);
        assert_eq!(e.values, vec![-1.0, 2.0, 5.0]);
        assert_eq!(e.vectors[0].iter().map(|x| x.abs()).collect::<Vec<_>>(), vec![0.0, 1.0, 0.0]);
        assert_eq!(e.vectors[2].iter().map(|x| x.abs()).collect::<Vec<_>>(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn reflection() {
        let e = symmetric_eigendecomposition(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        let s = 0.5f64.sqrt();
        assert!((e.vectors[0][0].abs() - s).abs() < 1e-15);
        assert!((e.vectors[0][0] + e.vectors[0][1]).abs() < 1e-15);
        assert!((e.vectors[1][0] - e.vectors[1][1]).abs() < 1e-15);
    }

    #[test]
    fn random_symmetric_reconstruction_and_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[1usize, 2, 5, 17, 40, 64] {
            let mut a = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..=i {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    a[i][j] = x;
                    a[j][i] = x;
                }
            }
            let e = symmetric_eigendecomposition(&a);
            let norm = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
            assert!(reconstruction_error(&a, &e) <= 1e-10 * norm, "n={n}");
            for i in 0..n {
                for j in 0..n {
                    let d: f64 = (0..n).map(|k| e.vectors[i][k] * e.vectors[j][k]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((d - want).abs() <= 1e-12, "n={n} ({i},{j}) {d}");
                }
                // A v = μ v
                let av: Vec<f64> = (0..n).map(|r| (0..n).map(|k| a[r][k] * e.vectors[i][k]).sum()).collect();
                for r in 0..n {
                    assert!((av[r] - e.values[i] * e.vectors[i][r]).abs() <= 1e-10 * norm);
                }
            }
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn generalized_problem_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let n = 9;
        let mut a = vec![vec![0.0; n]; n];
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.gen_range(-1.0..1.0);
                a[i][j] = x;
                a[j][i] = x;
            }
            for j in 0..n {
                m[i][j] = rng.gen_range(-1.0..1.0) * 10f64.powi(i as i32 % 3);
            }
        }
        // B = M Mᵀ + I, badly scaled rows
        let b: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| m[i][k] * m[j][k]).sum::<f64>() + if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let e = generalized_symmetric_eigen(&a, &b).unwrap();
        for (mu, x) in e.values.iter().zip(&e.vectors) {
            let ax: Vec<f64> = (0..n).map(|r| (0..n).map(|k| a[r][k] * x[k]).sum()).collect();
            let bx: Vec<f64> = (0..n).map(|r| (0..n).map(|k| b[r][k] * x[k]).sum()).collect();
            for r in 0..n {
                assert!((ax[r] - mu * bx[r]).abs() < 1e-9);
            }
            let xbx: f64 = x.iter().zip(&bx).map(|(p, q)| p * q).sum();
            assert!((xbx - 1.0).abs() < 1e-10);
        }
        assert!(generalized_symmetric_eigen(&a, &a).is_none());
    }
}
