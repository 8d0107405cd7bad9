use super::constants::{gamma_half, harmonic_dimension};

/// Exponent vectors of all monomials in `vars` variables of total degree `≤ max_degree`,
/// grouped by degree and lexicographically descending inside a degree.
fn monomials(vars: usize, max_degree: usize) -> Vec<Vec<u32>> {
    fn rec(vars: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == vars {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(vars, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for deg in 0..=max_degree as u32 {
        rec(vars, deg, &mut Vec::new(), &mut out);
    }
    out
}

/// `∫_{S^{D−1}} x^α dσ = 2 Π Γ(β_i) / Γ(Σ β_i)` with `β_i = (α_i + 1)/2`, for `x ∈ R^D`.
fn sphere_moment(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let num: f64 = alpha.iter().map(|&a| gamma_half(a + 1)).product();
    let total: u32 = alpha.iter().map(|&a| a + 1).sum();
    2.0 * num / gamma_half(total)
}

/// A real spherical harmonic, stored as polynomial coefficients over the
/// monomial list of its parent [`SphericalHarmonics`].
#[derive(Debug, Clone)]
pub struct Harmonic {
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

/// An `L²(S^{D−1})`-orthonormal basis of spherical harmonics of degree `≤ L`
/// on the unit sphere of `R^D`.
#[derive(Debug, Clone)]
pub struct SphericalHarmonics {
    pub ambient: usize,
    pub max_degree: usize,
    exponents: Vec<Vec<u32>>,
    pub harmonics: Vec<Harmonic>,
}

impl SphericalHarmonics {
    /// Builds the basis by Gram–Schmidt on monomials in the exact sphere inner product.
    pub fn new(ambient: usize, max_degree: usize) -> Self {
        assert!(ambient >= 2, "harmonics need ambient dimension ≥ 2");
        let exponents = monomials(ambient, max_degree);
        let nm = exponents.len();
        let index: std::collections::HashMap<Vec<u32>, usize> =
            exponents.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        // Moments of all monomial products.
        let mut gram = vec![vec![0.0; nm]; nm];
        for i in 0..nm {
            for j in i..nm {
                let sum: Vec<u32> = exponents[i].iter().zip(&exponents[j]).map(|(a, b)| a + b).collect();
                let v = sphere_moment(&sum);
                gram[i][j] = v;
                gram[j][i] = v;
            }
        }
        let inner = |a: &[f64], b: &[f64]| -> f64 {
            let mut s = 0.0;
            for (i, &ai) in a.iter().enumerate() {
                if ai == 0.0 {
                    continue;
                }
                for (j, &bj) in b.iter().enumerate() {
                    if bj != 0.0 {
                        s += ai * bj * gram[i][j];
                    }
                }
            }
            s
        };

        let mut harmonics: Vec<Harmonic> = Vec::new();
        for degree in 0..=max_degree {
            let want = harmonic_dimension(degree, ambient);
            let start = harmonics.len();
            for e in exponents.iter().filter(|e| e.iter().sum::<u32>() as usize == degree) {
                let mut c = vec![0.0; nm];
                c[index[e]] = 1.0;
                let original = inner(&c, &c).sqrt();
                for _ in 0..2 {
                    for h in &harmonics {
                        let proj = inner(&c, &h.coeffs);
                        for (ci, hi) in c.iter_mut().zip(&h.coeffs) {
                            *ci -= proj * hi;
                        }
                    }
                }
                let nrm = inner(&c, &c).sqrt();
                if nrm > 1e-7 * original {
                    c.iter_mut().for_each(|v| *v /= nrm);
                    harmonics.push(Harmonic { degree, coeffs: c });
                }
            }
            assert_eq!(harmonics.len() - start, want, "degree {degree} harmonics on S^{}", ambient - 1);
        }
        SphericalHarmonics { ambient, max_degree, exponents, harmonics }
    }

    pub fn len(&self) -> usize {
        self.harmonics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.harmonics.is_empty()
    }

    /// Indices of the harmonics of a given degree.
    pub fn of_degree(&self, degree: usize) -> Vec<usize> {
        (0..self.harmonics.len()).filter(|&i| self.harmonics[i].degree == degree).collect()
    }

    /// Values of all monomials at `x`.
    fn monomial_values(&self, x: &[f64]) -> Vec<f64> {
        let l = self.max_degree;
        let powers: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| {
                let mut p = vec![1.0; l + 1];
                for k in 1..=l {
                    p[k] = p[k - 1] * xi;
                }
                p
            })
            .collect();
        self.exponents.iter().map(|e| e.iter().enumerate().map(|(i, &a)| powers[i][a as usize]).product()).collect()
    }

    /// Values of all harmonics at the unit vector `x`.
    pub fn eval_all(&self, x: &[f64]) -> Vec<f64> {
        let mv = self.monomial_values(x);
        self.harmonics.iter().map(|h| h.coeffs.iter().zip(&mv).map(|(c, m)| c * m).sum()).collect()
    }

    /// Values and tangential gradients (in `R^D`) of all harmonics at the unit vector `x`.
    pub fn eval_all_with_gradient(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let d = self.ambient;
        let l = self.max_degree;
        let mv = self.monomial_values(x);
        let powers: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| {
                let mut p = vec![1.0; l + 1];
                for k in 1..=l {
                    p[k] = p[k - 1] * xi;
                }
                p
            })
            .collect();
        // ∂_i of every monomial
        let dmv: Vec<Vec<f64>> = self
            .exponents
            .iter()
            .map(|e| {
                (0..d)
                    .map(|i| {
                        if e[i] == 0 {
                            return 0.0;
                        }
                        let mut prod = e[i] as f64;
                        for (j, &a) in e.iter().enumerate() {
                            prod *= if j == i { powers[j][a as usize - 1] } else { powers[j][a as usize] };
                        }
                        prod
                    })
                    .collect()
            })
            .collect();
        let mut values = Vec::with_capacity(self.harmonics.len());
        let mut grads = Vec::with_capacity(self.harmonics.len());
        for h in &self.harmonics {
            let mut v = 0.0;
            let mut g = vec![0.0; d];
            for (k, &c) in h.coeffs.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                v += c * mv[k];
                for i in 0..d {
                    g[i] += c * dmv[k][i];
                }
            }
            let radial: f64 = g.iter().zip(x).map(|(a, b)| a * b).sum();
            for i in 0..d {
                g[i] -= radial * x[i];
            }
            values.push(v);
            grads.push(g);
        }
        (values, grads)
    }
}
