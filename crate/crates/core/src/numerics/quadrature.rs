use std::f64::consts::PI;

/// Nodes and positive weights of an interpolatory rule on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Composite rule: `panels` equal subintervals of `[a, b]`, each with an `m`-point Gauss rule.
    pub fn composite(m: usize, panels: usize, a: f64, b: f64) -> QuadratureRule {
        let panels = panels.max(1);
        let base = gauss_legendre_rule(m, -1.0, 1.0);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(m * panels);
        let mut weights = Vec::with_capacity(m * panels);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (x, w) in base.nodes.iter().zip(&base.weights) {
                nodes.push(lo + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        QuadratureRule { nodes, weights }
    }
}

/// Evaluates `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `m`-point Gauss–Legendre rule on `[a, b]`, exact for polynomials of degree `≤ 2m − 1`.
///
/// Panics if `m == 0` or `a >= b`.
pub fn gauss_legendre_rule(m: usize, a: f64, b: f64) -> QuadratureRule {
    assert!(m >= 1, "Gauss rule needs at least one node");
    assert!(a < b, "empty interval [{a}, {b}]");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Symmetric pair; the middle node of an odd rule is exactly zero.
        let x = if m % 2 == 1 && i == m / 2 { 0.0 } else { x };
        nodes[i] = mid - half * x;
        nodes[m - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[m - 1 - i] = half * w;
    }
    QuadratureRule { nodes, weights }
}
