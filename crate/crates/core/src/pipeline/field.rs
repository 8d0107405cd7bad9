use std::cell::RefCell;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::basis::EigenBasis;
use crate::moebius::{balance_from, moebius_map_into, random_unit, BallPoint, DiscreteMeasure, DEFAULT_BALANCE_TOL};
use crate::numerics::{dot, norm, vector_root_solve, RootOptions};
use crate::{Error, Result};

pub const ZERO_TOL: f64 = 1e-7;
pub const DEFAULT_SEEDS: [u64; 8] = [11, 23, 37, 41, 53, 67, 79, 97];

fn check_unit(p: &[f64], basis: &EigenBasis) -> Result<()> {
    if p.len() != basis.len() {
        return Err(Error::domain(format!("point has {} coordinates for a basis of {}", p.len(), basis.len())));
    }
    let r = norm(p);
    if (r - 1.0).abs() > 1e-10 {
        return Err(Error::domain(format!("point has norm {r}, not 1")));
    }
    Ok(())
}

fn combine_values(p: &[f64], basis: &EigenBasis) -> Vec<f64> {
    let mut u = vec![0.0; basis.grid.len()];
    for (c, f) in p.iter().zip(&basis.functions) {
        if *c != 0.0 {
            for (o, v) in u.iter_mut().zip(&f.values) {
                *o += c * v;
            }
        }
    }
    u
}

fn measure_from_values(u: &[f64], basis: &EigenBasis) -> Result<DiscreteMeasure> {
    let weights = u.iter().zip(&basis.grid.weights).map(|(v, w)| v * v * w).collect();
    DiscreteMeasure::from_flat(basis.grid.n + 1, basis.grid.coords().to_vec(), weights)
}

/// `dμ_p = (Σ p_i f_i)² dv_g` on the basis grid.
pub fn density_measure(p: &[f64], basis: &EigenBasis) -> Result<DiscreteMeasure> {
    check_unit(p, basis)?;
    measure_from_values(&combine_values(p, basis), basis)
}

/// Value of `F` with the balancing point it used.
#[derive(Debug, Clone, Serialize)]
pub struct FieldValue {
    pub f: Vec<f64>,
    pub xi: BallPoint,
    pub balance_residual: f64,
}

pub(crate) fn field_from(p: &[f64], basis: &EigenBasis, start: &BallPoint) -> Result<FieldValue> {
    let u = combine_values(p, basis);
    let mu = measure_from_values(&u, basis)?;
    let bal = balance_from(&mu, start, DEFAULT_BALANCE_TOL)?;
    let d = basis.grid.n + 1;
    let xi = bal.xi.coords();
    let mut img = vec![0.0; d];
    let h: Vec<f64> = basis
        .grid
        .coords()
        .chunks(d)
        .zip(&u)
        .zip(&basis.grid.weights)
        .map(|((x, uv), w)| {
            moebius_map_into(xi, x, &mut img);
            img.iter().sum::<f64>() * uv * w
        })
        .collect();
    let f = basis.functions.iter().map(|fj| dot(&h, &fj.values)).collect();
    Ok(FieldValue { f, xi: bal.xi, balance_residual: bal.residual })
}

/// `F(p)_j = ∫ h(p, x) f_j dv_g` with `h = (Σ_i φ_{ξ_p}(x)_i)·(Σ p_i f_i)`.
pub fn evaluate_field_f(p: &[f64], basis: &EigenBasis) -> Result<Vec<f64>> {
    check_unit(p, basis)?;
    Ok(field_from(p, basis, &BallPoint::origin(basis.grid.n + 1))?.f)
}

pub fn evaluate_field(p: &[f64], basis: &EigenBasis) -> Result<FieldValue> {
    check_unit(p, basis)?;
    field_from(p, basis, &BallPoint::origin(basis.grid.n + 1))
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub seeds: Vec<u64>,
    /// Acceptance threshold on `‖F(q)‖`.
    pub tol: f64,
    /// Target of the Newton rounds.
    pub inner_tol: f64,
    pub max_rounds: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { seeds: DEFAULT_SEEDS.to_vec(), tol: ZERO_TOL, inner_tol: 1e-11, max_rounds: 40 }
    }
}

/// A zero of `F` on `S^{N−1}`.
#[derive(Debug, Clone, Serialize)]
pub struct VanishingPoint {
    pub q: Vec<f64>,
    pub xi: BallPoint,
    pub f: Vec<f64>,
    pub f_norm: f64,
    /// `⟨F(q), q⟩`.
    pub tangency: f64,
    pub balance_residual: f64,
    pub seed: u64,
    pub seeds: Vec<u64>,
}

/// Orthonormal basis of the tangent space `p^⊥`.
fn tangent_frame(p: &[f64]) -> Vec<Vec<f64>> {
    let d = p.len();
    let skip = (0..d).max_by(|&a, &b| p[a].abs().total_cmp(&p[b].abs())).unwrap_or(0);
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for i in (0..d).filter(|&i| i != skip) {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        for _ in 0..2 {
            for u in std::iter::once(p).chain(frame.iter().map(|f| f.as_slice())) {
                let c = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
            }
        }
        let r = norm(&v);
        v.iter_mut().for_each(|a| *a /= r);
        frame.push(v);
    }
    frame
}

fn chart(p: &[f64], frame: &[Vec<f64>], t: &[f64]) -> Vec<f64> {
    let mut q = p.to_vec();
    for (c, v) in t.iter().zip(frame) {
        q.iter_mut().zip(v).for_each(|(a, b)| *a += c * b);
    }
    let r = norm(&q);
    q.iter_mut().for_each(|a| *a /= r);
    q
}

struct Candidate {
    q: Vec<f64>,
    value: FieldValue,
    norm: f64,
}

/// Newton rounds in tangent charts, recentred after each round.
fn search_seed(basis: &EigenBasis, seed: u64, opts: &SearchOptions) -> Option<Candidate> {
    let d = basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = random_unit(&mut rng, d);
    let origin = BallPoint::origin(basis.grid.n + 1);
    let mut value = field_from(&p, basis, &origin).ok()?;
    let mut fnorm = norm(&value.f);
    let mut stalls = 0;
    for _ in 0..opts.max_rounds {
        if fnorm <= opts.inner_tol {
            break;
        }
        let frame = tangent_frame(&p);
        let warm = RefCell::new(value.xi.clone());
        let residual = |t: &[f64]| -> Vec<f64> {
            let q = chart(&p, &frame, t);
            let start = warm.borrow().clone();
            match field_from(&q, basis, &start) {
                Ok(v) => {
                    *warm.borrow_mut() = v.xi.clone();
                    frame.iter().map(|e| dot(e, &v.f)).collect()
                }
                Err(_) => vec![f64::NAN; frame.len()],
            }
        };
        let t = match vector_root_solve(residual, &vec![0.0; d - 1], |t| norm(t) <= 0.5, &RootOptions { tol: opts.inner_tol, max_iter: 30 }) {
            Ok(s) => s.x,
            Err(Error::NonConvergence { best, .. }) => best,
            Err(_) => break,
        };
        let q = chart(&p, &frame, &t);
        let Ok(next) = field_from(&q, basis, &value.xi) else { break };
        let nn = norm(&next.f);
        if !(nn < fnorm) {
            break;
        }
        stalls = if nn > 0.5 * fnorm { stalls + 1 } else { 0 };
        p = q;
        value = next;
        fnorm = nn;
        if stalls >= 3 {
            break;
        }
    }
    Some(Candidate { q: p, value, norm: fnorm })
}

/// Multi-seed zero search for `F`. Seeds run concurrently; the result is the
/// smallest `‖F‖`, ties broken by seed order.
pub fn find_vanishing_point(basis: &EigenBasis) -> Result<VanishingPoint> {
    find_vanishing_point_with(basis, &SearchOptions::default())
}

pub fn find_vanishing_point_with(basis: &EigenBasis, opts: &SearchOptions) -> Result<VanishingPoint> {
    if basis.len() < 2 {
        return Err(Error::domain("the field needs a basis of at least two functions"));
    }
    if opts.seeds.is_empty() {
        return Err(Error::domain("zero search needs at least one seed"));
    }
    let results: Vec<Option<Candidate>> = opts.seeds.par_iter().map(|&s| search_seed(basis, s, opts)).collect();
    let best = results
        .into_iter()
        .zip(&opts.seeds)
        .filter_map(|(c, &s)| c.map(|c| (c, s)))
        .min_by(|a, b| a.0.norm.total_cmp(&b.0.norm));
    let Some((cand, seed)) = best else {
        return Err(Error::Numerical { what: "zero search: balancing failed for every seed".into(), residual: f64::NAN });
    };
    if !(cand.norm <= opts.tol) {
        return Err(Error::NonConvergence {
            what: "zero search for F".into(),
            best: cand.q,
            residual: cand.norm,
            iterations: opts.max_rounds,
        });
    }
    let tangency = dot(&cand.value.f, &cand.q);
    Ok(VanishingPoint {
        q: cand.q,
        xi: cand.value.xi,
        f_norm: cand.norm,
        f: cand.value.f,
        tangency,
        balance_residual: cand.value.balance_residual,
        seed,
        seeds: opts.seeds.clone(),
    })
}

/// Largest observed `‖F(p) − F(p′)‖ / ‖p − p′‖` over random pairs at distance `≈ radius`.
pub fn lipschitz_probe(basis: &EigenBasis, pairs: usize, radius: f64, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = basis.len();
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let p = random_unit(&mut rng, d);
        let dir = random_unit(&mut rng, d);
        let frame = tangent_frame(&p);
        let t: Vec<f64> = frame.iter().map(|e| radius * dot(e, &dir)).collect();
        let q = chart(&p, &frame, &t);
        let fp = field_from(&p, basis, &BallPoint::origin(basis.grid.n + 1))?;
        let fq = field_from(&q, basis, &fp.xi)?;
        let df: Vec<f64> = fp.f.iter().zip(&fq.f).map(|(a, b)| a - b).collect();
        let dp: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a - b).collect();
        let dpn = norm(&dp);
        if dpn > 0.0 {
            worst = worst.max(norm(&df) / dpn);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{radial_metric_assemble, RadialProfile};

    fn basis(profile: RadialProfile, size: usize) -> EigenBasis {
        EigenBasis::with_grid(&radial_metric_assemble(&profile).unwrap(), size, 48, 8).unwrap()
    }

    #[test]
    fn density_mass_is_one() {
        let b = basis(RadialProfile::cosine(3, 0.3).unwrap(), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut e0 = vec![0.0; 5];
        e0[0] = 1.0;
        for p in std::iter::once(e0).chain((0..5).map(|_| random_unit(&mut rng, 5))) {
            let mu = density_measure(&p, &b).unwrap();
            assert!((mu.total_mass() - 1.0).abs() < 1e-8);
            assert!(mu.weights.iter().all(|w| *w >= 0.0));
        }
        assert!(density_measure(&[1.0, 1.0, 0.0, 0.0, 0.0], &b).is_err());
    }

    #[test]
    fn tangency_at_random_points() {
        let b = basis(RadialProfile::cosine(3, 0.3).unwrap(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let p = random_unit(&mut rng, 3);
            let f = evaluate_field_f(&p, &b).unwrap();
            assert!(dot(&f, &p).abs() < 1e-10, "{}", dot(&f, &p));
        }
    }

    #[test]
    fn round_constant_density_has_even_components_zero() {
        let b = basis(RadialProfile::round(3).unwrap(), 5);
        let mut p = vec![0.0; 5];
        p[0] = 1.0;
        let v = evaluate_field(&p, &b).unwrap();
        assert!(v.xi.norm() < 1e-12);
        // F_0 = c²∫ Σ x_i = 0, while the linear harmonics pair with Σ x_i
        assert!(v.f[0].abs() < 1e-8);
        assert!(v.f[1].abs() > 1e-3);
    }

    #[test]
    fn tangent_frame_is_orthonormal() {
        let p = vec![0.6, 0.0, -0.8];
        let fr = tangent_frame(&p);
        assert_eq!(fr.len(), 2);
        for (i, a) in fr.iter().enumerate() {
            assert!(dot(a, &p).abs() < 1e-15);
            for (j, c) in fr.iter().enumerate() {
                assert!((dot(a, c) - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_on_round_three_sphere() {
        let b = basis(RadialProfile::round(3).unwrap(), 3);
        let z = find_vanishing_point(&b).unwrap();
        assert!(z.f_norm <= 1e-7);
        assert!(z.tangency.abs() <= 1e-12);
        assert!((norm(&z.q) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_probe_is_finite() {
        let b = basis(RadialProfile::cosine(3, 0.3).unwrap(), 3);
        let l = lipschitz_probe(&b, 10, 1e-3, 1).unwrap();
        assert!(l.is_finite() && l > 0.0);
    }
}
