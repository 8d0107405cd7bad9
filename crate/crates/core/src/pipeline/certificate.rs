use serde::Serialize;

use super::basis::{EigenBasis, DEFAULT_FIBER_DEGREE, DEFAULT_THETA_POINTS};
use super::field::{find_vanishing_point_with, SearchOptions};
use super::form::{assemble_bilinear_form, rotated_coordinates};
use crate::moebius::BallPoint;
use crate::numerics::dot;
use crate::sphere::{conformal_spectrum, ConformalMetric};
use crate::{Error, Result};

pub const MAX_K: usize = 5;
const LINK_SLACK: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub theta_points: usize,
    pub fiber_degree: usize,
    pub search: SearchOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            theta_points: DEFAULT_THETA_POINTS,
            fiber_degree: DEFAULT_FIBER_DEGREE,
            search: SearchOptions::default(),
        }
    }
}

/// Signed gaps between consecutive links of the chain
/// `gapLHS ≤ certificate ≤ Hebey-side bound = Theorem-1 bound`.
#[derive(Debug, Clone, Serialize)]
pub struct LinkSlack {
    pub certificate_minus_gap: f64,
    pub hebey_minus_certificate: f64,
    pub theorem1_minus_hebey: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialDiagnostics {
    pub f_norm: f64,
    /// `⟨F(q), q⟩`.
    pub tangency: f64,
    pub balance_residual: f64,
    pub u_l2_norm: f64,
    pub gram_defect: f64,
    /// `max |G − Gᵀ|` before symmetrization.
    pub form_asymmetry: f64,
    /// `max_{i≠j} |G_q(e_i, e_j)|`.
    pub form_offdiag: f64,
    pub form_trace: f64,
    /// `max_x |Σ_i (X_{e_i}∘φ_ξ)² − 1|`.
    pub coordinate_sum_defect: f64,
    /// `∫ u² Σ_i |∇(X_{e_i}∘φ_ξ)|² dv_g`.
    pub energy_term: f64,
    /// `max_{j ≤ 2k} |⟨Σ_i X_{e_i}∘φ_ξ·u, f_j⟩|` for the diagonalizing basis.
    pub rotated_pairing_max: f64,
    /// `|λ_{2k}(basis) − λ_{2k}(spectrum)|`.
    pub basis_spectrum_mismatch: f64,
    pub seed: u64,
    pub seeds: Vec<u64>,
}

/// Output of the full trial-function chain for one metric and one `k`.
#[derive(Debug, Clone, Serialize)]
pub struct TrialData {
    pub n: usize,
    pub k: usize,
    pub q: Vec<f64>,
    pub xi: BallPoint,
    pub g_eigenvalues: Vec<f64>,
    pub eigvecs: Vec<Vec<f64>>,
    pub lambda_2k: f64,
    pub lambda_2k1: f64,
    pub gap_lhs: f64,
    /// `‖u‖²_{2n/(n−2)}`.
    pub critical_norm_sq: f64,
    pub vc: f64,
    pub certificate: f64,
    pub hebey_bound: f64,
    pub theorem1_bound: f64,
    pub slack: LinkSlack,
    pub diagnostics: TrialDiagnostics,
    #[serde(skip)]
    pub u: Vec<f64>,
}

impl TrialData {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs the chain with default grids and seeds. `vc` overrides the volume
/// constant (default `w_n`, the round sphere).
pub fn gap_certificate(k: usize, metric: &ConformalMetric, vc: Option<f64>) -> Result<TrialData> {
    gap_certificate_with(k, metric, vc, &PipelineOptions::default())
}

pub fn gap_certificate_with(k: usize, metric: &ConformalMetric, vc: Option<f64>, opts: &PipelineOptions) -> Result<TrialData> {
    if k == 0 || k > MAX_K {
        return Err(Error::domain(format!("k = {k} outside 1..={MAX_K}")));
    }
    let n = metric.n;
    let nf = n as f64;
    let consts = &metric.constants;
    let vc = vc.unwrap_or(consts.w_n);
    if !(vc > 0.0) {
        return Err(Error::domain("V_c must be positive"));
    }
    let spectrum = conformal_spectrum(metric, 2 * k + 2)?;
    let flat = spectrum.flatten();
    let (lambda_2k, lambda_2k1) = (flat[2 * k], flat[2 * k + 1]);
    let basis = EigenBasis::with_grid(metric, 2 * k + 1, opts.theta_points, opts.fiber_degree)?;
    let zero = find_vanishing_point_with(&basis, &opts.search)?;
    let form = assemble_bilinear_form(&zero.q, &zero.xi, &basis, lambda_2k1)?;

    let grid = &basis.grid;
    let u = basis.combine(&zero.q);
    let coords = rotated_coordinates(&zero.xi, grid)?;
    let mut coordinate_sum_defect: f64 = 0.0;
    let mut energy_density = vec![0.0; grid.len()];
    for c in &coords {
        for (e, g) in energy_density.iter_mut().zip(c.grad_norm_sq(grid)) {
            *e += g;
        }
    }
    for i in 0..grid.len() {
        let s: f64 = coords.iter().map(|c| c.values[i] * c.values[i]).sum();
        coordinate_sum_defect = coordinate_sum_defect.max((s - 1.0).abs());
    }
    let u2: Vec<f64> = u.values.iter().map(|v| v * v).collect();
    let energy_term = grid.inner(&u2, &energy_density);
    let direction: Vec<f64> = (0..n + 1).map(|a| form.eigvecs.iter().map(|e| e[a]).sum()).collect();
    let rotated: Vec<f64> = (0..grid.len())
        .map(|i| u.values[i] * coords.iter().zip(&direction).map(|(c, w)| w * c.values[i]).sum::<f64>())
        .collect();
    let rotated_pairing_max = basis.functions.iter().map(|f| grid.inner(&rotated, &f.values).abs()).fold(0.0, f64::max);

    let critical_norm_sq = grid.critical_norm(&u.values);
    let gap_lhs = lambda_2k1 - lambda_2k;
    let certificate = nf * vc.powf(2.0 / nf) * critical_norm_sq;
    let hebey_bound =
        nf * vc.powf(2.0 / nf) * (consts.k2 * lambda_2k + metric.max_s / (nf * (nf - 1.0) * consts.w_n.powf(2.0 / nf)));
    let theorem1_bound = 4.0 / (nf - 2.0) * lambda_2k + metric.max_s / (nf - 1.0);

    let data = TrialData {
        n,
        k,
        q: zero.q.clone(),
        xi: zero.xi.clone(),
        g_eigenvalues: form.eigenvalues.clone(),
        eigvecs: form.eigvecs.clone(),
        lambda_2k,
        lambda_2k1,
        gap_lhs,
        critical_norm_sq,
        vc,
        certificate,
        hebey_bound,
        theorem1_bound,
        slack: LinkSlack {
            certificate_minus_gap: certificate - gap_lhs,
            hebey_minus_certificate: hebey_bound - certificate,
            theorem1_minus_hebey: theorem1_bound - hebey_bound,
        },
        diagnostics: TrialDiagnostics {
            f_norm: zero.f_norm,
            tangency: dot(&zero.f, &zero.q),
            balance_residual: zero.balance_residual,
            u_l2_norm: grid.inner(&u.values, &u.values).sqrt(),
            gram_defect: basis.gram_defect(),
            form_asymmetry: form.asymmetry,
            form_offdiag: form.offdiag,
            form_trace: (0..n + 1).map(|a| form.matrix[a][a]).sum(),
            coordinate_sum_defect,
            energy_term,
            rotated_pairing_max,
            basis_spectrum_mismatch: (basis.eigenvalues[2 * k] - lambda_2k).abs(),
            seed: zero.seed,
            seeds: zero.seeds,
        },
        u: u.values,
    };
    if gap_lhs > certificate + LINK_SLACK * (1.0 + certificate.abs()) {
        return Err(Error::Numerical {
            what: format!("gap certificate: λ_{{2k+1}} − λ_{{2k}} = {gap_lhs} exceeds {certificate}"),
            residual: gap_lhs - certificate,
        });
    }
    Ok(data)
}
