//! Inequality checkers. Every check produces one [`InequalityReport`] per
//! index with `lhs ≤ rhs` as the claim and `margin = rhs − lhs`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dirichlet::{ball_spectrum, BallSpec};
use crate::sphere::{geometric_constants, scalar_curvature, ConformalMetric, GridFunction, ProductGrid};
use crate::spectrum::{Convention, Spectrum};
use crate::{Error, Result};

/// Relative part of the default tolerance `1e-9·(1 + |lhs| + |rhs|)`.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Satisfied,
    /// `|margin| ≤ tol`.
    NearEquality,
    Violated,
    /// The inequality is undefined at this index (e.g. a zero denominator).
    NotApplicable,
    /// An open conjecture, compared but never counted as a failure.
    Informational,
}

/// Parameters echoed into every report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportInputs {
    pub n: Option<usize>,
    pub max_s: Option<f64>,
    pub y: Option<f64>,
    pub vc: Option<f64>,
    pub a: Option<f64>,
    pub vol: Option<f64>,
    pub c_iso: Option<f64>,
    pub sup_h2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub k: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
    pub tol: f64,
    pub status: ReportStatus,
    pub inputs: ReportInputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn default_tol(lhs: f64, rhs: f64) -> f64 {
    DEFAULT_REL_TOL * (1.0 + lhs.abs() + rhs.abs())
}

fn classify(margin: f64, tol: f64) -> ReportStatus {
    if margin.abs() <= tol {
        ReportStatus::NearEquality
    } else if margin > 0.0 {
        ReportStatus::Satisfied
    } else {
        ReportStatus::Violated
    }
}

impl InequalityReport {
    /// Report for the claim `lhs ≤ rhs` with the default tolerance.
    pub fn new(name: impl Into<String>, k: Option<usize>, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        let tol = default_tol(lhs, rhs);
        InequalityReport {
            name: name.into(),
            k,
            lhs,
            rhs,
            margin,
            satisfied: margin >= -tol,
            tol,
            status: classify(margin, tol),
            inputs: ReportInputs::default(),
            note: None,
        }
    }

    pub fn not_applicable(name: impl Into<String>, k: Option<usize>, why: impl Into<String>) -> Self {
        InequalityReport {
            name: name.into(),
            k,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            satisfied: true,
            tol: 0.0,
            status: ReportStatus::NotApplicable,
            inputs: ReportInputs::default(),
            note: Some(why.into()),
        }
    }

    /// Replaces the tolerance and recomputes the verdict.
    pub fn with_tol(mut self, tol: f64) -> Self {
        if self.status == ReportStatus::NotApplicable {
            return self;
        }
        self.tol = tol;
        self.satisfied = self.margin >= -tol;
        if self.status != ReportStatus::Informational {
            self.status = classify(self.margin, tol);
        }
        self
    }

    /// Marks the row as a conjecture comparison that never fails.
    pub fn informational(mut self) -> Self {
        self.status = ReportStatus::Informational;
        self
    }

    pub fn inputs(mut self, inputs: ReportInputs) -> Self {
        self.inputs = inputs;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// A genuine failure: violated and not informational.
    pub fn is_failure(&self) -> bool {
        self.status == ReportStatus::Violated
    }
}

/// True when any report is a genuine violation.
pub fn any_violation(reports: &[InequalityReport]) -> bool {
    reports.iter().any(InequalityReport::is_failure)
}

pub fn reports_to_json(reports: &[InequalityReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}

/// CSV with columns `name,k,lhs,rhs,margin,satisfied`. Floats use the
/// shortest representation that round-trips.
pub fn write_reports_csv<W: Write>(reports: &[InequalityReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["name", "k", "lhs", "rhs", "margin", "satisfied"])?;
    for r in reports {
        let k = r.k.map(|k| k.to_string()).unwrap_or_default();
        w.write_record([
            r.name.clone(),
            k,
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.margin.to_string(),
            r.satisfied.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn flat_closed(spec: &Spectrum) -> Result<Vec<f64>> {
    if spec.convention != Convention::Closed {
        return Err(Error::domain("this check needs a closed-manifold spectrum"));
    }
    Ok(spec.flatten())
}

fn theorem_dimension(spec: &Spectrum) -> Result<f64> {
    if spec.dimension < 3 {
        return Err(Error::domain(format!("dimension {} < 3", spec.dimension)));
    }
    Ok(spec.dimension as f64)
}

/// `(λ_{2k}, λ_{2k+1})` for `k = 1…kmax`.
fn pairs(flat: &[f64], kmax: usize) -> Result<Vec<(usize, f64, f64)>> {
    if kmax == 0 {
        return Err(Error::domain("kmax must be at least 1"));
    }
    if flat.len() < 2 * kmax + 2 {
        return Err(Error::domain(format!(
            "spectrum has {} eigenvalues, kmax = {kmax} needs {}",
            flat.len(),
            2 * kmax + 2
        )));
    }
    Ok((1..=kmax).map(|k| (k, flat[2 * k], flat[2 * k + 1])).collect())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::domain(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// `λ_{2k+1} − (1 + 4/(n−2))λ_{2k} ≤ maxS/(n−1)`.
pub fn check_thm1(spec: &Spectrum, max_s: f64, kmax: usize) -> Result<Vec<InequalityReport>> {
    let n = theorem_dimension(spec)?;
    let flat = flat_closed(spec)?;
    let coeff = 1.0 + 4.0 / (n - 2.0);
    let rhs = max_s / (n - 1.0);
    let inputs = ReportInputs { n: Some(spec.dimension), max_s: Some(max_s), ..Default::default() };
    Ok(pairs(&flat, kmax)?
        .into_iter()
        .map(|(k, l2k, l2k1)| InequalityReport::new("thm1", Some(k), l2k1 - coeff * l2k, rhs).inputs(inputs))
        .collect())
}

/// Yamabe-constant form: `λ_{2k+1} − (1 + 4n(n−1)Vc^{2/n}/((n−2)Y))λ_{2k} ≤ n·Vc^{2/n}·supS/Y`.
pub fn check_thm1bis(spec: &Spectrum, y: f64, vc: f64, sup_s: f64, kmax: usize) -> Result<Vec<InequalityReport>> {
    positive("Yamabe constant Y", y)?;
    positive("conformal volume", vc)?;
    let n = theorem_dimension(spec)?;
    let flat = flat_closed(spec)?;
    let v = vc.powf(2.0 / n);
    let coeff = 1.0 + 4.0 * n * (n - 1.0) * v / ((n - 2.0) * y);
    let rhs = n * v * sup_s / y;
    let inputs = ReportInputs { n: Some(spec.dimension), max_s: Some(sup_s), y: Some(y), vc: Some(vc), ..Default::default() };
    Ok(pairs(&flat, kmax)?
        .into_iter()
        .map(|(k, l2k, l2k1)| InequalityReport::new("thm1bis", Some(k), l2k1 - coeff * l2k, rhs).inputs(inputs))
        .collect())
}

/// Ricci form in normalized eigenvalues `λ̄ = λ·vol^{2/n}`.
pub fn check_thm2(spec: &Spectrum, a: f64, vol: f64, vc: f64, kmax: usize) -> Result<Vec<InequalityReport>> {
    positive("Ricci parameter a", a)?;
    positive("volume", vol)?;
    positive("conformal volume", vc)?;
    let n = theorem_dimension(spec)?;
    let flat = flat_closed(spec)?;
    let vn = vol.powf(2.0 / n);
    let v = vc.powf(2.0 / n);
    let coeff = 1.0 + 4.0 * v / ((n - 2.0) * a * a * vn);
    let rhs = n * v;
    let inputs =
        ReportInputs { n: Some(spec.dimension), vc: Some(vc), a: Some(a), vol: Some(vol), ..Default::default() };
    Ok(pairs(&flat, kmax)?
        .into_iter()
        .map(|(k, l2k, l2k1)| InequalityReport::new("thm2", Some(k), vn * l2k1 - coeff * vn * l2k, rhs).inputs(inputs))
        .collect())
}

/// Isoperimetric form in normalized eigenvalues.
pub fn check_thm3(spec: &Spectrum, c_iso: f64, vc: f64, vol: f64, kmax: usize) -> Result<Vec<InequalityReport>> {
    positive("isoperimetric constant", c_iso)?;
    positive("volume", vol)?;
    positive("conformal volume", vc)?;
    let n = theorem_dimension(spec)?;
    let gc = geometric_constants(spec.dimension)?;
    let flat = flat_closed(spec)?;
    let vn = vol.powf(2.0 / n);
    let v = vc.powf(2.0 / n);
    let coeff = 1.0 + 8.0 * gc.cstar * gc.cstar * v / ((n - 2.0) * c_iso * c_iso * gc.w_n.powf(2.0 / n));
    let rhs = 4.0 * n * v;
    let inputs =
        ReportInputs { n: Some(spec.dimension), vc: Some(vc), vol: Some(vol), c_iso: Some(c_iso), ..Default::default() };
    Ok(pairs(&flat, kmax)?
        .into_iter()
        .map(|(k, l2k, l2k1)| InequalityReport::new("thm3", Some(k), vn * l2k1 - coeff * vn * l2k, rhs).inputs(inputs))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EhiMode {
    Gap,
    Quadratic,
}

/// Submanifold bounds with `supH2 = sup |H|²`, for `k = 0…kmax`.
pub fn check_ehi(spec: &Spectrum, sup_h2: f64, kmax: usize, mode: EhiMode) -> Result<Vec<InequalityReport>> {
    let flat = flat_closed(spec)?;
    if flat.len() < kmax + 2 {
        return Err(Error::domain(format!("spectrum has {} eigenvalues, kmax = {kmax} needs {}", flat.len(), kmax + 2)));
    }
    let n = spec.dimension as f64;
    let inputs = ReportInputs { n: Some(spec.dimension), sup_h2: Some(sup_h2), ..Default::default() };
    Ok((0..=kmax)
        .map(|k| {
            let next = flat[k + 1];
            let r = match mode {
                EhiMode::Gap => InequalityReport::new("ehi_gap", Some(k), next - (1.0 + 4.0 / n) * flat[k], sup_h2 / n),
                EhiMode::Quadratic => {
                    let lhs: f64 = flat[..=k].iter().map(|l| (next - l) * (next - l)).sum();
                    let rhs: f64 = 4.0 / n * flat[..=k].iter().map(|l| (next - l) * (l + sup_h2 / 4.0)).sum::<f64>();
                    InequalityReport::new("ehi_quadratic", Some(k), lhs, rhs)
                }
            };
            r.inputs(inputs)
        })
        .collect())
}

/// PPW, Thompson, Hile–Protter and Yang rows for `k = 1…kmax` on a Dirichlet
/// spectrum, followed by informational rows comparing with the ball in the
/// same dimension.
pub fn check_dirichlet_universal(spec: &Spectrum, kmax: usize) -> Result<Vec<InequalityReport>> {
    if spec.convention != Convention::Dirichlet {
        return Err(Error::domain("universal Dirichlet inequalities need a Dirichlet spectrum"));
    }
    if kmax == 0 {
        return Err(Error::domain("kmax must be at least 1"));
    }
    // lam[i] = λ_{i+1}
    let lam = spec.flatten();
    if lam.len() < kmax + 1 {
        return Err(Error::domain(format!("spectrum has {} eigenvalues, kmax = {kmax} needs {}", lam.len(), kmax + 1)));
    }
    let nu = spec.dimension;
    let n = nu as f64;
    let sharp = 1.0 + 4.0 / n;
    let inputs = ReportInputs { n: Some(nu), ..Default::default() };
    let mut out = vec![InequalityReport::new("ppw", Some(1), lam[1] / lam[0], sharp).inputs(inputs)];
    for k in 1..=kmax {
        let next = lam[k];
        out.push(InequalityReport::new("thompson", Some(k), next / lam[k - 1], sharp).inputs(inputs));
        let head = &lam[..k];
        if head.iter().any(|l| next - l == 0.0) {
            out.push(InequalityReport::not_applicable("hile_protter", Some(k), "λ_{k+1} = λ_i"));
        } else {
            // Σ λ_i/(λ_{k+1} − λ_i) ≥ kn/4, written as kn/4 ≤ Σ
            let sum: f64 = head.iter().map(|l| l / (next - l)).sum();
            out.push(InequalityReport::new("hile_protter", Some(k), k as f64 * n / 4.0, sum).inputs(inputs));
        }
        let lhs: f64 = head.iter().map(|l| (next - l) * (next - l)).sum();
        let rhs: f64 = 4.0 / n * head.iter().map(|l| (next - l) * l).sum::<f64>();
        out.push(InequalityReport::new("yang", Some(k), lhs, rhs).inputs(inputs));
    }
    out.extend(conjecture_rows(&lam, nu, kmax)?);
    Ok(out)
}

fn conjecture_rows(lam: &[f64], n: usize, kmax: usize) -> Result<Vec<InequalityReport>> {
    let ball = ball_spectrum(&BallSpec::unit(n)?, n + 2)?.flatten();
    let ratio = ball[1] / ball[0];
    let inputs = ReportInputs { n: Some(n), ..Default::default() };
    let mut out = Vec::new();
    for k in 1..=kmax {
        if lam.len() >= 2 * k {
            out.push(
                InequalityReport::new("conj_double_index", Some(k), lam[2 * k - 1] / lam[k - 1], ratio)
                    .inputs(inputs)
                    .informational(),
            );
        }
    }
    if lam.len() >= n + 2 && ball.len() >= n + 2 {
        out.push(
            InequalityReport::new("conj_n_plus_2", None, lam[n + 1] / lam[0], ball[n + 1] / ball[0])
                .inputs(inputs)
                .informational(),
        );
    }
    if lam.len() > n {
        let s: f64 = lam[1..=n].iter().sum();
        out.push(
            InequalityReport::new("conj_sum", None, s / lam[0], n as f64 * ratio).inputs(inputs).informational(),
        );
    }
    Ok(out)
}

/// Checks `Yang ⇒ Hile–Protter ⇒ Thompson` row-wise on the output of
/// [`check_dirichlet_universal`]. Returns the offending `k` values.
pub fn implication_chain_breaks(reports: &[InequalityReport]) -> Vec<usize> {
    let find = |name: &str, k: usize| reports.iter().find(|r| r.name == name && r.k == Some(k));
    let mut bad = Vec::new();
    for y in reports.iter().filter(|r| r.name == "yang") {
        let k = y.k.unwrap_or(0);
        if !y.satisfied {
            continue;
        }
        let hp_ok = find("hile_protter", k).is_none_or(|r| r.satisfied);
        let th_ok = find("thompson", k).is_none_or(|r| r.satisfied);
        if !hp_ok || !th_ok {
            bad.push(k);
        }
    }
    bad
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SobolevFlavor {
    Aubin,
    Hebey,
    IliasRic,
    IliasGen,
    Yamabe,
}

impl SobolevFlavor {
    pub const ALL: [SobolevFlavor; 5] =
        [SobolevFlavor::Aubin, SobolevFlavor::Hebey, SobolevFlavor::IliasRic, SobolevFlavor::IliasGen, SobolevFlavor::Yamabe];

    pub fn name(self) -> &'static str {
        match self {
            SobolevFlavor::Aubin => "sobolev_aubin",
            SobolevFlavor::Hebey => "sobolev_hebey",
            SobolevFlavor::IliasRic => "sobolev_ilias_ric",
            SobolevFlavor::IliasGen => "sobolev_ilias_gen",
            SobolevFlavor::Yamabe => "sobolev_yamabe",
        }
    }
}

impl std::str::FromStr for SobolevFlavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "aubin" => SobolevFlavor::Aubin,
            "hebey" => SobolevFlavor::Hebey,
            "ilias_ric" => SobolevFlavor::IliasRic,
            "ilias_gen" => SobolevFlavor::IliasGen,
            "yamabe" => SobolevFlavor::Yamabe,
            other => return Err(Error::invalid(format!("unknown Sobolev flavor {other:?}"))),
        })
    }
}

/// Geometric parameters some flavors need.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SobolevParams {
    /// `Ric ≥ (n−1)a²`.
    pub a: Option<f64>,
    pub c_iso: Option<f64>,
    /// Yamabe constant of the conformal class.
    pub y: Option<f64>,
}

impl SobolevParams {
    /// Parameters that are valid for `metric`: `a` from its Ricci lower
    /// bound, the comparison lower bound for `C_iso`, and the round Yamabe
    /// constant, which is a conformal invariant.
    pub fn from_metric(metric: &ConformalMetric) -> Self {
        SobolevParams {
            a: metric.ricci_a(),
            c_iso: Some(metric.isoperimetric_lower_bound()),
            y: Some(metric.constants.y_sphere),
        }
    }
}

/// Per test function `f` on `grid`: `‖f‖²_{2*} ≤ A‖∇f‖² + B‖f‖²` (Yamabe:
/// `B‖f‖²` becomes `∫S_g f²/Y`).
pub fn check_sobolev(
    flavor: SobolevFlavor,
    metric: &ConformalMetric,
    grid: &ProductGrid,
    tests: &[GridFunction],
    params: &SobolevParams,
) -> Result<Vec<InequalityReport>> {
    if grid.n != metric.n {
        return Err(Error::domain("grid and metric dimensions differ"));
    }
    let n = metric.n as f64;
    let gc = metric.constants;
    let vol = metric.volume;
    let vn = vol.powf(-2.0 / n);
    let need = |v: Option<f64>, what: &str| -> Result<f64> {
        let v = v.ok_or_else(|| Error::domain(format!("{} needs {what}", flavor.name())))?;
        positive(what, v)?;
        Ok(v)
    };
    let mut inputs = ReportInputs { n: Some(metric.n), vol: Some(vol), ..Default::default() };
    let (grad_c, l2_c) = match flavor {
        SobolevFlavor::Aubin => (gc.k2, gc.w_n.powf(-2.0 / n)),
        SobolevFlavor::Hebey => {
            inputs.max_s = Some(metric.max_s);
            (gc.k2, (n - 2.0) / (4.0 * (n - 1.0)) * gc.k2 * metric.max_s)
        }
        SobolevFlavor::IliasRic => {
            let a = need(params.a, "Ricci parameter a")?;
            inputs.a = Some(a);
            (4.0 / (n * (n - 2.0) * a * a) * vn, vn)
        }
        SobolevFlavor::IliasGen => {
            let c = need(params.c_iso, "isoperimetric constant")?;
            inputs.c_iso = Some(c);
            (2.0 * gc.k2 * gc.cstar * gc.cstar / (c * c), 4.0 * vn)
        }
        SobolevFlavor::Yamabe => {
            let y = need(params.y, "Yamabe constant Y")?;
            inputs.y = Some(y);
            (4.0 * (n - 1.0) / ((n - 2.0) * y), 1.0 / y)
        }
    };
    let scalar: Option<Vec<f64>> = (flavor == SobolevFlavor::Yamabe).then(|| {
        let per_theta: Vec<f64> = grid.theta.iter().map(|&t| scalar_curvature(&grid.profile, t)).collect();
        (0..grid.len()).map(|i| per_theta[grid.split(i).0]).collect()
    });
    tests
        .iter()
        .enumerate()
        .map(|(j, f)| {
            if f.values.len() != grid.len() {
                return Err(Error::domain(format!("test function {j} has {} samples for a grid of {}", f.values.len(), grid.len())));
            }
            let lhs = grid.critical_norm(&f.values);
            let grad = grid.gradient_inner(f, f);
            let mass = match &scalar {
                Some(s) => f.values.iter().zip(s).zip(&grid.weights).map(|((v, s), w)| s * v * v * w).sum(),
                None => grid.inner(&f.values, &f.values),
            };
            Ok(InequalityReport::new(flavor.name(), Some(j), lhs, grad_c * grad + l2_c * mass).inputs(inputs))
        })
        .collect()
}

/// Gauss-equation bound for a hypersurface with principal curvatures `κ`:
/// `S = (Σκ)² − Σκ²` against `H² = (Σκ)²`, claim `S/(n−1) ≤ H²/n`.
pub fn gauss_schwarz_check(kappas: &[f64]) -> Result<InequalityReport> {
    let nu = kappas.len();
    if nu < 3 {
        return Err(Error::domain(format!("need at least 3 principal curvatures, got {nu}")));
    }
    let n = nu as f64;
    let sum: f64 = kappas.iter().sum();
    let sq: f64 = kappas.iter().map(|k| k * k).sum();
    let s = sum * sum - sq;
    let h2 = sum * sum;
    let r = InequalityReport::new("gauss_schwarz", None, s / (n - 1.0), h2 / n).inputs(ReportInputs {
        n: Some(nu),
        max_s: Some(s),
        sup_h2: Some(h2),
        ..Default::default()
    });
    Ok(if kappas.iter().all(|k| *k == kappas[0]) { r.note("umbilic") } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::rectangle_spectrum;
    use crate::dirichlet::BoxSpec;
    use crate::sphere::{radial_metric_assemble, round_spectrum, sphere_volume, RadialProfile};
    use std::f64::consts::PI;

    fn s3() -> Spectrum {
        round_spectrum(3, 8).unwrap()
    }

    #[test]
    fn thm1_round() {
        let r = check_thm1(&s3(), 6.0, 5).unwrap();
        assert_eq!((r[0].lhs, r[0].rhs), (-12.0, 3.0));
        assert_eq!(r[1].lhs, -7.0);
        assert!(r.iter().all(|r| r.satisfied));
        assert_eq!(r[0].status, ReportStatus::Satisfied);
        assert!(check_thm1(&round_spectrum(3, 2).unwrap(), 6.0, 5).is_err());
    }

    #[test]
    fn thm1_homothety() {
        let c: f64 = 0.4;
        let scaled = s3().scaled((-2.0 * c).exp());
        let a = check_thm1(&s3(), 6.0, 5).unwrap();
        let b = check_thm1(&scaled, 6.0 * (-2.0 * c).exp(), 5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((y.margin - x.margin * (-2.0 * c).exp()).abs() < 1e-12);
            assert_eq!(x.satisfied, y.satisfied);
        }
    }

    #[test]
    fn thm1bis_reduces_to_thm1() {
        for n in 3..=6 {
            let spec = round_spectrum(n, 10).unwrap();
            let gc = geometric_constants(n).unwrap();
            let s = (n * (n - 1)) as f64;
            let a = check_thm1(&spec, s, 4).unwrap();
            let b = check_thm1bis(&spec, gc.y_sphere, gc.w_n, s, 4).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x.lhs - y.lhs).abs() < 1e-12 * (1.0 + x.lhs.abs()));
                assert!((x.rhs - y.rhs).abs() < 1e-12 * (1.0 + x.rhs.abs()));
            }
        }
        let gc = geometric_constants(3).unwrap();
        let r = check_thm1bis(&s3(), gc.y_sphere, gc.w_n, 6.0, 1).unwrap();
        assert!((r[0].margin - 15.0).abs() < 1e-12);
        assert!(check_thm1bis(&s3(), 0.0, gc.w_n, 6.0, 1).is_err());
    }

    #[test]
    fn thm1bis_monotone_in_vc() {
        let gc = geometric_constants(3).unwrap();
        let mut prev = check_thm1bis(&s3(), gc.y_sphere, gc.w_n, 6.0, 3).unwrap();
        for f in [2.0, 4.0, 8.0] {
            let cur = check_thm1bis(&s3(), gc.y_sphere, f * gc.w_n, 6.0, 3).unwrap();
            for (p, c) in prev.iter().zip(&cur) {
                assert!(c.margin >= p.margin);
            }
            prev = cur;
        }
    }

    #[test]
    fn thm2_round() {
        let w = 2.0 * PI * PI;
        let r = check_thm2(&s3(), 1.0, w, w, 1).unwrap();
        let v = w.powf(2.0 / 3.0);
        assert!((r[0].lhs + 12.0 * v).abs() < 1e-12 * v);
        assert!((r[0].rhs - 3.0 * v).abs() < 1e-12 * v);
        assert!((r[0].margin - 15.0 * v).abs() < 1e-11 * v);
        assert!(check_thm2(&s3(), 0.0, w, w, 1).is_err());
        assert!(check_thm2(&s3(), 1.0, w, w, 500).is_err());
    }

    #[test]
    fn thm2_homothety() {
        let w = 2.0 * PI * PI;
        let c: f64 = -0.3;
        let scaled = s3().scaled((-2.0 * c).exp());
        let a = check_thm2(&s3(), 1.0, w, w, 3).unwrap();
        let b = check_thm2(&scaled, (-c).exp(), w * (3.0 * c).exp(), w, 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.lhs - y.lhs).abs() < 1e-10 * (1.0 + x.lhs.abs()));
            assert!((x.rhs - y.rhs).abs() < 1e-12 * x.rhs);
        }
    }

    #[test]
    fn thm3_round() {
        let gc = geometric_constants(3).unwrap();
        let c_iso = sphere_volume(2) / (sphere_volume(3) / 2.0).powf(2.0 / 3.0);
        assert!((c_iso - gc.c_iso_round).abs() < 1e-12);
        let r = check_thm3(&round_spectrum(3, 12).unwrap(), c_iso, gc.w_n, gc.w_n, 5).unwrap();
        assert!(r.iter().all(|r| r.satisfied));
        let t2 = check_thm2(&s3(), 1.0, gc.w_n, gc.w_n, 1).unwrap();
        assert!((r[0].rhs - 4.0 * t2[0].rhs).abs() < 1e-12 * r[0].rhs);
        let worse = check_thm3(&round_spectrum(3, 12).unwrap(), 0.5 * c_iso, gc.w_n, gc.w_n, 5).unwrap();
        for (a, b) in r.iter().zip(&worse) {
            assert!(b.margin >= a.margin);
        }
    }

    #[test]
    fn ehi_round() {
        for n in 2..=5 {
            let spec = round_spectrum(n, 12).unwrap();
            let r = check_ehi(&spec, (n * n) as f64, 30, EhiMode::Gap).unwrap();
            assert_eq!(r[0].margin, 0.0);
            assert_eq!(r[0].status, ReportStatus::NearEquality);
            assert!(r.iter().all(|r| r.satisfied));
            let q = check_ehi(&spec, (n * n) as f64, 30, EhiMode::Quadratic).unwrap();
            for (g, q) in r.iter().zip(&q) {
                assert!(!q.satisfied || g.satisfied);
            }
        }
    }

    #[test]
    fn unit_square_universal() {
        let spec = rectangle_spectrum(&BoxSpec::unit_cube(2), 40).unwrap();
        let r = check_dirichlet_universal(&spec, 1).unwrap();
        let ppw = r.iter().find(|r| r.name == "ppw").unwrap();
        assert!((ppw.lhs - 2.5).abs() < 1e-14);
        let yang = r.iter().find(|r| r.name == "yang").unwrap();
        let p4 = PI.powi(4);
        assert!((yang.lhs - 9.0 * p4).abs() < 1e-10 * p4);
        assert!((yang.rhs - 12.0 * p4).abs() < 1e-10 * p4);
        assert!((yang.margin - 3.0 * p4).abs() < 1e-10 * p4);
    }

    #[test]
    fn hile_protter_not_applicable_on_repeated_values() {
        let spec = rectangle_spectrum(&BoxSpec::unit_cube(2), 10).unwrap();
        let r = check_dirichlet_universal(&spec, 3).unwrap();
        // λ₂ = λ₃ = 5π², so k = 2 divides by zero
        let hp = r.iter().find(|r| r.name == "hile_protter" && r.k == Some(2)).unwrap();
        assert_eq!(hp.status, ReportStatus::NotApplicable);
        assert!(!any_violation(&r));
    }

    #[test]
    fn disk_ppw() {
        let spec = ball_spectrum(&BallSpec::unit(2).unwrap(), 10).unwrap();
        let r = check_dirichlet_universal(&spec, 5).unwrap();
        let ppw = r.iter().find(|r| r.name == "ppw").unwrap();
        assert!((ppw.lhs - 2.5387).abs() < 1e-4);
        let conj = r.iter().find(|r| r.name == "conj_double_index" && r.k == Some(1)).unwrap();
        assert_eq!(conj.status, ReportStatus::Informational);
        assert!(implication_chain_breaks(&r).is_empty());
    }

    #[test]
    fn universal_inequalities_to_k50() {
        let specs = [
            rectangle_spectrum(&BoxSpec::unit_cube(2), 80).unwrap(),
            rectangle_spectrum(&BoxSpec::new(vec![1.0, 1.7]).unwrap(), 80).unwrap(),
            rectangle_spectrum(&BoxSpec::unit_cube(3), 80).unwrap(),
            ball_spectrum(&BallSpec::unit(2).unwrap(), 60).unwrap(),
            ball_spectrum(&BallSpec::unit(3).unwrap(), 60).unwrap(),
        ];
        for s in &specs {
            let r = check_dirichlet_universal(s, 50).unwrap();
            assert!(!any_violation(&r), "{:?}", r.iter().filter(|r| r.is_failure()).collect::<Vec<_>>());
            assert!(implication_chain_breaks(&r).is_empty());
        }
    }

    #[test]
    fn gauss_schwarz() {
        let r = gauss_schwarz_check(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((r.lhs, r.rhs), (3.0, 3.0));
        assert_eq!(r.status, ReportStatus::NearEquality);
        assert_eq!(r.note.as_deref(), Some("umbilic"));
        let r = gauss_schwarz_check(&[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(r.lhs, 5.0);
        assert!((r.rhs - 16.0 / 3.0).abs() < 1e-15);
        let r = gauss_schwarz_check(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!((r.rhs - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.note.is_none());
        assert!(gauss_schwarz_check(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn tolerance_override() {
        let r = InequalityReport::new("x", None, 1.0 + 1e-6, 1.0);
        assert!(!r.satisfied);
        let r = r.with_tol(1e-5);
        assert!(r.satisfied);
        assert_eq!(r.status, ReportStatus::NearEquality);
    }

    #[test]
    fn csv_and_json() {
        let r = check_thm1(&s3(), 6.0, 2).unwrap();
        let mut buf = Vec::new();
        write_reports_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "name,k,lhs,rhs,margin,satisfied");
        assert_eq!(text.lines().nth(1).unwrap(), "thm1,1,-12,3,15,true");
        let json = reports_to_json(&r).unwrap();
        let back: Vec<InequalityReport> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn multiplicity_encoding_is_irrelevant() {
        let a = s3();
        let split: Vec<(f64, usize)> = a.entries.iter().flat_map(|e| std::iter::repeat_n((e.eigenvalue, 1), e.multiplicity)).collect();
        let b = Spectrum::from_unsorted(Convention::Closed, 3, split, 0.0).unwrap();
        assert_eq!(check_thm1(&a, 6.0, 5).unwrap(), check_thm1(&b, 6.0, 5).unwrap());
    }

    #[test]
    fn sobolev_constants_and_reductions() {
        let metric = radial_metric_assemble(&RadialProfile::round(3).unwrap()).unwrap();
        let grid = ProductGrid::new(&metric.profile, 40, 8).unwrap();
        let one = GridFunction::constant(&grid, 1.0);
        let p = SobolevParams::from_metric(&metric);
        let r = check_sobolev(SobolevFlavor::Aubin, &metric, &grid, std::slice::from_ref(&one), &p).unwrap();
        assert!((r[0].margin).abs() < 1e-12 * r[0].lhs, "{}", r[0].margin);
        let lin = GridFunction::linear(&grid, &[0.3, 1.0, -0.5, 0.2]);
        let mut f = one.clone();
        f.axpy(0.7, &lin);
        let a = check_sobolev(SobolevFlavor::Aubin, &metric, &grid, &[f.clone()], &p).unwrap();
        let h = check_sobolev(SobolevFlavor::Hebey, &metric, &grid, &[f.clone()], &p).unwrap();
        assert!((a[0].rhs - h[0].rhs).abs() < 1e-12 * a[0].rhs);
        for flavor in SobolevFlavor::ALL {
            let r = check_sobolev(flavor, &metric, &grid, &[f.clone(), one.clone()], &p).unwrap();
            assert!(r.iter().all(|r| r.satisfied), "{flavor:?}: {r:?}");
        }
        let empty = SobolevParams::default();
        assert!(check_sobolev(SobolevFlavor::IliasRic, &metric, &grid, std::slice::from_ref(&one), &empty).is_err());
        assert!(check_sobolev(SobolevFlavor::IliasGen, &metric, &grid, std::slice::from_ref(&one), &empty).is_err());
        assert!(check_sobolev(SobolevFlavor::Yamabe, &metric, &grid, &[one], &empty).is_err());
    }
}
