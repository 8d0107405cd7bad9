//! Command implementations. Each returns the reports it produced plus a
//! JSON payload; exit codes are derived from them in [`crate::finish`].

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use ppw_core::dirichlet::{ball_spectrum, degeneration_experiment, rectangle_spectrum, BallSpec, BoxSpec};
use ppw_core::moebius::{balance_from, BallPoint, DiscreteMeasure};
use ppw_core::pipeline::{gap_certificate, EigenBasis};
use ppw_core::sphere::{
    conformal_spectrum, geometric_constants, radial_metric_assemble_with_mesh, round_spectrum, ConformalMetric,
    RadialProfile, TabulatedProfile,
};
use ppw_core::verify::{
    check_dirichlet_universal, check_ehi, check_sobolev, check_thm1, check_thm1bis, check_thm2, check_thm3, EhiMode,
    InequalityReport, SobolevFlavor, SobolevParams,
};
use ppw_core::{Convention, Spectrum};

use crate::config::{parse_grid, parse_sides, parse_single, CheckArgs, Command, Family, FlavorArg, Model, ModelArgs, Theorem};
use crate::error::CliError;

/// Everything a command produced.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub reports: Vec<InequalityReport>,
    pub payload: Value,
    /// Seeds of any randomized step, recorded in the JSON metadata.
    pub seeds: Vec<u64>,
    /// Set by `spectrum`; written as the CSV artifact instead of reports.
    pub spectrum: Option<Spectrum>,
}

pub fn run(config: &Command) -> Result<RunOutput, CliError> {
    match config {
        Command::Spectrum { model, .. } => spectrum(model),
        Command::Verify { model, check, .. } => verify(model, check),
        Command::Sweep { model, check, .. } => sweep(model, check),
        Command::Balance { measure, points, sphere_dim, seed, balance_tol, .. } => {
            balance(measure.as_deref(), *points, *sphere_dim, *seed, *balance_tol)
        }
        Command::Sobolev { model, flavor, basis, tests, seed, check, .. } => {
            sobolev(model, *flavor, *basis, *tests, *seed, check)
        }
        Command::Pipeline { model, k, check, .. } => pipeline(model, *k, check),
        Command::Degenerate { balls, dim, count, .. } => degenerate(*balls, *dim, *count),
    }
}

/// Profile parameters of one model instance.
#[derive(Debug, Clone, Copy)]
struct ProfileParams {
    eps: f64,
    c: f64,
    height: f64,
}

fn single_params(m: &ModelArgs) -> Result<ProfileParams, CliError> {
    Ok(ProfileParams {
        eps: parse_single(&m.eps, "eps")?,
        c: parse_single(&m.c, "c")?,
        height: parse_single(&m.height, "height")?,
    })
}

fn build_profile(m: &ModelArgs, p: ProfileParams) -> Result<RadialProfile, CliError> {
    let n = m.dim;
    Ok(match m.family {
        Family::Round => RadialProfile::round(n)?,
        Family::Constant => RadialProfile::constant(n, p.c)?,
        Family::Cos => RadialProfile::cosine(n, p.eps)?,
        Family::Bump => RadialProfile::bump(n, m.center, m.width, p.height)?,
        Family::Tabulated => {
            let path = m.profile_csv.as_ref().ok_or_else(|| CliError::config("--family tabulated needs --profile-csv"))?;
            let t = TabulatedProfile::from_csv_path(path)?;
            RadialProfile::tabulated(n, t.theta, t.f)?
        }
    })
}

fn validate_model(m: &ModelArgs) -> Result<(), CliError> {
    if !(2..=8).contains(&m.dim) {
        return Err(CliError::config(format!("--dim {} outside [2, 8]", m.dim)));
    }
    if m.model == Model::Conformal && m.dim < 3 {
        return Err(CliError::config("conformal models need --dim ≥ 3"));
    }
    if m.mesh < 10 {
        return Err(CliError::config("--mesh must be at least 10"));
    }
    if m.count == 0 {
        return Err(CliError::config("--count must be positive"));
    }
    Ok(())
}

fn validate_check(c: &CheckArgs) -> Result<(), CliError> {
    if c.kmax == 0 {
        return Err(CliError::config("--kmax must be at least 1"));
    }
    for (name, v) in [("vc", c.vc), ("y", c.y), ("a", c.a), ("c-iso", c.c_iso), ("tol", c.tol)] {
        if let Some(v) = v {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::config(format!("--{name} must be positive")));
            }
        }
    }
    if let Some(h) = c.sup_h2 {
        if !(h >= 0.0) {
            return Err(CliError::config("--sup-h2 must be nonnegative"));
        }
    }
    Ok(())
}

/// Geometric data the theorem checks draw their defaults from.
#[derive(Debug, Clone, Copy, Serialize)]
struct Geometry {
    n: usize,
    max_s: f64,
    vol: f64,
    a: Option<f64>,
    c_iso: Option<f64>,
    round: bool,
}

fn metric_geometry(metric: &ConformalMetric, round: bool) -> Geometry {
    Geometry {
        n: metric.n,
        max_s: metric.max_s,
        vol: metric.volume,
        a: metric.ricci_a(),
        c_iso: Some(metric.isoperimetric_lower_bound()),
        round,
    }
}

fn round_geometry(n: usize) -> Geometry {
    let nf = n as f64;
    let (vol, c_iso) = match geometric_constants(n) {
        Ok(gc) => (gc.w_n, Some(gc.c_iso_round)),
        Err(_) => (ppw_core::sphere::sphere_volume(n), None),
    };
    Geometry { n, max_s: nf * (nf - 1.0), vol, a: Some(1.0), c_iso, round: true }
}

/// Round spectrum with at least `flat` eigenvalues counted with multiplicity.
fn round_with_len(n: usize, distinct: usize, flat: usize) -> Result<Spectrum, CliError> {
    let mut count = distinct.max(2);
    loop {
        let s = round_spectrum(n, count)?;
        if s.len() >= flat {
            return Ok(s);
        }
        count += 1;
    }
}

fn dirichlet_with_len(m: &ModelArgs, flat: usize) -> Result<Spectrum, CliError> {
    let mut count = m.count;
    loop {
        let s = match m.model {
            Model::Box => rectangle_spectrum(&BoxSpec::new(parse_sides(&m.sides)?)?, count)?,
            Model::Ball => ball_spectrum(&BallSpec::new(m.dim, m.radius)?, count)?,
            _ => unreachable!("dirichlet_with_len on a closed model"),
        };
        if s.len() >= flat {
            return Ok(s);
        }
        count += count.max(4);
    }
}

fn spectrum(m: &ModelArgs) -> Result<RunOutput, CliError> {
    validate_model(m)?;
    let spec = match m.model {
        Model::RoundSphere => round_spectrum(m.dim, m.count)?,
        Model::Conformal => {
            let metric = radial_metric_assemble_with_mesh(&build_profile(m, single_params(m)?)?, m.mesh)?;
            conformal_spectrum(&metric, m.count)?
        }
        Model::Box => {
            let sides = parse_sides(&m.sides)?;
            rectangle_spectrum(&BoxSpec::new(sides)?, m.count)?
        }
        Model::Ball => ball_spectrum(&BallSpec::new(m.dim, m.radius)?, m.count)?,
    };
    Ok(RunOutput { payload: serde_json::to_value(&spec).map_err(ppw_core::Error::from)?, spectrum: Some(spec), ..Default::default() })
}

fn needed_len(theorem: Theorem, kmax: usize) -> usize {
    match theorem {
        Theorem::EhiGap | Theorem::EhiQuadratic => kmax + 2,
        _ => 2 * kmax + 2,
    }
}

fn theorem_checks(spec: &Spectrum, geo: &Geometry, c: &CheckArgs) -> Result<Vec<InequalityReport>, CliError> {
    let dirichlet = spec.convention == Convention::Dirichlet;
    let one = |t: Theorem| -> Result<Vec<InequalityReport>, CliError> {
        if dirichlet != (t == Theorem::Dirichlet) {
            return Err(CliError::config(format!("theorem {t:?} does not apply to this model")));
        }
        let vc = || -> Result<f64, CliError> {
            match c.vc {
                Some(v) => Ok(v),
                None => Ok(geometric_constants(geo.n)?.vc_default),
            }
        };
        Ok(match t {
            Theorem::Thm1 => check_thm1(spec, geo.max_s, c.kmax)?,
            Theorem::Thm1bis => {
                let y = match c.y {
                    Some(y) => y,
                    None => geometric_constants(geo.n)?.y_sphere,
                };
                check_thm1bis(spec, y, vc()?, geo.max_s, c.kmax)?
            }
            Theorem::Thm2 => {
                let a = c.a.or(geo.a).ok_or_else(|| CliError::config("thm2 needs --a: the Ricci curvature is not positive"))?;
                check_thm2(spec, a, geo.vol, vc()?, c.kmax)?
            }
            Theorem::Thm3 => {
                let ci = c.c_iso.or(geo.c_iso).ok_or_else(|| CliError::config("thm3 needs --c-iso"))?;
                check_thm3(spec, ci, vc()?, geo.vol, c.kmax)?
            }
            Theorem::EhiGap | Theorem::EhiQuadratic => {
                let nf = geo.n as f64;
                let h2 = c
                    .sup_h2
                    .or(geo.round.then_some(nf * nf))
                    .ok_or_else(|| CliError::config("EHI checks need --sup-h2 off the round sphere"))?;
                let mode = if t == Theorem::EhiGap { EhiMode::Gap } else { EhiMode::Quadratic };
                check_ehi(spec, h2, c.kmax, mode)?
            }
            Theorem::Dirichlet => check_dirichlet_universal(spec, c.kmax)?,
            Theorem::All => unreachable!(),
        })
    };
    let mut reports = Vec::new();
    if c.theorem == Theorem::All {
        if dirichlet {
            reports.extend(one(Theorem::Dirichlet)?);
        } else {
            reports.extend(one(Theorem::Thm1)?);
            reports.extend(one(Theorem::Thm1bis)?);
            if c.a.or(geo.a).is_some() {
                reports.extend(one(Theorem::Thm2)?);
            }
            reports.extend(one(Theorem::Thm3)?);
            if c.sup_h2.is_some() || geo.round {
                reports.extend(one(Theorem::EhiGap)?);
                reports.extend(one(Theorem::EhiQuadratic)?);
            }
        }
    } else {
        reports.extend(one(c.theorem)?);
    }
    if let Some(tol) = c.tol {
        reports = reports.into_iter().map(|r| r.with_tol(tol)).collect();
    }
    Ok(reports)
}

/// Spectrum and geometry of one model instance, sized for the check.
fn model_instance(m: &ModelArgs, p: ProfileParams, c: &CheckArgs) -> Result<(Spectrum, Geometry), CliError> {
    let need = needed_len(c.theorem, c.kmax);
    Ok(match m.model {
        Model::RoundSphere => (round_with_len(m.dim, m.count, need)?, round_geometry(m.dim)),
        Model::Conformal => {
            let profile = build_profile(m, p)?;
            let metric = radial_metric_assemble_with_mesh(&profile, m.mesh)?;
            let spec = conformal_spectrum(&metric, m.count.max(need))?;
            (spec, metric_geometry(&metric, m.family == Family::Round))
        }
        Model::Box | Model::Ball => {
            // conjecture rows look up to λ_{2kmax} and λ_{n+2}
            let n = match m.model {
                Model::Box => parse_sides(&m.sides)?.len(),
                _ => m.dim,
            };
            let spec = dirichlet_with_len(m, (2 * c.kmax).max(n + 2))?;
            let geo = Geometry { n, max_s: f64::NAN, vol: f64::NAN, a: None, c_iso: None, round: false };
            (spec, geo)
        }
    })
}

fn verify(m: &ModelArgs, c: &CheckArgs) -> Result<RunOutput, CliError> {
    validate_model(m)?;
    validate_check(c)?;
    let (spec, geo) = model_instance(m, single_params(m)?, c)?;
    let reports = theorem_checks(&spec, &geo, c)?;
    Ok(RunOutput { reports, payload: json!({ "geometry": geo }), ..Default::default() })
}

fn fmt_param(v: f64) -> String {
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn sweep(m: &ModelArgs, c: &CheckArgs) -> Result<RunOutput, CliError> {
    validate_model(m)?;
    validate_check(c)?;
    if m.model != Model::Conformal {
        return Err(CliError::config("sweep needs --model conformal"));
    }
    let (label, grid) = match m.family {
        Family::Cos => ("eps", parse_grid(&m.eps)?),
        Family::Constant => ("c", parse_grid(&m.c)?),
        Family::Bump => ("height", parse_grid(&m.height)?),
        Family::Round | Family::Tabulated => ("none", vec![0.0]),
    };
    let base = ProfileParams { eps: 0.0, c: 0.0, height: 0.0 };
    let base = match m.family {
        Family::Cos => ProfileParams { c: parse_single(&m.c, "c")?, height: parse_single(&m.height, "height")?, ..base },
        Family::Constant => ProfileParams { eps: parse_single(&m.eps, "eps")?, height: parse_single(&m.height, "height")?, ..base },
        Family::Bump => ProfileParams { eps: parse_single(&m.eps, "eps")?, c: parse_single(&m.c, "c")?, ..base },
        _ => single_params(m)?,
    };
    let points: Vec<Result<(Vec<InequalityReport>, Geometry), CliError>> = grid
        .par_iter()
        .map(|&v| {
            let p = match label {
                "eps" => ProfileParams { eps: v, ..base },
                "c" => ProfileParams { c: v, ..base },
                "height" => ProfileParams { height: v, ..base },
                _ => base,
            };
            let (spec, geo) = model_instance(m, p, c)?;
            Ok((theorem_checks(&spec, &geo, c)?, geo))
        })
        .collect();
    let mut reports = Vec::new();
    let mut table = Vec::new();
    for (v, point) in grid.iter().zip(points) {
        let (rows, geo) = point?;
        let tag = fmt_param(*v);
        table.push(json!({ label: *v, "geometry": geo }));
        reports.extend(rows.into_iter().map(|mut r| {
            if label != "none" {
                r.name = format!("{}@{label}={tag}", r.name);
            }
            r
        }));
    }
    Ok(RunOutput { reports, payload: json!({ "parameter": label, "points": table }), ..Default::default() })
}

fn balance(
    path: Option<&std::path::Path>,
    points: usize,
    sphere_dim: usize,
    seed: u64,
    tol: f64,
) -> Result<RunOutput, CliError> {
    if !(tol > 0.0) {
        return Err(CliError::config("--balance-tol must be positive"));
    }
    let (mu, seeds) = match path {
        Some(p) => (DiscreteMeasure::read_csv_path(p)?, vec![]),
        None => {
            if points == 0 || sphere_dim == 0 {
                return Err(CliError::config("--points and --sphere-dim must be positive"));
            }
            (DiscreteMeasure::random(sphere_dim + 1, points, seed)?, vec![seed])
        }
    };
    let out = balance_from(&mu, &BallPoint::origin(mu.dim), tol)?;
    let report = InequalityReport::new("balance_residual", None, out.residual, tol);
    Ok(RunOutput {
        reports: vec![report],
        payload: serde_json::to_value(&out).map_err(ppw_core::Error::from)?,
        seeds,
        spectrum: None,
    })
}

fn sobolev(
    m: &ModelArgs,
    flavor: FlavorArg,
    basis_size: usize,
    tests: usize,
    seed: u64,
    c: &CheckArgs,
) -> Result<RunOutput, CliError> {
    validate_model(m)?;
    validate_check(c)?;
    if m.model != Model::Conformal {
        return Err(CliError::config("sobolev needs --model conformal"));
    }
    if basis_size == 0 || tests == 0 {
        return Err(CliError::config("--basis and --tests must be positive"));
    }
    let metric = radial_metric_assemble_with_mesh(&build_profile(m, single_params(m)?)?, m.mesh)?;
    let basis = EigenBasis::new(&metric, basis_size)?;
    let functions: Vec<_> = basis.random_combinations(tests, seed).into_iter().map(|(_, f)| f).collect();
    let defaults = SobolevParams::from_metric(&metric);
    let params = SobolevParams { a: c.a.or(defaults.a), c_iso: c.c_iso.or(defaults.c_iso), y: c.y.or(defaults.y) };
    let flavors: Vec<SobolevFlavor> = match flavor {
        FlavorArg::All => {
            // Ilias-Ric needs positive Ricci curvature
            SobolevFlavor::ALL.into_iter().filter(|f| *f != SobolevFlavor::IliasRic || params.a.is_some()).collect()
        }
        FlavorArg::Aubin => vec![SobolevFlavor::Aubin],
        FlavorArg::Hebey => vec![SobolevFlavor::Hebey],
        FlavorArg::IliasRic => vec![SobolevFlavor::IliasRic],
        FlavorArg::IliasGen => vec![SobolevFlavor::IliasGen],
        FlavorArg::Yamabe => vec![SobolevFlavor::Yamabe],
    };
    let mut reports = Vec::new();
    for f in flavors {
        reports.extend(check_sobolev(f, &metric, &basis.grid, &functions, &params)?);
    }
    if let Some(tol) = c.tol {
        reports = reports.into_iter().map(|r| r.with_tol(tol)).collect();
    }
    Ok(RunOutput { reports, payload: json!({ "params": params, "basis": basis_size }), seeds: vec![seed], spectrum: None })
}

fn pipeline(m: &ModelArgs, k: usize, c: &CheckArgs) -> Result<RunOutput, CliError> {
    validate_model(m)?;
    validate_check(c)?;
    if m.model != Model::Conformal {
        return Err(CliError::config("pipeline needs --model conformal"));
    }
    let metric = radial_metric_assemble_with_mesh(&build_profile(m, single_params(m)?)?, m.mesh)?;
    let trial = gap_certificate(k, &metric, c.vc)?;
    let link = |name: &str, lhs: f64, rhs: f64| {
        let r = InequalityReport::new(name, Some(k), lhs, rhs);
        match c.tol {
            Some(t) => r.with_tol(t),
            None => r,
        }
    };
    let reports = vec![
        link("gap_le_certificate", trial.gap_lhs, trial.certificate),
        link("certificate_le_hebey", trial.certificate, trial.hebey_bound),
        link("hebey_le_theorem1", trial.hebey_bound, trial.theorem1_bound),
    ];
    let seeds = trial.diagnostics.seeds.clone();
    Ok(RunOutput { reports, payload: serde_json::to_value(&trial).map_err(ppw_core::Error::from)?, seeds, spectrum: None })
}

fn degenerate(balls: usize, dim: usize, count: usize) -> Result<RunOutput, CliError> {
    if balls < 2 {
        return Err(CliError::config("--balls must be at least 2"));
    }
    if count < 2 {
        return Err(CliError::config("--count must be at least 2"));
    }
    let d = degeneration_experiment(balls, dim, count)?;
    Ok(RunOutput {
        reports: d.reports.clone(),
        payload: serde_json::to_value(&d).map_err(ppw_core::Error::from)?,
        ..Default::default()
    })
}
