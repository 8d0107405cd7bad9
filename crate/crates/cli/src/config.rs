//! Command-line and config-file surface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::CliError;

/// Points of a `start:stop:step` grid closer than this to `stop` are kept.
const GRID_ENDPOINT_TOL: f64 = 1e-12;
const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "ppw", version, about = "Eigenvalue-gap inequality checks on model geometries")]
#[command(args_override_self = true)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Print a spectrum as JSON.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check one theorem family on one model.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        check: CheckArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check a theorem family over a parameter grid `start:stop:step`.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        check: CheckArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Center-of-mass balancing of a discrete measure.
    Balance {
        /// CSV with columns x0..xm,weight.
        #[arg(long)]
        measure: Option<PathBuf>,
        /// Random measure size when no CSV is given.
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Sphere dimension of the random measure.
        #[arg(long, default_value_t = 2)]
        sphere_dim: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        balance_tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sobolev inequalities on random band-limited functions.
    Sobolev {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = FlavorArg::All)]
        flavor: FlavorArg,
        /// Number of eigenfunctions the test functions are built from.
        #[arg(long, default_value_t = 20)]
        basis: usize,
        #[arg(long, default_value_t = 20)]
        tests: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        check: CheckArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Trial-function gap certificate at index `k`.
    Pipeline {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        check: CheckArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// `λ_{k+1}/λ_k` for `k` disjoint equal balls.
    Degenerate {
        #[arg(long, default_value_t = 2)]
        balls: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Verify { .. } => "verify",
            Command::Sweep { .. } => "sweep",
            Command::Balance { .. } => "balance",
            Command::Sobolev { .. } => "sobolev",
            Command::Pipeline { .. } => "pipeline",
            Command::Degenerate { .. } => "degenerate",
        }
    }

    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Spectrum { output, .. }
            | Command::Verify { output, .. }
            | Command::Sweep { output, .. }
            | Command::Balance { output, .. }
            | Command::Sobolev { output, .. }
            | Command::Pipeline { output, .. }
            | Command::Degenerate { output, .. } => output,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// `e^{2f} g₀` on `S^n`, finite elements.
    Conformal,
    /// Closed-form round spectrum.
    RoundSphere,
    /// Dirichlet box with `--sides`.
    Box,
    /// Dirichlet ball with `--radius`.
    Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Round,
    Constant,
    #[value(alias = "cosine")]
    Cos,
    Bump,
    Tabulated,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = Model::Conformal)]
    pub model: Model,
    #[arg(long, value_enum, default_value_t = Family::Round)]
    pub family: Family,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Cosine amplitude; a grid `start:stop:step` for `sweep`.
    #[arg(long, default_value = "0")]
    pub eps: String,
    /// Constant conformal factor; a grid for `sweep`.
    #[arg(long, default_value = "0")]
    pub c: String,
    #[arg(long, default_value_t = 1.0)]
    pub center: f64,
    #[arg(long, default_value_t = 0.5)]
    pub width: f64,
    /// Bump height; a grid for `sweep`.
    #[arg(long, default_value = "0.2")]
    pub height: String,
    /// Tabulated profile CSV with columns theta,f.
    #[arg(long)]
    pub profile_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 4000)]
    pub mesh: usize,
    /// Number of eigenvalues (closed models) or distinct eigenvalues
    /// (round sphere, box, ball).
    #[arg(long, default_value_t = 30)]
    pub count: usize,
    /// Box side lengths, comma separated.
    #[arg(long, default_value = "1,1")]
    pub sides: String,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    Thm1,
    Thm1bis,
    Thm2,
    Thm3,
    EhiGap,
    EhiQuadratic,
    Dirichlet,
    /// Every theorem applicable to the model.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlavorArg {
    All,
    Aubin,
    Hebey,
    IliasRic,
    IliasGen,
    Yamabe,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value_t = Theorem::Thm1)]
    pub theorem: Theorem,
    #[arg(long, default_value_t = 5)]
    pub kmax: usize,
    /// Conformal volume; defaults to the volume of the unit sphere.
    #[arg(long)]
    pub vc: Option<f64>,
    /// Yamabe constant; defaults to the round value.
    #[arg(long)]
    pub y: Option<f64>,
    /// Ricci parameter with `Ric ≥ (n−1)a²`; defaults to the metric's bound.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub c_iso: Option<f64>,
    /// `sup |H|²`; defaults to `n²` on the round sphere.
    #[arg(long)]
    pub sup_h2: Option<f64>,
    /// Absolute tolerance replacing the default relative one.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON output path.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Suppress the margin table.
    #[arg(long)]
    pub quiet: bool,
    /// Flat `key = value` file mirroring the flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Parses `start:stop:step` (inclusive of `stop` within 1e-12) or a single number.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let num = |s: &str| -> Result<f64, CliError> {
        let v: f64 = s.trim().parse().map_err(|_| CliError::config(format!("not a number: {s:?}")))?;
        if !v.is_finite() {
            return Err(CliError::config(format!("not finite: {s:?}")));
        }
        Ok(v)
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) {
                return Err(CliError::config(format!("grid step must be positive in {text:?}")));
            }
            if stop < start {
                return Err(CliError::config(format!("grid stop below start in {text:?}")));
            }
            let steps = ((stop - start) / step + GRID_ENDPOINT_TOL).floor();
            if steps as usize >= MAX_GRID_POINTS {
                return Err(CliError::config(format!("grid {text:?} has too many points")));
            }
            let mut out: Vec<f64> = (0..=steps as usize).map(|i| start + i as f64 * step).collect();
            if let Some(last) = out.last_mut() {
                if (*last - stop).abs() <= GRID_ENDPOINT_TOL * (1.0 + stop.abs()) {
                    *last = stop;
                }
            }
            Ok(out)
        }
        _ => Err(CliError::config(format!("expected a number or start:stop:step, got {text:?}"))),
    }
}

pub fn parse_single(text: &str, what: &str) -> Result<f64, CliError> {
    match parse_grid(text)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(CliError::config(format!("--{what} takes a single value outside `sweep`"))),
    }
}

pub fn parse_sides(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::config(format!("bad side length {s:?}"))))
        .collect()
}

/// Reads a `key = value` file into flag tokens. `command` is returned separately.
pub fn read_config_file(path: &Path) -> Result<(Option<String>, Vec<String>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let mut command = None;
    let mut tokens = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "command" => command = Some(value.to_string()),
            "config" => return Err(CliError::config("config files cannot include other config files")),
            _ => match value {
                "true" => tokens.push(format!("--{key}")),
                "false" => {}
                _ => {
                    tokens.push(format!("--{key}"));
                    tokens.push(value.to_string());
                }
            },
        }
    }
    Ok((command, tokens))
}

/// Splices `--config FILE` contents into `args` right after the subcommand,
/// so that flags given explicitly on the command line take precedence.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let (path, consumed) = match args[pos].strip_prefix("--config=") {
        Some(p) => (PathBuf::from(p), 1),
        None => {
            let p = args.get(pos + 1).ok_or_else(|| CliError::config("--config needs a path"))?;
            (PathBuf::from(p), 2)
        }
    };
    let (command, tokens) = read_config_file(&path)?;
    let mut rest: Vec<String> = args.clone();
    rest.drain(pos..pos + consumed);
    let program = rest.first().cloned().unwrap_or_else(|| "ppw".into());
    let mut tail: Vec<String> = rest.into_iter().skip(1).collect();
    let sub = match tail.first() {
        Some(first) if !first.starts_with('-') => tail.remove(0),
        _ => command.ok_or_else(|| CliError::config("no subcommand on the command line or in the config file"))?,
    };
    let mut out = vec![program, sub];
    out.extend(tokens);
    out.extend(tail);
    Ok(out)
}

/// Worker count from `PPW_THREADS`, if set.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("PPW_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::config(format!("PPW_THREADS must be a positive integer, got {v:?}"))),
        },
    }
}
