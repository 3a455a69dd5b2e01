//! Batch experiment driver behind the `multibump` binary.
//!
//! Each command reads an optional JSON config, applies flag overrides, runs
//! one experiment and emits a JSON report (keys sorted) plus an optional CSV
//! series. Exit status: 0 when every asserted tolerance holds, 1 when one
//! fails or the computation errors, 2 on usage errors.

use crate::bubble::{closed_moments, quadrature_moments, Bubble, KernelKind, SmoothField, Tower};
use crate::bubble::moments::golden_max_deviation;
use crate::energy::{
    critical_lambda, energy, expansion_energy, find_critical_point, fit_expansion_constants, inner_polygon_energy,
    solve_balance, ExpansionConstants, FitOptions, Sample, Window,
};
use crate::error::Error;
use crate::norms::SearchBudget;
use crate::pohozaev::{pohozaev_dilation, pohozaev_translation, SymmetryHint};
use crate::point::{dot, norm, unit, Point};
use crate::potential::{PotentialK, Table};
use crate::quadrature::{Peak, QuadratureSpec, Reduction};
use crate::reduction::{kernel_projection, lambda_window, residual_sweep, GluedConfig};
use crate::regression::loglog_fit;
use crate::symmetry::PolygonConfig;
use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Constants,
    Energy,
    ExpansionFit,
    Balance,
    Pohozaev,
    ResidualSlope,
    CriticalPoint,
    KernelProject,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Energy => "energy",
            Command::ExpansionFit => "expansion-fit",
            Command::Balance => "balance",
            Command::Pohozaev => "pohozaev",
            Command::ResidualSlope => "residual-slope",
            Command::CriticalPoint => "critical-point",
            Command::KernelProject => "kernel-project",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "multibump", version, about = "Experiments on multi-bump bubble configurations")]
pub struct Args {
    pub command: Command,
    /// JSON experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Comma-separated polygon sizes.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Replaces the command's asserted tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for `<command>.json` and `<command>.csv`; stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialConfig {
    ConstantOne,
    QuadraticBump { r0: f64, c0: f64 },
    /// Two-column CSV `r,K`.
    Table { path: PathBuf },
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::QuadraticBump { r0: 1.0, c0: 1.0 }
    }
}

impl PotentialConfig {
    pub fn build(&self) -> crate::Result<PotentialK> {
        match self {
            PotentialConfig::ConstantOne => Ok(PotentialK::constant_one()),
            PotentialConfig::QuadraticBump { r0, c0 } => PotentialK::quadratic_bump(*r0, *c0),
            PotentialConfig::Table { path } => Ok(PotentialK::table(Table::from_csv(path)?)),
        }
    }

    fn r0(&self, k: &PotentialK) -> f64 {
        match self {
            PotentialConfig::QuadraticBump { r0, .. } => *r0,
            _ => k.bump_parameters().map_or(1.0, |b| b.0),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    /// Outer polygon sizes (balance sweeps all; other commands use the first).
    pub k: Vec<usize>,
    /// Inner polygon size.
    pub n: Option<usize>,
    /// Inner polygon radius; defaults to `r0`.
    pub t: Option<f64>,
    /// Polygon radius and scale for `energy`; the balance solution otherwise.
    pub radius: Option<f64>,
    pub scale: Option<f64>,
    /// `outer` (plane (0,1)) or `inner` (plane (2,3)) for `energy`.
    pub plane: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureOverrides {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpansionParams {
    pub n: Vec<usize>,
    pub lambda_factors: Vec<f64>,
    pub t_offsets: Vec<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for ExpansionParams {
    fn default() -> Self {
        ExpansionParams {
            n: vec![8, 12, 16],
            lambda_factors: vec![0.3, 0.45, 0.7],
            t_offsets: vec![-0.02, 0.0, 0.02],
            rel_tol: 1e-7,
            abs_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PohozaevParams {
    /// Ball center; `u` is the standard bubble at the origin.
    pub center: Point,
    pub deltas: Vec<f64>,
    pub axis: usize,
    /// Dilation base point.
    pub x0: Option<Point>,
    /// `u`, `psi0` or `psi<i>` (translation kernel along zero-based axis `i`).
    pub xi: String,
}

impl Default for PohozaevParams {
    fn default() -> Self {
        PohozaevParams { center: vec![0.4], deltas: vec![0.5, 0.8], axis: 0, x0: None, xi: "u".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResidualParams {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub points: usize,
    pub evaluations_per_start: usize,
}

impl Default for ResidualParams {
    fn default() -> Self {
        ResidualParams { lambda_lo: 1.0, lambda_hi: 10.0, points: 6, evaluations_per_start: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticalParams {
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub n: Vec<usize>,
    pub t_halfwidth: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

impl Default for CriticalParams {
    fn default() -> Self {
        CriticalParams { a: 1.0, b1: 1.0, b2: 1.0, b3: 1.0, n: vec![8, 12, 16], t_halfwidth: 0.1, lambda_lo: 0.5, lambda_hi: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelParams {
    pub center: Point,
    pub scale: f64,
    /// `d-scale`, `translation` or `u`.
    pub field: String,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams { center: vec![0.3, -0.2], scale: 2.5, field: "d-scale".into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when given.
    pub command: Option<Command>,
    pub dim: Option<usize>,
    pub seed: u64,
    pub tol: Option<f64>,
    /// Constant one for `pohozaev` and `kernel-project`, the unit bump at
    /// `r0 = 1` otherwise.
    pub potential: Option<PotentialConfig>,
    pub geometry: Geometry,
    pub quadrature: QuadratureOverrides,
    pub expansion: ExpansionParams,
    pub pohozaev: PohozaevParams,
    pub residual: ResidualParams,
    pub critical: CriticalParams,
    pub kernel: KernelParams,
    pub output_dir: Option<PathBuf>,
}

/// A malformed config or flag, with the path of the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "usage error at `{}`: {}", self.path, self.message)
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, UsageError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        UsageError { path, message: e.into_inner().to_string() }
    })
}

/// Merges flags into the config and fills command defaults.
pub fn resolve(command: Command, mut cfg: ExperimentConfig, args: &Args) -> Result<ExperimentConfig, UsageError> {
    if let Some(c) = cfg.command {
        if c != command {
            return Err(UsageError {
                path: "command".into(),
                message: format!("config is for `{}` but `{}` was requested", c.name(), command.name()),
            });
        }
    }
    cfg.command = Some(command);
    if let Some(d) = args.dim {
        cfg.dim = Some(d);
    }
    if let Some(k) = &args.k {
        cfg.geometry.k = k.clone();
    }
    if let Some(n) = args.n {
        cfg.geometry.n = Some(n);
    }
    if let Some(t) = args.tol {
        cfg.tol = Some(t);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.output_dir = Some(o.clone());
    }
    if cfg.dim.is_none() {
        cfg.dim = Some(match command {
            Command::Constants => 5,
            Command::Pohozaev | Command::KernelProject => 5,
            _ => 7,
        });
    }
    if cfg.potential.is_none() {
        cfg.potential = Some(match command {
            Command::Pohozaev | Command::KernelProject => PotentialConfig::ConstantOne,
            _ => PotentialConfig::default(),
        });
    }
    if cfg.geometry.k.is_empty() {
        cfg.geometry.k = match command {
            Command::Balance => vec![8, 16, 32],
            _ => vec![8],
        };
    }
    let dim = cfg.dim.unwrap();
    if dim < 5 {
        return Err(UsageError { path: "dim".into(), message: format!("N must be at least 5, got {dim}") });
    }
    if cfg.geometry.k.iter().any(|&k| k < 2) {
        return Err(UsageError { path: "geometry.k".into(), message: "polygon sizes must be at least 2".into() });
    }
    if let Some(t) = cfg.tol {
        if !(t > 0.0) {
            return Err(UsageError { path: "tol".into(), message: format!("tolerance must be positive, got {t}") });
        }
    }
    Ok(cfg)
}

/// Hex SHA-256 of the canonical (sorted, compact) JSON of the config.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let v = serde_json::to_value(cfg).expect("config serializes");
    hex::encode(Sha256::digest(v.to_string().as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    /// `absolute`, `relative` or `upper-bound`.
    pub kind: String,
    pub pass: bool,
}

impl Check {
    pub fn relative(name: &str, value: f64, target: f64, tol: f64) -> Self {
        let pass = ((value - target) / target).abs() <= tol;
        Check { name: name.into(), value, target, tolerance: tol, kind: "relative".into(), pass }
    }
    pub fn absolute(name: &str, value: f64, target: f64, tol: f64) -> Self {
        let pass = (value - target).abs() <= tol;
        Check { name: name.into(), value, target, tolerance: tol, kind: "absolute".into(), pass }
    }
    /// `value <= target`.
    pub fn at_most(name: &str, value: f64, target: f64) -> Self {
        Check { name: name.into(), value, target, tolerance: 0.0, kind: "upper-bound".into(), pass: value <= target }
    }
    /// `value >= target`.
    pub fn at_least(name: &str, value: f64, target: f64) -> Self {
        Check { name: name.into(), value, target, tolerance: 0.0, kind: "lower-bound".into(), pass: value >= target }
    }
}

/// Rows of a CSV series.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Series {
    fn new(header: &[&str]) -> Self {
        Series { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> crate::Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub config: ExperimentConfig,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub results: Value,
    pub error: Option<String>,
    pub series: Option<Series>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// Pretty JSON with sorted keys; `timestamp` adds the generation time.
    pub fn to_json(&self, timestamp: bool) -> String {
        let mut v = json!({
            "command": self.command.name(),
            "config": self.config,
            "config_hash": config_hash(&self.config),
            "tolerances": self.tolerances,
            "checks": self.checks,
            "results": self.results,
            "error": self.error,
            "status": if self.error.is_some() { "error" } else if self.passed() { "pass" } else { "fail" },
            "version": env!("CARGO_PKG_VERSION"),
        });
        if timestamp {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs());
            v["generated_at_unix"] = json!(secs);
        }
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }
}

struct Ctx {
    dim: usize,
    potential: PotentialK,
    r0: f64,
    spec: QuadratureSpec,
    tolerances: BTreeMap<String, f64>,
    checks: Vec<Check>,
    series: Option<Series>,
    tol: Option<f64>,
}

impl Ctx {
    /// Tolerance `name`, replaced by `--tol` when it is the primary one.
    fn tol(&mut self, name: &str, default: f64, primary: bool) -> f64 {
        let t = if primary { self.tol.unwrap_or(default) } else { default };
        self.tolerances.insert(name.into(), t);
        t
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Runs one experiment. Numeric failures are embedded in the report.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Report {
    let mut report = Report {
        command,
        config: cfg.clone(),
        tolerances: BTreeMap::new(),
        checks: Vec::new(),
        results: Value::Null,
        error: None,
        series: None,
    };
    let dim = cfg.dim.unwrap_or(7);
    let pcfg = cfg.potential.clone().unwrap_or_default();
    let potential = match pcfg.build() {
        Ok(k) => k,
        Err(e) => {
            report.error = Some(format!("potential: {e}"));
            return report;
        }
    };
    let mut spec = QuadratureSpec { seed: cfg.seed, ..QuadratureSpec::default() };
    if let Some(r) = cfg.quadrature.rel_tol {
        spec.rel_tol = r;
    }
    if let Some(a) = cfg.quadrature.abs_tol {
        spec.abs_tol = a;
    }
    if let Some(m) = cfg.quadrature.max_subdivisions {
        spec.max_subdivisions = m;
    }
    let r0 = pcfg.r0(&potential);
    let mut ctx = Ctx { dim, potential, r0, spec, tolerances: BTreeMap::new(), checks: Vec::new(), series: None, tol: cfg.tol };
    let out = match command {
        Command::Constants => run_constants(&mut ctx),
        Command::Energy => run_energy(&mut ctx, cfg),
        Command::ExpansionFit => run_expansion_fit(&mut ctx, cfg),
        Command::Balance => run_balance(&mut ctx, cfg),
        Command::Pohozaev => run_pohozaev(&mut ctx, cfg),
        Command::ResidualSlope => run_residual_slope(&mut ctx, cfg),
        Command::CriticalPoint => run_critical_point(&mut ctx, cfg),
        Command::KernelProject => run_kernel_project(&mut ctx, cfg),
    };
    report.tolerances = ctx.tolerances;
    report.checks = ctx.checks;
    report.series = ctx.series;
    match out {
        Ok(v) => report.results = v,
        Err(e) => report.error = Some(e.to_string()),
    }
    report
}

fn run_constants(ctx: &mut Ctx) -> crate::Result<Value> {
    let golden_tol = ctx.tol("golden_relative", 1e-10, false);
    let quad_tol = ctx.tol("quadrature_relative", 1e-6, true);
    let closed = closed_moments(ctx.dim)?;
    let spec = ctx.spec.clone().with_tol(ctx.spec.rel_tol.min(1e-9), ctx.spec.abs_tol);
    let (quad, errors) = quadrature_moments(ctx.dim, &spec)?;
    let golden = golden_max_deviation(&closed);
    if let Some((name, dev)) = &golden {
        ctx.checks.push(Check::at_most(&format!("golden_max_deviation({name})"), *dev, golden_tol));
    }
    let n = ctx.dim as f64;
    let two_star = 2.0 * n / (n - 2.0);
    let mut series = Series::new(&["name", "closed_form", "quadrature", "error_estimate"]);
    let pairs = [
        ("a_mass", closed.a_mass, quad.a_mass),
        ("s_mass", closed.s_mass, quad.s_mass),
        ("m2", closed.m2, quad.m2),
        ("b_flux", closed.b_flux, quad.b_flux),
        ("psi0_m2", closed.psi0_m2, quad.psi0_m2),
        ("psi0_sq", closed.psi0_sq, quad.psi0_sq),
        ("psi1_sq", closed.psi1_sq, quad.psi1_sq),
        ("grad_sq", closed.grad_sq, quad.grad_sq),
    ];
    for (name, c, q) in pairs {
        series.push(vec![name.into(), num(c), num(q), num(errors[name])]);
    }
    ctx.checks.push(Check::relative("a_mass_quadrature", quad.a_mass, closed.a_mass, quad_tol));
    ctx.checks.push(Check::relative("a_mass_identity", quad.a_mass, (n - 2.0) * closed.omega * closed.c_n, quad_tol));
    ctx.checks.push(Check::relative("b_flux_quadrature", quad.b_flux, closed.b_flux, quad_tol));
    ctx.checks.push(Check::relative("b_flux_identity", quad.b_flux, -(n - 2.0) / 2.0 * closed.a_mass, quad_tol));
    ctx.checks.push(Check::relative("psi0_m2_quadrature", quad.psi0_m2, closed.psi0_m2, quad_tol));
    ctx.checks.push(Check::relative("psi0_m2_identity", quad.psi0_m2, -2.0 / two_star * closed.m2, quad_tol));
    ctx.series = Some(series);
    Ok(json!({
        "closed_form": closed,
        "quadrature": quad,
        "quadrature_errors": errors,
        "golden_max_deviation": golden.map(|(n, d)| json!({"entry": n, "relative": d})),
        "bubble_energy": closed.bubble_energy(),
    }))
}

fn run_energy(ctx: &mut Ctx, cfg: &ExperimentConfig) -> crate::Result<Value> {
    let qtol = ctx.tol("quadrature_relative_error", 1e-6, true);
    let k = cfg.geometry.k[0];
    let (radius, scale) = match (cfg.geometry.radius, cfg.geometry.scale) {
        (Some(r), Some(s)) => (r, s),
        (r, s) => {
            let b = solve_balance(k, &ctx.potential, 1e-12, ctx.dim)?;
            (r.unwrap_or(b.r0), s.unwrap_or(b.mu))
        }
    };
    let plane = match cfg.geometry.plane.as_deref() {
        None | Some("outer") => (0, 1),
        Some("inner") => (2, 3),
        Some(other) => return Err(Error::InvalidConfig(format!("geometry.plane must be outer or inner, got {other}"))),
    };
    let poly = PolygonConfig::new(k, radius, scale, plane, ctx.dim);
    let tower = Tower::from_polygon(&poly)?;
    let spec = ctx.spec.clone().with_tol(ctx.spec.rel_tol.max(1e-7), ctx.spec.abs_tol.max(1e-8));
    let spec = spec.with_reduction(Reduction::Cylinder3d { plane, fold: k });
    let res = energy(&tower, &ctx.potential, &spec)?;
    let single = closed_moments(ctx.dim)?.bubble_energy();
    ctx.checks.push(Check::at_most("relative_error_estimate", res.error_estimate / res.value.abs(), qtol));
    Ok(json!({
        "polygon": poly,
        "energy": res,
        "single_bubble_energy": single,
        "ratio_to_separated": res.value / (k as f64 * single),
    }))
}

fn run_expansion_fit(ctx: &mut Ctx, cfg: &ExperimentConfig) -> crate::Result<Value> {
    let a_tol = ctx.tol("a_over_single_energy", 1e-3, true);
    let p = &cfg.expansion;
    let ns: Vec<usize> = match cfg.geometry.n {
        Some(n) if !p.n.contains(&n) => vec![n],
        _ => p.n.clone(),
    };
    let dim = ctx.dim;
    let e = (dim as f64 - 2.0) / (dim as f64 - 4.0);
    let mut samples = Vec::new();
    let mut series = Series::new(&["n", "t", "lambda", "energy", "error_estimate"]);
    for &n in &ns {
        for &lf in &p.lambda_factors {
            for &dt in &p.t_offsets {
                let lambda = lf * (n as f64).powf(e);
                let t = ctx.r0 + dt;
                let r = inner_polygon_energy(n, t, lambda, dim, &ctx.potential, p.rel_tol, p.abs_tol)?;
                series.push(vec![n.to_string(), num(t), num(lambda), num(r.value), num(r.error_estimate)]);
                samples.push(Sample { t, lambda, n, value: r.value, base: 0.0, error: r.error_estimate });
            }
        }
    }
    ctx.series = Some(series);
    let fit = fit_expansion_constants(&samples, ctx.r0, dim, &FitOptions { per_n_tilt: ns.len() > 1, sigma: 0.1 })?;
    let single = closed_moments(dim)?.bubble_energy();
    ctx.checks.push(Check::relative("a_over_single_energy", fit.constants.a / single, 1.0, a_tol));
    ctx.checks.push(Check::at_least("b_constants_positive", fit.positive as u8 as f64, 1.0));
    let lo = p.lambda_factors.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = p.lambda_factors.iter().copied().fold(0.0, f64::max);
    let mut crit = Vec::new();
    for &n in &ns {
        let red = fit.reduced_energy(n);
        let f = |t: f64, l: f64| red.eval(t, l);
        let w = Window::around(ctx.r0, 0.1, 0.5 * lo, 2.0 * hi, n, dim);
        match find_critical_point(&f, &w, 1e-10) {
            Ok(c) => crit.push(json!({"n": n, "point": c, "t_offset": c.t - ctx.r0})),
            Err(e) => crit.push(json!({"n": n, "error": e.to_string()})),
        }
    }
    let offsets: Vec<f64> = crit.iter().filter_map(|c| c["t_offset"].as_f64()).map(f64::abs).collect();
    let monotone = offsets.len() == ns.len() && offsets.windows(2).all(|w| w[1] < w[0]);
    Ok(json!({
        "fit": fit,
        "a_over_single_energy": fit.constants.a / single,
        "critical_points": crit,
        "t_star_approaches_r0_monotonically": monotone,
    }))
}

fn run_balance(ctx: &mut Ctx, cfg: &ExperimentConfig) -> crate::Result<Value> {
    let exp_tol = ctx.tol("exponent_relative", 0.05, true);
    let res_tol = ctx.tol("balance_residual", 1e-12, false);
    let mut series = Series::new(&["k", "mu_bar", "mu", "r_bar", "residual"]);
    let mut sols = Vec::new();
    for &k in &cfg.geometry.k {
        let s = solve_balance(k, &ctx.potential, 1e-12, ctx.dim)?;
        series.push(vec![k.to_string(), num(s.mu_bar), num(s.mu), num(s.r_bar), num(s.residual)]);
        ctx.checks.push(Check::at_most(&format!("residual_k{k}"), s.residual.abs(), res_tol));
        sols.push(s);
    }
    ctx.series = Some(series);
    let n = ctx.dim as f64;
    let mut out = json!({ "solutions": sols });
    if sols.len() >= 2 {
        let ks: Vec<f64> = sols.iter().map(|s| s.k as f64).collect();
        let mb: Vec<f64> = sols.iter().map(|s| s.mu_bar).collect();
        let mu: Vec<f64> = sols.iter().map(|s| s.mu).collect();
        let fb = loglog_fit(&ks, &mb)?;
        let fm = loglog_fit(&ks, &mu)?;
        ctx.checks.push(Check::relative("mu_bar_exponent", fb.slope, 2.0 / (n - 4.0), exp_tol));
        out["mu_bar_fit"] = json!(fb);
        out["mu_fit"] = json!(fm);
        out["mu_exponent_relative_deviation"] = json!((fm.slope - (n - 2.0) / (n - 4.0)) / ((n - 2.0) / (n - 4.0)));
    }
    Ok(out)
}

fn field_kind(name: &str, dim: usize) -> crate::Result<Option<KernelKind>> {
    match name {
        "u" => Ok(None),
        "psi0" => Ok(Some(KernelKind::Psi0)),
        s if s.starts_with("psi") => {
            let i: usize = s[3..].parse().map_err(|_| Error::InvalidConfig(format!("pohozaev.xi: unknown field {s}")))?;
            if i >= dim {
                return Err(Error::InvalidConfig(format!("pohozaev.xi: axis {i} out of range")));
            }
            Ok(Some(KernelKind::Psi(i)))
        }
        s => Err(Error::InvalidConfig(format!("pohozaev.xi: unknown field {s}"))),
    }
}

fn pad(p: &[f64], dim: usize) -> Point {
    let mut v = p.to_vec();
    v.resize(dim, 0.0);
    v
}

fn run_pohozaev(ctx: &mut Ctx, cfg: &ExperimentConfig) -> crate::Result<Value> {
    let rtol = ctx.tol("relative_residual", 1e-4, true);
    let p = &cfg.pohozaev;
    let dim = ctx.dim;
    let center = pad(&p.center, dim);
    let x0 = pad(p.x0.as_deref().unwrap_or(&[]), dim);
    if p.axis >= dim {
        return Err(Error::InvalidConfig(format!("pohozaev.axis {} out of range", p.axis)));
    }
    let u = Bubble::standard(dim);
    let kind = field_kind(&p.xi, dim)?;
    let xi: Box<dyn SmoothField> = match kind {
        None => Box::new(u.clone()),
        Some(k) => Box::new(u.kernel_field(k)?),
    };
    // every field here is axial about the line through the origin and the
    // ball center when the translation kernels point along it
    let c = norm(&center);
    let hint = if c == 0.0 {
        match kind {
            Some(KernelKind::Psi(i)) => SymmetryHint::Axial(unit(dim, i)),
            _ => SymmetryHint::Radial,
        }
    } else {
        let dir: Point = center.iter().map(|v| v / c).collect();
        let along = |i: usize| (dot(&dir, &unit(dim, i)).abs() - 1.0).abs() < 1e-12;
        let x0_on_line = {
            let s = dot(&x0, &dir);
            norm(&x0.iter().zip(&dir).map(|(a, d)| a - s * d).collect::<Point>()) < 1e-12
        };
        match kind {
            Some(KernelKind::Psi(i)) if !along(i) => SymmetryHint::None,
            _ if !x0_on_line => SymmetryHint::None,
            _ => SymmetryHint::Axial(dir),
        }
    };
    let peaks = vec![Peak::new(vec![0.0; dim], 1.0)];
    let spec = ctx.spec.clone().with_tol(ctx.spec.rel_tol.min(1e-9), ctx.spec.abs_tol.min(1e-12));
    let mut rows = Vec::new();
    let mut series = Series::new(&["identity", "delta", "boundary_sum", "volume", "residual", "relative_residual", "error_budget"]);
    for &delta in &p.deltas {
        let tr = pohozaev_translation(&u, xi.as_ref(), &ctx.potential, &center, delta, p.axis, &hint, peaks.clone(), &spec)?;
        let di = pohozaev_dilation(&u, xi.as_ref(), &ctx.potential, &center, delta, &x0, &hint, peaks.clone(), &spec)?;
        for r in [&tr, &di] {
            let name = format!("{:?}", r.identity).to_lowercase();
            series.push(vec![
                name.clone(),
                num(delta),
                num(r.boundary_sum),
                num(r.volume.value),
                num(r.residual),
                num(r.relative_residual),
                num(r.error_budget),
            ]);
            ctx.checks.push(Check::at_most(&format!("{name}_delta{delta}"), r.relative_residual, rtol));
        }
        rows.push(json!({"delta": delta, "translation": tr, "dilation": di}));
    }
    ctx.series = Some(series);
    Ok(json!({ "balls": rows, "hint": hint }))
}

fn run_residual_slope(ctx: &mut Ctx, cfg: &ExperimentConfig) -> crate::Result<Value> {
    let slope_max = ctx.tol("slope_upper_bound", -1.0, true);
    let r2_min = ctx.tol("r_squared_lower_bound", 0.95, false);
    let p = &cfg.residual;
    let k = cfg.geometry.k[0];
    let n = cfg.geometry.n.unwrap_or(8);
    let t = cfg.geometry.t.unwrap_or(ctx.r0);
    if p.points < 2 {
        return Err(Error::InvalidConfig("residual.points must be at least 2".into()));
    }
    let (lo, hi) = lambda_window(n, ctx.dim, p.lambda_lo, p.lambda_hi);
    let lambdas: Vec<f64> = (0..p.points).map(|i| lo * (hi / lo).powf(i as f64 / (p.points - 1) as f64)).collect();
    let potential = ctx.potential.clone();
    let dim = ctx.dim;
    let make = |l: f64| GluedConfig::balanced(k, n, t, l, potential.clone(), dim);
    make(lo)?.check_window(p.lambda_lo, p.lambda_hi)?;
    let budget = SearchBudget { evaluations_per_start: p.evaluations_per_start, ..SearchBudget::default() };
    let sweep = residual_sweep(&make, &lambdas, &budget)?;
    let mut series = Series::new(&["lambda", "norm_lower_bound", "converged"]);
    for r in &sweep.rows {
        series.push(vec![num(r.lambda), num(r.norm_lower_bound), r.converged.to_string()]);
    }
    ctx.series = Some(series);
    ctx.checks.push(Check::at_most("slope", sweep.fit.slope, slope_max));
    ctx.checks.push(Check::at_least("r_squared", sweep.fit.r_squared, r2_min));
    Ok(json!({ "sweep": sweep, "k": k, "n": n, "t": t }))
}

fn run_critical_point(ctx: &mut Ctx, cfg: &ExperimentConfig) -> crate::Result<Value> {
    let tol = ctx.tol("location", 1e-8, true);
    let p = &cfg.critical;
    let c = ExpansionConstants { a: p.a, b1: p.b1, b2: p.b2, b3: p.b3, sigma: 0.1, r0: ctx.r0, dim: ctx.dim };
    let ns = match cfg.geometry.n {
        Some(n) => vec![n],
        None => p.n.clone(),
    };
    let mut rows = Vec::new();
    let mut series = Series::new(&["n", "t_star", "lambda_star", "lambda_closed_form", "classification"]);
    for n in ns {
        let f = |t: f64, l: f64| expansion_energy(t, l, n, &c, 0.0);
        let w = Window::around(c.r0, p.t_halfwidth, p.lambda_lo, p.lambda_hi, n, c.dim);
        let cp = find_critical_point(&f, &w, 1e-12)?;
        let want = critical_lambda(&c, n);
        ctx.checks.push(Check::absolute(&format!("t_star_n{n}"), cp.t, c.r0, tol));
        ctx.checks.push(Check::relative(&format!("lambda_star_n{n}"), cp.lambda, want, tol));
        series.push(vec![n.to_string(), num(cp.t), num(cp.lambda), num(want), format!("{:?}", cp.classification).to_lowercase()]);
        rows.push(json!({"n": n, "point": cp, "lambda_closed_form": want, "window": w}));
    }
    ctx.series = Some(series);
    Ok(json!({ "constants": c, "critical_points": rows }))
}

fn run_kernel_project(ctx: &mut Ctx, cfg: &ExperimentConfig) -> crate::Result<Value> {
    let tol = ctx.tol("coefficient_absolute", 1e-6, true);
    let p = &cfg.kernel;
    let dim = ctx.dim;
    let center = pad(&p.center, dim);
    let b = Bubble::new(center, p.scale);
    let e = unit(dim, 0);
    let spec = ctx.spec.clone().with_tol(ctx.spec.rel_tol.min(1e-9), ctx.spec.abs_tol.min(1e-14));
    let (coef, expected) = match p.field.as_str() {
        "d-scale" => {
            let f = |y: &[f64]| b.d_scale(y);
            (kernel_projection(&f, &b, &SymmetryHint::Radial, &spec)?, Some((1.0 / b.scale, 0.0)))
        }
        "translation" => {
            // derivative with respect to the center along axis 0
            let f = |y: &[f64]| -b.eval_grad(y)[0];
            (kernel_projection(&f, &b, &SymmetryHint::Axial(e), &spec)?, Some((0.0, -b.scale)))
        }
        "u" => {
            let f = |y: &[f64]| b.eval(y);
            (kernel_projection(&f, &b, &SymmetryHint::Radial, &spec)?, None)
        }
        other => return Err(Error::InvalidConfig(format!("kernel.field must be d-scale, translation or u, got {other}"))),
    };
    match expected {
        Some((b0, b1)) => {
            ctx.checks.push(Check::absolute("b0", coef.b0, b0, tol));
            ctx.checks.push(Check::absolute("b1", coef.b1, b1, tol * b1.abs().max(1.0)));
        }
        None => ctx.checks.push(Check::absolute("b1", coef.b1, 0.0, tol)),
    }
    Ok(json!({ "coefficients": coef, "expected": expected.map(|(a, b)| json!({"b0": a, "b1": b})) }))
}

fn write_file(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d)?;
    }
    std::fs::write(path, text)
}

/// Entry point of the binary: parses `args`, runs, writes artifacts and
/// returns the exit status.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match parse_config(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return 2;
                }
            },
            Err(e) => {
                eprintln!("usage error at `--config`: cannot read {}: {e}", path.display());
                return 2;
            }
        },
        None => ExperimentConfig::default(),
    };
    let cfg = match resolve(args.command, cfg, &args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let report = run(args.command, &cfg);
    let json = report.to_json(!args.no_timestamp);
    match &cfg.output_dir {
        Some(dir) => {
            let name = args.command.name();
            if let Err(e) = write_file(&dir.join(format!("{name}.json")), &json) {
                eprintln!("cannot write report: {e}");
                return 1;
            }
            if let Some(s) = &report.series {
                match s.to_csv() {
                    Ok(text) => {
                        if let Err(e) = write_file(&dir.join(format!("{name}.csv")), &text) {
                            eprintln!("cannot write series: {e}");
                            return 1;
                        }
                    }
                    Err(e) => {
                        eprintln!("cannot format series: {e}");
                        return 1;
                    }
                }
            }
            for c in &report.checks {
                eprintln!("{} {} = {:e}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.value);
            }
            if let Some(e) = &report.error {
                eprintln!("error: {e}");
            }
        }
        None => print!("{json}"),
    }
    report.exit_code()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(cmd: &str) -> Args {
        Args::try_parse_from(["multibump", cmd, "--no-timestamp"]).unwrap()
    }

    #[test]
    fn missing_r0_is_a_usage_error_with_path() {
        let e = parse_config(r#"{"potential": {"form": "quadratic-bump", "c0": 1.0}}"#).unwrap_err();
        assert_eq!(e.path, "potential");
        assert!(e.message.contains("r0"));
        let e = parse_config(r#"{"geometry": {"k": [8], "radiuss": 1.0}}"#).unwrap_err();
        assert!(e.path.starts_with("geometry"), "{}", e.path);
    }

    #[test]
    fn command_mismatch_is_rejected() {
        let cfg = parse_config(r#"{"command": "balance"}"#).unwrap();
        let e = resolve(Command::Energy, cfg, &args("energy")).unwrap_err();
        assert_eq!(e.path, "command");
    }

    #[test]
    fn flags_override_config() {
        let cfg = parse_config(r#"{"dim": 6, "geometry": {"k": [4]}}"#).unwrap();
        let a = Args::try_parse_from(["multibump", "balance", "--dim", "7", "--k", "8,16", "--tol", "0.1"]).unwrap();
        let r = resolve(Command::Balance, cfg, &a).unwrap();
        assert_eq!(r.dim, Some(7));
        assert_eq!(r.geometry.k, vec![8, 16]);
        assert_eq!(r.tol, Some(0.1));
    }

    #[test]
    fn report_keys_are_sorted_and_hash_is_stable() {
        let cfg = resolve(Command::Balance, ExperimentConfig::default(), &args("balance")).unwrap();
        let r = run(Command::Balance, &cfg);
        let a = r.to_json(false);
        let b = run(Command::Balance, &cfg).to_json(false);
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(a.find("\"checks\"").unwrap() < a.find("\"command\"").unwrap());
        assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
        assert!(!a.contains("generated_at"));
    }

    #[test]
    fn csv_uses_header_and_line_feeds() {
        let mut s = Series::new(&["a", "b"]);
        s.push(vec!["1".into(), "2".into()]);
        assert_eq!(s.to_csv().unwrap(), "a,b\n1,2\n");
    }

    #[test]
    fn numeric_failure_is_embedded() {
        let cfg = parse_config(r#"{"potential": {"form": "constant-one"}}"#).unwrap();
        let cfg = resolve(Command::Balance, cfg, &args("balance")).unwrap();
        let r = run(Command::Balance, &cfg);
        assert!(r.error.is_some());
        assert_eq!(r.exit_code(), 1);
        assert!(r.to_json(false).contains("\"status\": \"error\""));
    }
}
