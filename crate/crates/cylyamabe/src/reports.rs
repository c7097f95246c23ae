//! Run configuration, result tables, manifests and the report-producing
//! commands behind the `cyl` binary.
//!
//! Config files are flat `key = value` text. Lists are comma separated and
//! `#` starts a comment. Keys:
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `scenario` | `default` | free-form label echoed in the manifest |
//! | `delta` | `0.03` | conical chart radius of the path |
//! | `alpha`, `omega` | `0.6`, `0.7` | gluing exponents |
//! | `b` | `1.1` | Green expansion exponent, `1 < b < ω/α` |
//! | `epsilon` | `1.953125e-5` | path scale(s); the first is used |
//! | `fit_epsilons` | `7.8125e-5, 3.90625e-5, 1.953125e-5, 9.765625e-6` | expansion fit sequence |
//! | `interp_lambda` | `0.5` | λ of the interpolation fit |
//! | `path_grid` | `51` | μ samples |
//! | `calibrate` | `false` | recalibrate ε before the path run |
//! | `t_grid` | 15 log points in `[0.1, 1000]` | interaction separations at ε = 1 |
//! | `slope_t` | `20, 40, 80, 160, 320` | separations of the slope fits |
//! | `green_t_grid` | `0.1, 0.05, 0.025, 0.0125` | pole distances |
//! | `green_delta_flat`, `green_delta_round` | `1.0`, `0.5` | Green ball radii |
//! | `lmax` | `96` | harmonic cutoff of the Green solver |
//! | `h_fd` | `1e-3` | finite-difference step |
//! | `cnc_points` | `3` | random basepoints for `cnc-verify` |
//! | `seed` | `24301` | seed of the random basepoints |
//! | `tol_scale` | `1` | multiplies quadrature tolerances |
//! | `out_dir` | none | output directory |

use crate::cone::cnc::verify_cnc_along;
use crate::cone::link::verify_first_order_identity;
use crate::cone::{ChartMetricField, LinkFamily, LinkFunction, PolynomialMetric};
use crate::constants::{constants_by_quadrature, sobolev_constants, ClosedFormConstants, Point};
use crate::error::{Error, Result};
use crate::green::{
    extract_mass, mass_divergence_sweep, parametrix_scaling, solve_dirichlet_green, BoundaryDatum, GreenProblem,
    MassOptions,
};
use crate::interaction::{self, asymptotic_slope, curve_point, verify_monotonicity, InteractionKind, SlopeTarget};
use crate::path::{self, build_path, calibrate_epsilon, fit_expansion_a, Exponents, FitLeg, PathOptions};
use crate::quadrature::QuadratureSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Calibrated path scale: the first `ε = 10⁻²·2⁻ᵏ` where the midpoint of the
/// path clears `6S₄` by three error bars and the double-bubble estimate of
/// `A` moved by less than 2% from the previous step.
pub const CALIBRATED_EPSILON: f64 = 1.953125e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: String,
    pub delta: f64,
    pub alpha: f64,
    pub omega: f64,
    pub b: f64,
    pub epsilons: Vec<f64>,
    pub fit_epsilons: Vec<f64>,
    pub interp_lambda: f64,
    pub path_grid: usize,
    pub calibrate: bool,
    pub t_grid: Vec<f64>,
    pub slope_t: Vec<f64>,
    pub green_t_grid: Vec<f64>,
    pub green_delta_flat: f64,
    pub green_delta_round: f64,
    pub lmax: usize,
    pub h_fd: f64,
    pub cnc_points: usize,
    pub seed: u64,
    pub tol_scale: f64,
    pub out_dir: Option<PathBuf>,
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

impl Default for RunConfig {
    fn default() -> Self {
        let e = CALIBRATED_EPSILON;
        RunConfig {
            scenario: "default".into(),
            delta: 0.03,
            alpha: 0.6,
            omega: 0.7,
            b: 1.1,
            epsilons: vec![e],
            fit_epsilons: vec![4.0 * e, 2.0 * e, e, 0.5 * e],
            interp_lambda: 0.5,
            path_grid: 51,
            calibrate: false,
            t_grid: log_grid(0.1, 1000.0, 15),
            slope_t: vec![20.0, 40.0, 80.0, 160.0, 320.0],
            green_t_grid: vec![0.1, 0.05, 0.025, 0.0125],
            green_delta_flat: 1.0,
            green_delta_round: 0.5,
            lmax: 96,
            h_fd: 1e-3,
            cnc_points: 3,
            seed: 24301,
            tol_scale: 1.0,
            out_dir: None,
        }
    }
}

fn config_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn parse_f64(line: usize, v: &str) -> Result<f64> {
    v.trim().parse::<f64>().map_err(|e| config_err(line, format!("{v:?}: {e}")))
}

fn parse_list(line: usize, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_f64(line, s)).collect()
}

fn parse_usize(line: usize, v: &str) -> Result<usize> {
    v.trim().parse::<usize>().map_err(|e| config_err(line, format!("{v:?}: {e}")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| config_err(n, "expected key = value"))?;
            let v = v.trim();
            match k.trim() {
                "scenario" => c.scenario = v.to_string(),
                "delta" => c.delta = parse_f64(n, v)?,
                "alpha" => c.alpha = parse_f64(n, v)?,
                "omega" => c.omega = parse_f64(n, v)?,
                "b" => c.b = parse_f64(n, v)?,
                "epsilon" => c.epsilons = parse_list(n, v)?,
                "fit_epsilons" => c.fit_epsilons = parse_list(n, v)?,
                "interp_lambda" => c.interp_lambda = parse_f64(n, v)?,
                "path_grid" => c.path_grid = parse_usize(n, v)?,
                "calibrate" => {
                    c.calibrate = v.parse::<bool>().map_err(|e| config_err(n, format!("{v:?}: {e}")))?
                }
                "t_grid" => c.t_grid = parse_list(n, v)?,
                "slope_t" => c.slope_t = parse_list(n, v)?,
                "green_t_grid" => c.green_t_grid = parse_list(n, v)?,
                "green_delta_flat" => c.green_delta_flat = parse_f64(n, v)?,
                "green_delta_round" => c.green_delta_round = parse_f64(n, v)?,
                "lmax" => c.lmax = parse_usize(n, v)?,
                "h_fd" => c.h_fd = parse_f64(n, v)?,
                "cnc_points" => c.cnc_points = parse_usize(n, v)?,
                "seed" => c.seed = v.parse::<u64>().map_err(|e| config_err(n, format!("{v:?}: {e}")))?,
                "tol_scale" => c.tol_scale = parse_f64(n, v)?,
                "out_dir" => c.out_dir = Some(PathBuf::from(v)),
                other => return Err(config_err(n, format!("unknown key {other:?}"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn exponents(&self) -> Result<Exponents> {
        Exponents::new(self.alpha, self.omega)
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.exponents().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.b > 1.0 && self.b < e.omega / e.alpha) {
            return Err(Error::Config(format!(
                "b = {} must lie in (1, ω/α) = (1, {})",
                self.b,
                e.omega / e.alpha
            )));
        }
        if !(self.delta > 0.0 && self.delta < std::f64::consts::FRAC_PI_4) {
            return Err(Error::Config(format!("delta = {} must lie in (0, π/4)", self.delta)));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("epsilon list must be nonempty and positive".into()));
        }
        if self.fit_epsilons.len() < 2 || self.fit_epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("fit_epsilons needs at least two positive values".into()));
        }
        if !(0.0..=1.0).contains(&self.interp_lambda) {
            return Err(Error::Config("interp_lambda must lie in [0, 1]".into()));
        }
        if self.t_grid.is_empty() || self.t_grid.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Config("t_grid must be nonempty and positive".into()));
        }
        if !(self.tol_scale > 0.0 && self.tol_scale.is_finite()) {
            return Err(Error::Config("tol_scale must be positive".into()));
        }
        if !(self.h_fd > 0.0) {
            return Err(Error::Config("h_fd must be positive".into()));
        }
        Ok(())
    }

    /// `base` with its tolerances multiplied by `tol_scale`.
    pub fn spec(&self, base: QuadratureSpec) -> QuadratureSpec {
        scale_spec(base, self.tol_scale)
    }

    /// Output directory: explicit value, then `CYL_OUT_DIR`, then `cyl-out`.
    pub fn resolve_out_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = &self.out_dir {
            return p.clone();
        }
        match std::env::var_os("CYL_OUT_DIR") {
            Some(p) if !p.is_empty() => PathBuf::from(p),
            _ => PathBuf::from("cyl-out"),
        }
    }
}

pub fn scale_spec(base: QuadratureSpec, k: f64) -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: base.rel_tol * k,
        abs_tol: base.abs_tol * k,
        ..base
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(if x { "PASS" } else { "FAIL" }.to_string())
    }
}

/// 17 significant digits, `.` decimal separator.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("tables serialize")
    }
}

/// `(x, y, yerr)` triples for plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub name: String,
    pub points: Vec<(f64, f64, f64)>,
}

impl PlotSeries {
    pub fn to_dat(&self) -> String {
        let mut out = String::from("# x y yerr\n");
        for (x, y, e) in &self.points {
            let _ = writeln!(out, "{} {} {}", fmt_num(*x), fmt_num(*y), fmt_num(*e));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultEntry {
    pub name: String,
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub lines: Vec<String>,
    pub tables: Vec<Table>,
    pub plots: Vec<PlotSeries>,
    pub checks: Vec<Check>,
    pub results: Vec<ResultEntry>,
    pub stages: Vec<Stage>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report {
            command: command.into(),
            ..Default::default()
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    fn result(&mut self, name: &str, value: f64, error: f64) {
        self.results.push(ResultEntry {
            name: name.into(),
            value,
            error,
        });
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let now = Instant::now();
        let out = f();
        self.stages.push(Stage {
            name: name.into(),
            seconds: now.elapsed().as_secs_f64(),
        });
        out
    }

    /// 0 when every check passed, otherwise the 1-based index of the first
    /// failing check.
    pub fn exit_code(&self) -> i32 {
        self.checks
            .iter()
            .position(|c| !c.passed)
            .map(|i| i as i32 + 1)
            .unwrap_or(0)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let _ = writeln!(out, "{l}");
        }
        for c in &self.checks {
            let _ = writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: RunConfig,
    pub version: String,
    pub constants: ClosedFormConstants,
    pub stages: Vec<Stage>,
    pub results: Vec<ResultEntry>,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| io_err(path, e))
}

/// Writes every table as CSV and JSON, plot series as `.dat`, and the
/// manifest. Returns the files written.
pub fn persist(report: &Report, config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut files = Vec::new();
    for t in &report.tables {
        let csv = dir.join(format!("{}.csv", t.name));
        write_file(&csv, &t.to_csv())?;
        let json = dir.join(format!("{}.json", t.name));
        let body = serde_json::to_string_pretty(&t.to_json()).map_err(|e| Error::Io(e.to_string()))?;
        write_file(&json, &body)?;
        files.push(csv);
        files.push(json);
    }
    for p in &report.plots {
        let dat = dir.join(format!("{}.dat", p.name));
        write_file(&dat, &p.to_dat())?;
        files.push(dat);
    }
    let summary = dir.join(format!("{}.txt", report.command));
    write_file(&summary, &report.summary())?;
    files.push(summary);
    let manifest = RunManifest {
        command: report.command.clone(),
        config: config.clone(),
        version: VERSION.into(),
        constants: sobolev_constants(),
        stages: report.stages.clone(),
        results: report.results.clone(),
        checks: report.checks.clone(),
        files: files
            .iter()
            .filter_map(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()))
            .collect(),
    };
    let path = dir.join(format!("{}.manifest.json", report.command));
    let body = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    write_file(&path, &body)?;
    files.push(path);
    Ok(files)
}

pub fn cmd_constants(config: &RunConfig) -> Result<Report> {
    let mut rep = Report::new("constants");
    let k = sobolev_constants();
    let spec = config.spec(QuadratureSpec {
        rel_tol: 1e-15,
        abs_tol: 0.0,
        max_subdivisions: 10_000,
        grading: None,
    });
    let n = rep.stage("quadrature", || constants_by_quadrature(&spec))?;
    let mut t = Table::new("constants", &["name", "closed_form", "quadrature", "relative_deviation"]);
    for (name, a, b) in [
        ("c4", k.c4, n.c4),
        ("S4", k.s4, n.s4),
        ("Y4", k.y4, n.y4),
        ("Ys", k.ys, n.y4 / 2f64.sqrt()),
        ("A", k.a, n.a),
        ("B", k.b, n.b),
        ("B/S4", k.b / k.s4, n.b_over_s4),
    ] {
        t.push(vec![name.into(), a.into(), b.into(), (b / a - 1.0).abs().into()]);
        rep.result(name, b, n.error * b.abs());
    }
    rep.tables.push(t);
    rep.lines.push(format!("S4 = {:.10}", k.s4));
    rep.lines.push(format!("Y4 = 6*S4 = {:.10} (6*S4 - Y4 = {:e})", k.y4, 6.0 * k.s4 - k.y4));
    rep.lines.push(format!("Ys = Y4/sqrt(2) = {:.10}", k.ys));
    rep.lines.push(format!("A = 6*pi*sqrt(6) = {:.10}", k.a));
    rep.lines.push(format!("B = pi*sqrt(6) = {:.10}", k.b));
    rep.lines.push(format!("B/S4 = 0.75 exact (computed {:.17})", k.b / k.s4));
    rep.check(
        "constants",
        n.deviation < 1e-12,
        format!("largest relative deviation {:e}", n.deviation),
    );
    rep.check(
        "b_over_s4",
        (k.b / k.s4 - 0.75).abs() < 1e-15,
        format!("B/S4 - 3/4 = {:e}", k.b / k.s4 - 0.75),
    );
    Ok(rep)
}

pub fn cmd_interaction_sweep(config: &RunConfig) -> Result<Report> {
    let mut rep = Report::new("interaction-sweep");
    let spec = config.spec(interaction::default_spec());
    let k = sobolev_constants();
    let rows: Vec<(f64, std::result::Result<(interaction::CurvePoint, interaction::DerivativeRow), String>)> = rep
        .stage("curves", || {
            config
                .t_grid
                .par_iter()
                .map(|&t| {
                    let r = curve_point(1.0, t, &spec).and_then(|p| {
                        let m = verify_monotonicity(1.0, &[t], &spec)?;
                        Ok((p, m.rows[0]))
                    });
                    (t, r.map_err(|e| e.to_string()))
                })
                .collect()
        });
    let mut table = Table::new(
        "interaction_curves",
        &[
            "t", "a", "b", "c", "f", "a_prime", "c_prime", "a_err", "b_err", "c_err", "f_err", "a_prime_err",
            "c_prime_err", "bracket", "monotone", "status",
        ],
    );
    let mut bracket_ok = true;
    let mut mono_ok = true;
    let mut plot = PlotSeries {
        name: "interaction_f".into(),
        points: Vec::new(),
    };
    for (t, r) in &rows {
        match r {
            Ok((p, d)) => {
                let margin = 3.0 * p.f_err;
                let bracket = p.f > k.y4 + margin && p.f < 2f64.sqrt() * k.y4 - margin;
                let mono = d.negative && d.consistent;
                bracket_ok &= bracket;
                mono_ok &= mono;
                table.push(vec![
                    (*t).into(),
                    p.a.into(),
                    p.b.into(),
                    p.c.into(),
                    p.f.into(),
                    d.a_prime_quad.into(),
                    d.c_prime_quad.into(),
                    p.a_err.into(),
                    p.b_err.into(),
                    p.c_err.into(),
                    p.f_err.into(),
                    d.a_prime_tol.into(),
                    d.c_prime_tol.into(),
                    bracket.into(),
                    mono.into(),
                    "ok".into(),
                ]);
                plot.points.push((*t, p.f, p.f_err));
            }
            Err(e) => {
                bracket_ok = false;
                mono_ok = false;
                let mut row: Vec<Cell> = vec![(*t).into()];
                row.extend((0..12).map(|_| Cell::Num(f64::NAN)));
                row.extend([false.into(), false.into(), e.clone().into()]);
                table.push(row);
            }
        }
    }
    rep.tables.push(table);
    rep.plots.push(plot);
    let mut fits = Table::new("interaction_fits", &["target", "coefficient", "predicted", "relative_error", "residual"]);
    let targets = [
        (SlopeTarget::FCurve, 0.05),
        (SlopeTarget::Integral(InteractionKind::Grad), 0.02),
        (SlopeTarget::Integral(InteractionKind::U3V), 0.02),
    ];
    let fitted = rep.stage("slopes", || {
        targets
            .par_iter()
            .map(|(tg, _)| asymptotic_slope(*tg, 1.0, &config.slope_t, &spec))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut slopes_ok = true;
    for (f, (_, tol)) in fitted.iter().zip(&targets) {
        fits.push(vec![
            f.target.name().into(),
            f.coeff.into(),
            f.predicted.into(),
            f.relative_error().into(),
            f.residual.into(),
        ]);
        rep.result(&format!("slope_{}", f.target.name()), f.coeff, f.residual);
        slopes_ok &= f.relative_error() < *tol;
        rep.lines.push(format!(
            "slope {}: fitted {:.6} target {:.6} ({:.3}% off)",
            f.target.name(),
            f.coeff,
            f.predicted,
            100.0 * f.relative_error()
        ));
    }
    rep.tables.push(fits);
    rep.check("bracket", bracket_ok, "6S4 + 3err < f < 6*sqrt(2)*S4 - 3err on every row".into());
    rep.check("monotonicity", mono_ok, "a' < 0 and c' < 0 by both estimators on every row".into());
    rep.check("slopes", slopes_ok, "f within 5%, GRAD and U3V within 2% of target".into());
    Ok(rep)
}

pub fn cmd_green_sweep(config: &RunConfig) -> Result<Report> {
    let mut rep = Report::new("green-sweep");
    let grid = &config.green_t_grid;
    let runs = [
        ("flat", ChartMetricField::Flat, config.green_delta_flat),
        ("round", ChartMetricField::RoundNormal, config.green_delta_round),
    ];
    let rows = rep.stage("sweeps", || {
        runs.par_iter()
            .map(|(name, field, delta)| {
                mass_divergence_sweep(field, grid, *delta, BoundaryDatum::Zero, config.lmax).map(|r| (*name, *delta, r))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut t = Table::new(
        "green_sweep",
        &["model", "t", "delta", "a_q", "a_q_error", "product", "symmetry_defect"],
    );
    let mut product_ok = true;
    for (name, delta, rs) in &rows {
        for r in rs {
            t.push(vec![
                (*name).into(),
                r.t.into(),
                r.delta.into(),
                r.a_q.into(),
                r.a_q_error.into(),
                r.product.into(),
                r.symmetry_defect.into(),
            ]);
        }
        let last = rs.iter().min_by(|a, b| a.t.total_cmp(&b.t)).expect("nonempty grid");
        let ok = last.t <= 0.05 * delta && (last.product - 1.0).abs() <= 0.05;
        product_ok &= ok;
        rep.lines.push(format!(
            "{name}: A_q*4t^2 = {:.6} at t = {} (delta = {delta})",
            last.product, last.t
        ));
        rep.result(&format!("product_{name}"), last.product, last.a_q_error * 4.0 * last.t * last.t);
    }
    rep.tables.push(t);
    let delta = config.green_delta_flat;
    let mass = rep.stage("calibration", || {
        let g = solve_dirichlet_green(&GreenProblem::new(ChartMetricField::Flat, [0.0; 4], delta))?;
        extract_mass(
            &g,
            &MassOptions {
                eps0: Some(0.05 * delta),
                ..Default::default()
            },
        )
    })?;
    let exact = -1.0 / (delta * delta);
    let mut cal = Table::new("green_calibration", &["delta", "mass", "mass_error", "exact"]);
    cal.push(vec![delta.into(), mass.a_q.into(), mass.a_q_error.into(), exact.into()]);
    rep.tables.push(cal);
    rep.result("flat_ball_mass", mass.a_q, mass.a_q_error);
    let ts = [0.02, 0.05, 0.1, 0.2];
    let fields = [
        ("round", ChartMetricField::RoundNormal),
        ("test", ChartMetricField::Polynomial(Box::new(PolynomialMetric::test_metric()))),
    ];
    let scalings = rep.stage("parametrix", || {
        fields
            .par_iter()
            .map(|(n, f)| parametrix_scaling(f, &[1.0, 0.0, 0.0, 0.0], &ts, 20).map(|s| (*n, s)))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut par = Table::new("parametrix", &["model", "exponent", "constant"]);
    let mut exp_ok = true;
    for (n, s) in &scalings {
        par.push(vec![(*n).into(), s.exponent.into(), s.constant.into()]);
        exp_ok &= (-2.3..=-1.7).contains(&s.exponent);
        rep.lines.push(format!("parametrix {n}: exponent {:.4}", s.exponent));
    }
    rep.tables.push(par);
    rep.check("product", product_ok, "A_q*4t^2 within 5% of 1 at the smallest t <= 0.05 delta".into());
    rep.check(
        "flat_calibration",
        (mass.a_q - exact).abs() < 1e-6 * exact.abs(),
        format!("mass {} vs {exact}", mass.a_q),
    );
    rep.check("parametrix", exp_ok, "fitted exponent in [-2.3, -1.7]".into());
    Ok(rep)
}

/// Basepoints in the round normal chart: one fixed point and `n` uniform
/// samples of the ball of radius 0.3.
pub fn cnc_basepoints(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![[0.1, -0.05, 0.07, 0.02]];
    while out.len() < n + 1 {
        let p: Point = [0; 4].map(|_| rng.random_range(-0.3..0.3));
        let r = crate::constants::norm(&p);
        if r > 0.05 && r < 0.3 {
            out.push(p);
        }
    }
    out
}

pub fn cmd_cnc_verify(config: &RunConfig) -> Result<Report> {
    let mut rep = Report::new("cnc-verify");
    let h = config.h_fd;
    let pts = cnc_basepoints(config.cnc_points, config.seed);
    let field = ChartMetricField::RoundNormal;
    let res = rep.stage("residuals", || {
        pts.par_iter()
            .map(|p| {
                [4.0 * h, 2.0 * h, h]
                    .iter()
                    .map(|&s| verify_cnc_along(&field, p, None, s))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut t = Table::new(
        "cnc_residuals",
        &[
            "point", "x0", "x1", "x2", "x3", "h", "scalar", "grad_scalar", "sym_grad_ricci", "ricci", "quadratic_defect",
            "cubic_max",
        ],
    );
    let mut small = true;
    let mut decay = true;
    let mut factor_ok = true;
    for (i, (p, rs)) in pts.iter().zip(&res).enumerate() {
        for r in rs {
            let qd = (0..4)
                .flat_map(|a| (0..4).map(move |b| (a, b)))
                .map(|(a, b)| (r.factor.quadratic[a][b] - if a == b { 0.5 } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            let cm = r.factor.cubic.iter().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            t.push(vec![
                i.into(),
                p[0].into(),
                p[1].into(),
                p[2].into(),
                p[3].into(),
                r.h.into(),
                r.r.into(),
                r.dr.into(),
                r.sym_dric.into(),
                r.ric.into(),
                qd.into(),
                cm.into(),
            ]);
        }
        let fine = &rs[2];
        small &= fine.max() < 1e-3 && fine.ric < 1e-3;
        factor_ok &= (0..4).all(|a| (0..4).all(|b| {
            (fine.factor.quadratic[a][b] - if a == b { 0.5 } else { 0.0 }).abs() < 1e-3
        }));
        let m: Vec<f64> = rs.iter().map(|r| r.max().max(r.ric)).collect();
        decay &= m.windows(2).all(|w| (w[0] / w[1] - 4.0).abs() < 0.5);
    }
    rep.tables.push(t);
    rep.check("residuals", small, format!("|R|, |Ric|, |dR|, |sym dRic| below 1e-3 at h = {h}"));
    rep.check("second_order", decay, "residuals fall 4x per halving of h".into());
    rep.check("round_factor", factor_ok, "conformal factor equals |z|^2/2".into());
    Ok(rep)
}

/// Quadratic link function used by `gauge-verify`.
pub fn gauge_link_function() -> LinkFunction {
    LinkFunction::Quadratic([
        [0.2, 0.05, 0.0, 0.0],
        [0.05, -0.1, 0.0, 0.0],
        [0.0, 0.0, 0.1, 0.03],
        [0.0, 0.0, 0.03, 0.0],
    ])
}

pub fn cmd_gauge_verify(config: &RunConfig) -> Result<Report> {
    let mut rep = Report::new("gauge-verify");
    let f = gauge_link_function();
    let hs = [1e-2, 5e-3, 2.5e-3];
    let raw = rep.stage("identity", || {
        hs.par_iter()
            .map(|&h| verify_first_order_identity(&f, &LinkFamily::OnePlusSquare, h))
            .collect::<Result<Vec<_>>>()
    })?;
    let gauged = rep.stage("gauge", || verify_first_order_identity(&f, &LinkFamily::Gauge(f.clone()), 1e-2))?;
    let mut t = Table::new("gauge_identity", &["family", "h", "residual", "derivative_norm"]);
    for r in &raw {
        t.push(vec!["one_plus_square".into(), r.h.into(), r.residual.into(), r.derivative_norm.into()]);
    }
    t.push(vec![
        "gauge".into(),
        gauged.h.into(),
        gauged.residual.into(),
        gauged.derivative_norm.into(),
    ]);
    rep.tables.push(t);
    let ratios: Vec<f64> = raw.windows(2).map(|w| w[0].residual / w[1].residual).collect();
    rep.lines.push(format!("residual ratios under halving: {ratios:?}"));
    let _ = config;
    rep.check(
        "second_order",
        ratios.iter().all(|r| (r - 4.0).abs() < 0.5),
        format!("ratios {ratios:?}"),
    );
    rep.check(
        "post_gauge",
        gauged.derivative_norm < 1e-3,
        format!("|h'(0)| after gauge = {:e}", gauged.derivative_norm),
    );
    Ok(rep)
}

pub fn cmd_path_profile(config: &RunConfig) -> Result<Report> {
    let mut rep = Report::new("path-profile");
    let e = config.exponents()?;
    let spec = config.spec(path::path_spec());
    let k = sobolev_constants();
    let mut eps = config.epsilons[0];
    if config.calibrate {
        let cal = rep.stage("calibration", || calibrate_epsilon(&e, config.delta, 1e-2, 0.5, 40, 3.0, 0.02, &spec))?;
        let mut t = Table::new(
            "calibration",
            &["epsilon", "a_estimate", "midpoint_q", "midpoint_error", "midpoint_ratio"],
        );
        for s in &cal.steps {
            t.push(vec![
                s.epsilon.into(),
                s.a_estimate.into(),
                s.midpoint.q.into(),
                s.midpoint.error.into(),
                s.midpoint_ratio.into(),
            ]);
        }
        rep.tables.push(t);
        eps = cal
            .epsilon
            .ok_or_else(|| Error::Config("calibration did not settle within 40 halvings".into()))?;
        rep.lines.push(format!("calibrated epsilon = {eps:e}"));
    }
    let options = PathOptions {
        grid: config.path_grid,
        spec,
        continuity: false,
    };
    let p = rep.stage("path", || build_path(eps, &e, config.delta, &options))?;
    let mut t = Table::new(
        "path_profile",
        &["mu", "leg", "variant", "pole", "t", "tau", "lambda", "q", "q_error", "margin"],
    );
    let mut plots: Vec<PlotSeries> = (1..=5)
        .map(|l| PlotSeries {
            name: format!("path_leg{l}"),
            points: Vec::new(),
        })
        .collect();
    for s in &p.samples {
        let d = &s.descriptor;
        t.push(vec![
            s.mu.into(),
            s.leg.into(),
            d.variant.name().into(),
            format!("{:?}", d.pole).into(),
            d.t.into(),
            d.tau.unwrap_or(f64::NAN).into(),
            d.lambda.unwrap_or(f64::NAN).into(),
            s.value.q.into(),
            s.value.error.into(),
            (k.y4 - s.value.q).into(),
        ]);
        plots[s.leg - 1].points.push((s.mu, s.value.q, s.value.error));
    }
    rep.tables.push(t);
    rep.plots.extend(plots);
    let mut tr = Table::new("path_transitions", &["mu", "relative_l4_distance"]);
    for (mu, d) in &p.transitions {
        tr.push(vec![(*mu).into(), (*d).into()]);
    }
    rep.tables.push(tr);
    let legs = [FitLeg::Double, FitLeg::Interp(config.interp_lambda), FitLeg::Glued];
    let fits = rep.stage("fits", || {
        legs.par_iter()
            .map(|l| fit_expansion_a(*l, &e, config.delta, &config.fit_epsilons, &spec))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut ft = Table::new(
        "expansion_fits",
        &["leg", "a_hat", "a", "residual", "exponent", "exponent_target", "prefactor"],
    );
    let mut fit_ok = true;
    for f in &fits {
        ft.push(vec![
            f.leg.name().into(),
            f.a_hat.into(),
            k.a.into(),
            f.residual.into(),
            f.exponent.into(),
            f.exponent_target.into(),
            f.prefactor.into(),
        ]);
        rep.result(&format!("a_hat_{}", f.leg.name()), f.a_hat, f.residual * f.a_hat);
        rep.lines.push(format!(
            "fitted A on {}: {:.4} (A = {:.4}), exponent {:.4} (target {:.4})",
            f.leg.name(),
            f.a_hat,
            k.a,
            f.exponent,
            f.exponent_target
        ));
        if !matches!(f.leg, FitLeg::Glued) {
            fit_ok &= (f.a_hat / k.a - 1.0).abs() < 0.1 && (f.exponent / f.exponent_target - 1.0).abs() < 0.1;
        }
    }
    rep.tables.push(ft);
    rep.result("max_q", p.max_q, p.max_error);
    rep.result("endpoint_0", p.endpoints.0.q, p.endpoints.0.error);
    rep.result("endpoint_5", p.endpoints.1.q, p.endpoints.1.error);
    rep.lines.push(format!(
        "max Q = {:.12} at mu = {} < 6S4 = {:.12}, margin {:e} ({:.1} error bars)",
        p.max_q,
        p.argmax_mu,
        k.y4,
        p.margin,
        p.worst_margin_ratio()
    ));
    rep.lines.push(format!(
        "endpoints {:.6} and {:.6}, Y4/sqrt(2) = {:.6}",
        p.endpoints.0.q, p.endpoints.1.q, k.ys
    ));
    rep.check(
        "subcritical",
        p.subcritical(3.0),
        format!("smallest margin/error ratio {:.1}", p.worst_margin_ratio()),
    );
    rep.check(
        "endpoints",
        (p.endpoints.0.q - k.ys).abs() < 0.5 && (p.endpoints.1.q - k.ys).abs() < 0.5,
        format!("{} and {}", p.endpoints.0.q, p.endpoints.1.q),
    );
    rep.check("expansion", fit_ok, "A-hat within 10% and exponent within 10% on DOUBLE and INTERP".into());
    Ok(rep)
}

pub fn cmd_accept(config: &RunConfig) -> Result<Report> {
    let mut rep = Report::new("accept");
    let options = crate::accept::AcceptOptions {
        tol_scale: config.tol_scale,
    };
    let mut t = Table::new("acceptance", &["criterion", "name", "status", "seconds", "detail"]);
    for i in 1..=12 {
        let o = crate::accept::run_criterion(i, &options);
        rep.lines.push(o.line());
        rep.stages.push(Stage {
            name: format!("criterion_{i}"),
            seconds: o.seconds,
        });
        t.push(vec![i.into(), o.name.clone().into(), o.passed.into(), o.seconds.into(), o.detail.clone().into()]);
        rep.check(&format!("criterion_{i}"), o.passed, o.detail);
    }
    rep.tables.push(t);
    Ok(rep)
}
