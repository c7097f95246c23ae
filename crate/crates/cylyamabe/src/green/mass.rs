//! The constant term `A_q` of `G - |z̄|⁻²` at the pole, in conformal normal
//! coordinates, by Richardson extrapolation of spherical means.

use super::{
    pole_frame, solve_dirichlet_green, assemble_equivariant, BoundaryDatum, GreenEvaluator, GreenProblem,
    RadialModel,
};
use crate::cone::{cnc_polynomial, curvature_at_analytic, ChartMetricField};
use crate::constants::{norm, Point};
use crate::error::{invalid, Error, Result};
use crate::cone::link::sample_points;
use crate::quadrature::{integrate_sphere3, QuadratureSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassOptions {
    /// Largest averaging radius; `None` picks `t/16`.
    pub eps0: Option<f64>,
    pub levels: usize,
    pub quadrature: QuadratureSpec,
}

impl Default for MassOptions {
    fn default() -> Self {
        MassOptions {
            eps0: None,
            levels: 4,
            quadrature: QuadratureSpec::with_tol(1e-13, 1e-13),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenExpansion {
    /// Distance from the pole to the tip.
    pub t: f64,
    pub a_q: f64,
    pub a_q_error: f64,
    /// Averaging radii and spherical means of `Ḡ - |z̄|⁻²`.
    pub radii: Vec<f64>,
    pub means: Vec<f64>,
    /// `(z̄, β_q(z̄))` with `β_q = Ḡ - |z̄|⁻² - A_q`.
    pub beta_samples: Vec<(Point, f64)>,
    /// Matching constant, filled in once a gluing scale is chosen.
    pub nu: Option<f64>,
}

/// Conformal normal coordinates about the pole of a radial model: the
/// factor `f̄ = c|z|²` and the radius map `r̄(r) = ∫₀^r e^{cs²/2} ds`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CncRadial {
    pub c: f64,
}

impl CncRadial {
    pub fn of_model(model: RadialModel, t: f64) -> Result<Self> {
        let field = model.field();
        let snap = curvature_at_analytic(&field, &[0.0; 4])?;
        let f = cnc_polynomial(&snap, t.max(1e-300))?;
        let c = f.quadratic[0][0];
        let aniso = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| (f.quadratic[i][j] - if i == j { c } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        let cubic = f.cubic.iter().flatten().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        if aniso > 1e-12 || cubic > 1e-12 {
            return Err(Error::Residual("conformal factor of a radial model is not isotropic".into()));
        }
        Ok(CncRadial { c })
    }

    pub fn rbar(&self, r: f64) -> f64 {
        r * (1.0 + self.stretch_excess(r))
    }

    /// `r̄/r - 1 = Σ_{k≥1} (c/2)^k r^{2k} / (k!(2k+1))`.
    pub fn stretch_excess(&self, r: f64) -> f64 {
        let x = 0.5 * self.c * r * r;
        let mut term = 1.0;
        let mut acc = 0.0;
        for k in 1..60 {
            term *= x / k as f64;
            let add = term / (2 * k + 1) as f64;
            acc += add;
            if add.abs() <= 1e-17 * acc.abs() {
                break;
            }
        }
        acc
    }

    /// Inverse of [`CncRadial::rbar`].
    pub fn r_of(&self, rbar: f64) -> f64 {
        let mut r = rbar;
        for _ in 0..50 {
            let f = self.rbar(r) - rbar;
            let d = (0.5 * self.c * r * r).exp();
            let step = f / d;
            r -= step;
            if step.abs() <= 1e-17 * rbar.abs() {
                break;
            }
        }
        r
    }
}

/// Richardson tableau for `m(ε_k)` with `ε_k = ε₀2^{-k}` and an error
/// expansion in integer powers of `ε`. Returns the extrapolated value and
/// the difference of the last two diagonal entries.
pub fn richardson(means: &[f64]) -> (f64, f64) {
    let n = means.len();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut row = vec![means[k]];
        for j in 1..=k {
            let f = 2f64.powi(j as i32);
            let v = row[j - 1] + (row[j - 1] - rows[k - 1][j - 1]) / (f - 1.0);
            row.push(v);
        }
        rows.push(row);
    }
    let last = &rows[n - 1];
    let value = last[n - 1];
    let err = if n > 1 { (last[n - 1] - last[n - 2]).abs() } else { f64::INFINITY };
    (value, err)
}

/// `Ḡ(z̄) - |z̄|⁻²` at a conformal-normal-coordinate point near the pole.
fn reduced<G: GreenEvaluator + ?Sized>(g: &G, cnc: &CncRadial, frame: &[Point; 4], zbar: &Point) -> f64 {
    let rb = norm(zbar);
    let r = cnc.r_of(rb);
    let z = zbar.map(|v| v * r / rb);
    let y = g.model().exp_at(&g.pole(), frame, &z);
    let damp_m1 = (-0.5 * cnc.c * r * r).exp_m1();
    let s = cnc.stretch_excess(r);
    // e^{-cr²/2} r⁻² - r̄⁻² without cancelling the leading terms
    let u2 = (1.0 + s) * (1.0 + s);
    let lead = (damp_m1 * u2 + s * (2.0 + s)) / (r * r * u2);
    lead + (1.0 + damp_m1) * g.regular(&y)
}

/// Extracts `A_q` from any Green evaluator whose parametrix cutoff equals
/// one on `|z| ≤ eps0`.
pub fn extract_mass<G: GreenEvaluator + ?Sized>(g: &G, options: &MassOptions) -> Result<GreenExpansion> {
    let pole = g.pole();
    let t = norm(&pole);
    let eps0 = match options.eps0 {
        Some(e) => e,
        None if t > 0.0 => t / 16.0,
        None => return Err(invalid("a centered pole needs an explicit eps0")),
    };
    if options.levels < 2 || !(eps0 > 0.0) {
        return Err(invalid("need at least two averaging radii"));
    }
    let cnc = CncRadial::of_model(g.model(), if t > 0.0 { t } else { f64::INFINITY })?;
    let frame = pole_frame(&pole);
    let origin = [0.0; 4];
    let mut radii = Vec::new();
    let mut means = Vec::new();
    let mut quad_err: f64 = 0.0;
    for k in 0..options.levels {
        let eps = eps0 * 0.5f64.powi(k as i32);
        let area = 2.0 * PI * PI * eps.powi(3);
        let spec = QuadratureSpec {
            abs_tol: options.quadrature.abs_tol * area,
            ..options.quadrature
        };
        let res = integrate_sphere3(|z| reduced(g, &cnc, &frame, z), eps, &origin, &spec);
        radii.push(eps);
        means.push(res.value / area);
        quad_err = quad_err.max(res.error_estimate / area);
    }
    let (a_q, extrap) = richardson(&means);
    // the tableau amplifies mean errors by at most the sum of its weights
    let a_q_error = extrap + 10.0 * quad_err + g.discretization_error();
    let mut beta_samples = Vec::new();
    for (k, d) in sample_points(8, 0xbe7a).iter().enumerate() {
        let rb = radii[k % radii.len()];
        let zbar = d.map(|v| v * rb);
        beta_samples.push((zbar, reduced(g, &cnc, &frame, &zbar) - a_q));
    }
    Ok(GreenExpansion {
        t,
        a_q,
        a_q_error,
        radii,
        means,
        beta_samples,
        nu: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassRow {
    pub t: f64,
    pub delta: f64,
    pub a_q: f64,
    pub a_q_error: f64,
    /// `A_q·4t²`.
    pub product: f64,
    pub symmetry_defect: f64,
}

/// Full pipeline per `t`: solve `G̃_{±x}`, assemble with `datum`, extract
/// the mass in conformal normal coordinates.
pub fn mass_divergence_sweep(
    field: &ChartMetricField,
    t_grid: &[f64],
    delta: f64,
    datum: BoundaryDatum,
    lmax: usize,
) -> Result<Vec<MassRow>> {
    if t_grid.iter().any(|t| !(*t > 0.0 && *t < delta / 4.0)) {
        return Err(invalid("sweep points must lie in (0, δ/4)"));
    }
    t_grid
        .par_iter()
        .map(|&t| {
            let problem = GreenProblem::new(field.clone(), [t, 0.0, 0.0, 0.0], delta).with_resolution(lmax, 16);
            let plus = solve_dirichlet_green(&problem)?;
            let minus = plus.mirrored();
            let g = assemble_equivariant(plus, minus, datum)?;
            let exp = extract_mass(&g, &MassOptions::default())?;
            Ok(MassRow {
                t,
                delta,
                a_q: exp.a_q,
                a_q_error: exp.a_q_error,
                product: 4.0 * t * t * exp.a_q,
                symmetry_defect: g.symmetry_defect(16, 0x5ee),
            })
        })
        .collect()
}
