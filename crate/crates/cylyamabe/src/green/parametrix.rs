//! `L_ḡ(r⁻²)` in (conformal) normal coordinates about a pole.

use crate::cone::curvature::{inverse, CurvatureSnapshot, MetricJet};
use crate::cone::link::sample_points;
use crate::cone::normal::{normal_coordinates, normal_form};
use crate::cone::{cnc_polynomial, curvature_at_analytic, ChartMetricField};
use crate::constants::{norm, Point};
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParametrixReport {
    /// Distance from the pole to the tip, which sets the cutoff scale.
    pub t: f64,
    pub with_cnc: bool,
    /// `(d, largest |L_ḡ(d⁻²)| over the sampled directions)`.
    pub samples: Vec<(f64, f64)>,
    pub sup: f64,
}

/// `-6Δ_ḡ(r⁻²) + R_ḡ r⁻²` at `z`, with `r = |z|` the coordinate radius.
pub fn inverse_square_residual(field: &ChartMetricField, z: &Point) -> Result<f64> {
    let jet = MetricJet::analytic(field, z)?;
    let snap = CurvatureSnapshot::from_jet(*z, &jet);
    let ginv = inverse(&jet.g);
    let r2: f64 = z.iter().map(|v| v * v).sum();
    let grad: Point = z.map(|v| -2.0 * v / (r2 * r2));
    let mut lap = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let e = if i == j { 1.0 } else { 0.0 };
            let mut h = -2.0 * e / (r2 * r2) + 8.0 * z[i] * z[j] / (r2 * r2 * r2);
            for k in 0..4 {
                h -= snap.christoffel[k][i][j] * grad[k];
            }
            lap += ginv[i][j] * h;
        }
    }
    Ok(-6.0 * lap + snap.r / r2)
}

/// Samples `L_ḡ(d⁻²)` on `d < t/2`, `d` the ḡ-distance from `pole`, where
/// `ḡ = e^{f̄}g` with the CNC factor when `with_cnc` and `ḡ = g` otherwise.
/// The samples sit in normal coordinates of `ḡ`, so `L_ḡ(d⁻²)` reduces to
/// `12(Δ(d²/2) - 4)d⁻⁴ + R_ḡ d⁻²`.
pub fn parametrix_residual(
    field: &ChartMetricField,
    pole: &Point,
    t: f64,
    radii: &[f64],
    with_cnc: bool,
) -> Result<ParametrixReport> {
    if !(t > 0.0) || radii.iter().any(|r| !(*r > 0.0 && *r < 0.5 * t)) {
        return Err(invalid("sample radii must lie in (0, t/2)"));
    }
    let nf = normal_form(field, pole, None)?;
    let gbar = if with_cnc {
        let snap = curvature_at_analytic(&nf, &[0.0; 4])?;
        let f = cnc_polynomial(&snap, t)?;
        ChartMetricField::Conformal(Box::new(nf), Box::new(f))
    } else {
        nf
    };
    let chart = normal_coordinates(&gbar, &[0.0; 4], 0.5 * t, Some([1.0, 0.0, 0.0, 0.0]))?;
    let dirs = sample_points(8, 0x9a7a);
    let mut samples = Vec::with_capacity(radii.len());
    let mut sup: f64 = 0.0;
    for &r in radii {
        let mut m: f64 = 0.0;
        for d in &dirs {
            let y = d.map(|v| v * r);
            let (x, tr) = chart.half_square_laplacian(&y)?;
            let scal = curvature_at_analytic(&gbar, &x)?.r;
            let v = 12.0 * (tr - 4.0) / r.powi(4) + scal / (r * r);
            m = m.max(v.abs());
        }
        sup = sup.max(m);
        samples.push((r, m));
    }
    Ok(ParametrixReport {
        t,
        with_cnc,
        samples,
        sup,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParametrixScaling {
    pub reports: Vec<ParametrixReport>,
    /// Slope of `log sup` against `log t`.
    pub exponent: f64,
    /// `C` in `sup ≤ C t⁻²`, the largest `sup·t²`.
    pub constant: f64,
}

/// [`parametrix_residual`] with CNC over poles `t·direction`, each sampled on
/// `n_radii` uniformly spaced radii in `(0, t/2)`, and the fitted power law.
pub fn parametrix_scaling(
    field: &ChartMetricField,
    direction: &Point,
    t_values: &[f64],
    n_radii: usize,
) -> Result<ParametrixScaling> {
    if t_values.len() < 2 || n_radii == 0 {
        return Err(invalid("need two pole distances and at least one radius"));
    }
    let d = norm(direction);
    let mut reports = Vec::new();
    for &t in t_values {
        let pole = direction.map(|v| v * t / d);
        let radii: Vec<f64> = (1..=n_radii).map(|k| 0.5 * t * k as f64 / (n_radii + 1) as f64).collect();
        reports.push(parametrix_residual(field, &pole, t, &radii, true)?);
    }
    let pts: Vec<(f64, f64)> = reports.iter().map(|r| (r.t.ln(), r.sup.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let constant = reports.iter().map(|r| r.sup * r.t * r.t).fold(0.0, f64::max);
    Ok(ParametrixScaling {
        reports,
        exponent: sxy / sxx,
        constant,
    })
}
