//! Green's functions of `L = -6Δ + R` on balls about a cone tip, normalized
//! by `L G = 24π² δ_x`.
//!
//! `G = ζ + φ` with `ζ = χ(ρ)ρ⁻²` a compactly supported parametrix about the
//! pole and `φ` the solution of `Lφ = -Lζ`, expanded in zonal harmonics about
//! the pole axis. Each harmonic degree is a radial two-point problem.

pub mod mass;
pub mod parametrix;
pub mod radial;

use crate::cone::{ChartMetricField, LinkFamily};
use crate::cone::link::sample_points;
use crate::constants::{norm, Point};
use crate::error::{invalid, Error, Result};
use crate::quadrature::gauss_legendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub use mass::{CncRadial, extract_mass, mass_divergence_sweep, GreenExpansion, MassOptions, MassRow};
pub use parametrix::{parametrix_residual, parametrix_scaling, ParametrixReport, ParametrixScaling};
pub use radial::{solve_mode, SpectralMesh};

/// Normalization constant `4aπ²` with `a = 6`.
pub const NORMALIZATION: f64 = 24.0 * PI * PI;

/// Radially symmetric metric `dr² + w(r)² g_{𝕊³}` about the chart origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadialModel {
    /// `w = r`.
    Flat,
    /// `w = sin r`, the round 𝕊⁴ in normal coordinates.
    Round,
}

// |cot x - 1/x| = Σ a_n x^{2n-1}
const COT_SERIES: [f64; 10] = [
    1.0 / 3.0,
    1.0 / 45.0,
    2.0 / 945.0,
    1.0 / 4725.0,
    2.0 / 93555.0,
    1382.0 / 638512875.0,
    4.0 / 18243225.0,
    3617.0 / 162820783125.0,
    87734.0 / 38979295480125.0,
    349222.0 / 1531329465290625.0,
];

/// `cot x - 1/x`, accurate near zero.
fn cot_defect(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let x2 = x * x;
        -x * COT_SERIES.iter().rev().fold(0.0, |acc, a| acc * x2 + a)
    } else {
        1.0 / x.tan() - 1.0 / x
    }
}

impl RadialModel {
    /// Identifies the model and certifies, on sampled points, that `field`
    /// really is that warped product.
    pub fn from_field(field: &ChartMetricField) -> Result<Self> {
        let model = match field {
            ChartMetricField::Flat | ChartMetricField::Cone(LinkFamily::Round) => RadialModel::Flat,
            ChartMetricField::RoundNormal | ChartMetricField::Cone(LinkFamily::Football) => RadialModel::Round,
            _ => return Err(invalid("the mode solver needs a radially symmetric field (flat or round)")),
        };
        let defect = model.certificate(field);
        if !(defect < 1e-12) {
            return Err(Error::Residual(format!("field is not radially symmetric: defect {defect:e}")));
        }
        Ok(model)
    }

    /// Largest deviation between `field` and the model metric on samples.
    pub fn certificate(&self, field: &ChartMetricField) -> f64 {
        let mut worst: f64 = 0.0;
        for r in [0.05, 0.2, 0.45] {
            for d in sample_points(6, 0x9a1) {
                let y = d.map(|v| v * r);
                let g = field.eval(&y);
                let (w, _, _) = self.warp(r);
                let q = (w / r).powi(2);
                for i in 0..4 {
                    for j in 0..4 {
                        let p = d[i] * d[j];
                        let e = if i == j { 1.0 } else { 0.0 };
                        let model = p + q * (e - p);
                        worst = worst.max((g[i][j] - model).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn field(&self) -> ChartMetricField {
        match self {
            RadialModel::Flat => ChartMetricField::Flat,
            RadialModel::Round => ChartMetricField::RoundNormal,
        }
    }

    /// `(w, w', w'')`.
    pub fn warp(&self, r: f64) -> (f64, f64, f64) {
        match self {
            RadialModel::Flat => (r, 1.0, 0.0),
            RadialModel::Round => (r.sin(), r.cos(), -r.sin()),
        }
    }

    pub fn scalar_curvature(&self) -> f64 {
        match self {
            RadialModel::Flat => 0.0,
            RadialModel::Round => 12.0,
        }
    }

    /// `(3w'/w, 1/w², R)`.
    pub fn coefficients(&self, r: f64) -> (f64, f64, f64) {
        let (w, dw, _) = self.warp(r);
        (3.0 * dw / w, 1.0 / (w * w), self.scalar_curvature())
    }

    /// `m(ρ) = 3(w'/w - 1/ρ)`, the excess of the mean curvature of geodesic
    /// spheres over the Euclidean value.
    pub fn mean_curvature_excess(&self, rho: f64) -> f64 {
        match self {
            RadialModel::Flat => 0.0,
            RadialModel::Round => 3.0 * cot_defect(rho),
        }
    }

    /// `L(ρ⁻²) = 12 m ρ⁻³ + R ρ⁻²` away from the pole.
    pub fn inverse_square_residual(&self, rho: f64) -> f64 {
        match self {
            RadialModel::Flat => 0.0,
            RadialModel::Round => {
                if rho < 0.5 {
                    let x2 = rho * rho;
                    -36.0 * COT_SERIES[1..].iter().rev().fold(0.0, |acc, a| acc * x2 + a)
                } else {
                    36.0 * cot_defect(rho) / rho.powi(3) + 12.0 / (rho * rho)
                }
            }
        }
    }

    /// Point of 𝕊⁴ ⊂ ℝ⁵ for round chart points (flat points padded with 0).
    fn embed(&self, y: &Point) -> [f64; 5] {
        match self {
            RadialModel::Flat => [0.0, y[0], y[1], y[2], y[3]],
            RadialModel::Round => {
                let r = norm(y);
                let c = if r == 0.0 { 1.0 } else { r.sin() / r };
                [r.cos(), c * y[0], c * y[1], c * y[2], c * y[3]]
            }
        }
    }

    /// Geodesic distance between chart points.
    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        match self {
            RadialModel::Flat => crate::constants::dist2(a, b).sqrt(),
            RadialModel::Round => {
                let (p, q) = (self.embed(a), self.embed(b));
                let chord: f64 = p.iter().zip(&q).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
                2.0 * (0.5 * chord).min(1.0).asin()
            }
        }
    }

    /// Green's function of `L` on the whole model space: `|x-y|⁻²` on ℝ⁴,
    /// `1/(4 sin²(d/2))` on 𝕊⁴.
    pub fn global_green(&self, x: &Point, y: &Point) -> f64 {
        match self {
            RadialModel::Flat => 1.0 / crate::constants::dist2(x, y),
            RadialModel::Round => {
                let s = (0.5 * self.distance(x, y)).sin();
                0.25 / (s * s)
            }
        }
    }

    /// Chart point reached from `pole` along the geodesic with initial
    /// vector `Σ z_i e_i` for the orthonormal frame `frame` at the pole.
    pub fn exp_at(&self, pole: &Point, frame: &[Point; 4], z: &Point) -> Point {
        let mut v = [0.0; 4];
        for (k, e) in frame.iter().enumerate() {
            for i in 0..4 {
                v[i] += z[k] * e[i];
            }
        }
        match self {
            RadialModel::Flat => [0, 1, 2, 3].map(|i| pole[i] + v[i]),
            RadialModel::Round => {
                // the frame at the pole is expressed in tip-chart coordinates;
                // lift it to ℝ⁵ before moving along the great circle
                let t = norm(pole);
                let p = self.embed(pole);
                let u = if t > 0.0 { pole.map(|c| c / t) } else { [1.0, 0.0, 0.0, 0.0] };
                let vr: f64 = (0..4).map(|i| v[i] * u[i]).sum();
                let mut tangent = [0.0; 5];
                tangent[0] = -t.sin() * vr;
                for i in 0..4 {
                    tangent[i + 1] = t.cos() * vr * u[i] + (v[i] - vr * u[i]);
                }
                let s = norm(z);
                let (ss, cs) = s.sin_cos();
                let k = if s == 0.0 { 1.0 } else { ss / s };
                let q: [f64; 5] = [0, 1, 2, 3, 4].map(|i| cs * p[i] + k * tangent[i]);
                let rr = q[0].clamp(-1.0, 1.0).acos();
                let sp = (q[1] * q[1] + q[2] * q[2] + q[3] * q[3] + q[4] * q[4]).sqrt();
                if sp == 0.0 {
                    return [0.0; 4];
                }
                [q[1], q[2], q[3], q[4]].map(|c| c * rr / sp)
            }
        }
    }
}

/// An orthonormal frame at `pole` (model metric) whose first vector points
/// toward the tip; the remaining vectors span the complement of the axis.
pub fn pole_frame(pole: &Point) -> [Point; 4] {
    let t = norm(pole);
    let u = if t > 0.0 { pole.map(|c| c / t) } else { [1.0, 0.0, 0.0, 0.0] };
    let mut frame = [[0.0; 4]; 4];
    frame[0] = u.map(|c| -c);
    let mut k = 1;
    for e in 0..4 {
        if k == 4 {
            break;
        }
        let mut v = [0.0; 4];
        v[e] = 1.0;
        for f in frame.iter().take(k) {
            let d: f64 = (0..4).map(|i| v[i] * f[i]).sum();
            for i in 0..4 {
                v[i] -= d * f[i];
            }
        }
        let n = norm(&v);
        if n > 1e-6 {
            frame[k] = v.map(|c| c / n);
            k += 1;
        }
    }
    frame
}

/// The smooth step `S(u)`: zero for `u ≤ 0`, one for `u ≥ 1`, with `S'`
/// and `S''`.
pub(crate) fn smooth_step(u: f64) -> (f64, f64, f64) {
    if u <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if u >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let g = (1.0 / u - 1.0 / (1.0 - u)).clamp(-700.0, 700.0);
    let dg = -1.0 / (u * u) - 1.0 / ((1.0 - u) * (1.0 - u));
    let d2g = 2.0 / u.powi(3) - 2.0 / (1.0 - u).powi(3);
    let s = 1.0 / (1.0 + g.exp());
    let ds = -s * (1.0 - s) * dg;
    let d2s = -ds * (1.0 - 2.0 * s) * dg - s * (1.0 - s) * d2g;
    (s, ds, d2s)
}

/// The parametrix `ζ = χ(ρ)ρ⁻²` with `χ = 1` on `ρ ≤ R_c/2` and `0` on
/// `ρ ≥ R_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parametrix {
    pub model: RadialModel,
    pub support: f64,
}

impl Parametrix {
    /// `(χ, χ', χ'')` at `ρ`.
    pub fn cutoff(&self, rho: f64) -> (f64, f64, f64) {
        let h = 0.5 * self.support;
        let (s, ds, d2s) = smooth_step((self.support - rho) / h);
        (s, -ds / h, d2s / (h * h))
    }

    pub fn value(&self, rho: f64) -> f64 {
        self.cutoff(rho).0 / (rho * rho)
    }

    /// `Lζ` away from the pole.
    pub fn source(&self, rho: f64) -> f64 {
        if rho >= self.support {
            return 0.0;
        }
        let core = self.model.inverse_square_residual(rho);
        if rho <= 0.5 * self.support {
            return core;
        }
        let (c, dc, d2c) = self.cutoff(rho);
        let m = self.model.mean_curvature_excess(rho);
        let r2 = rho * rho;
        c * core - 6.0 * (d2c / r2 - dc / (r2 * rho) + m * dc / r2)
    }
}

/// `U_l(cos θ) = sin((l+1)θ)/sin θ` for `l = 0..=lmax`.
pub fn chebyshev_u(c: f64, lmax: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(lmax + 1);
    u.push(1.0);
    if lmax >= 1 {
        u.push(2.0 * c);
    }
    for l in 2..=lmax {
        let next = 2.0 * c * u[l - 1] - u[l - 2];
        u.push(next);
    }
    u
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenProblem {
    pub field: ChartMetricField,
    pub pole: Point,
    pub delta: f64,
    /// Initial harmonic degree cutoff, doubled until the source expansion
    /// is resolved.
    pub lmax: usize,
    /// Polynomial order of the radial elements.
    pub order: usize,
    /// Number of radial elements.
    pub elements: usize,
}

impl GreenProblem {
    pub fn new(field: ChartMetricField, pole: Point, delta: f64) -> Self {
        GreenProblem {
            field,
            pole,
            delta,
            lmax: 96,
            order: 24,
            elements: 32,
        }
    }

    pub fn with_resolution(mut self, lmax: usize, order: usize) -> Self {
        self.lmax = lmax;
        self.order = order;
        self
    }

    pub fn validate(&self) -> Result<RadialModel> {
        let model = RadialModel::from_field(&self.field)?;
        let t = norm(&self.pole);
        if !(self.delta > 0.0) || (model == RadialModel::Round && self.delta >= PI / 2.0) {
            return Err(invalid(format!("ball radius {} out of range", self.delta)));
        }
        if !(t < self.delta / 4.0) {
            return Err(invalid(format!("pole at distance {t} must lie inside δ/4 = {}", self.delta / 4.0)));
        }
        if self.lmax > MAX_DEGREE || self.order < 4 {
            return Err(invalid("resolution out of range"));
        }
        Ok(model)
    }

    /// Parametrix support radius `δ/2`; with `|x| < δ/4` the support stays
    /// inside the ball.
    pub fn support(&self) -> f64 {
        0.5 * self.delta
    }
}

/// Evaluation interface shared by single and assembled Green's functions.
pub trait GreenEvaluator: Sync {
    fn model(&self) -> RadialModel;
    fn pole(&self) -> Point;
    fn value(&self, y: &Point) -> f64;
    /// `G - ρ⁻²` near the pole (where the parametrix cutoff equals one).
    fn regular(&self, y: &Point) -> f64;
    /// Estimated discretization error of the values near the pole.
    fn discretization_error(&self) -> f64 {
        0.0
    }
}

/// Zonal expansion `Σ_l c_l(r) U_l(ŷ·axis)` with radial profiles on a mesh.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZonalField {
    pub axis: Point,
    pub mesh: SpectralMesh,
    pub modes: Vec<Vec<f64>>,
}

impl ZonalField {
    pub fn eval(&self, y: &Point) -> f64 {
        let r = norm(y);
        let lmax = self.modes.len() - 1;
        if r == 0.0 {
            return self.mesh.interpolate(&self.modes[0], 0.0);
        }
        let c = ((0..4).map(|i| y[i] * self.axis[i]).sum::<f64>() / r).clamp(-1.0, 1.0);
        let u = chebyshev_u(c, lmax);
        let (e, w) = self.mesh.stencil(r);
        let base = e * self.mesh.order;
        let mut acc = 0.0;
        for (l, mode) in self.modes.iter().enumerate() {
            let v: f64 = w.iter().enumerate().map(|(j, wj)| wj * mode[base + j]).sum();
            acc += v * u[l];
        }
        acc
    }

    pub fn mirrored(&self) -> ZonalField {
        ZonalField {
            axis: self.axis.map(|c| -c),
            ..self.clone()
        }
    }

    /// Largest nodal magnitude of the top harmonic degree.
    pub fn tail(&self) -> f64 {
        let last = self.modes.last().map(|m| m.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        last.unwrap_or(0.0)
    }
}

/// Zonal coefficients `(2/π)∫₀^π h(θ) U_l(cos θ) sin²θ dθ` over `[0, θmax]`.
fn zonal_projection(h: impl Fn(f64) -> f64, theta_max: f64, lmax: usize, nodes: &[(f64, f64)]) -> Vec<f64> {
    let mut out = vec![0.0; lmax + 1];
    let half = 0.5 * theta_max;
    for &(x, w) in nodes {
        let th = half * (x + 1.0);
        let v = h(th);
        if v == 0.0 {
            continue;
        }
        let (s, c) = th.sin_cos();
        let u = chebyshev_u(c, lmax);
        let k = (2.0 / PI) * half * w * v * s * s;
        for l in 0..=lmax {
            out[l] += k * u[l];
        }
    }
    out
}

/// Solved Dirichlet Green's function `G̃_x` on the ball of radius `δ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreenFunction {
    pub model: RadialModel,
    pub pole: Point,
    pub delta: f64,
    pub parametrix: Parametrix,
    pub regular_part: ZonalField,
    /// Relative sup error of the truncated zonal expansion of `Lζ`.
    pub projection_defect: f64,
    /// Change of the degree-0 profile at the pole radius when the radial
    /// mesh is halved, an upper bound for the radial discretization error.
    pub radial_defect: f64,
}

/// Tolerance on [`GreenFunction::projection_defect`].
pub const PROJECTION_TOLERANCE: f64 = 1e-6;

/// Largest harmonic degree the solver raises its cutoff to.
pub const MAX_DEGREE: usize = 768;

pub fn solve_dirichlet_green(problem: &GreenProblem) -> Result<GreenFunction> {
    let model = problem.validate()?;
    let t = norm(&problem.pole);
    let axis = if t > 0.0 { problem.pole.map(|c| c / t) } else { [1.0, 0.0, 0.0, 0.0] };
    let par = Parametrix {
        model,
        support: problem.support(),
    };
    let lmax = if t > 0.0 { problem.lmax } else { 0 };
    let mesh = SpectralMesh::uniform(problem.delta, problem.elements, problem.order)?;
    let nodes = mesh.nodes();
    let rho_at = |r: f64, th: f64| -> f64 {
        match model {
            RadialModel::Flat => (r * r + t * t - 2.0 * r * t * th.cos()).max(0.0).sqrt(),
            RadialModel::Round => {
                let s = (0.5 * (r - t)).sin().powi(2) + r.sin() * t.sin() * (0.5 * th).sin().powi(2);
                2.0 * s.max(0.0).sqrt().min(1.0).asin()
            }
        }
    };
    // angular extent of the source shell at radius r
    let theta_max = |r: f64| -> Option<f64> {
        if (r - t).abs() >= par.support {
            return None;
        }
        if r + t <= par.support {
            return Some(PI);
        }
        let c = match model {
            RadialModel::Flat => (r * r + t * t - par.support * par.support) / (2.0 * r * t),
            RadialModel::Round => (par.support.cos() - r.cos() * t.cos()) / (r.sin() * t.sin()),
        };
        Some(c.clamp(-1.0, 1.0).acos())
    };

    let project = |lmax: usize| -> (Vec<Vec<f64>>, f64) {
        let gl = gauss_legendre(2 * lmax + 64);
        let mut source = vec![vec![0.0; nodes.len()]; lmax + 1];
        for (i, &r) in nodes.iter().enumerate() {
            if t == 0.0 {
                source[0][i] = par.source(r);
                continue;
            }
            if let Some(tm) = theta_max(r) {
                let coeffs = zonal_projection(|th| par.source(rho_at(r, th)), tm, lmax, &gl);
                for l in 0..=lmax {
                    source[l][i] = coeffs[l];
                }
            }
        }
        // truncation certificate: re-sum the expansion on probe points
        let mut defect: f64 = 0.0;
        let mut scale: f64 = 0.0;
        if t > 0.0 {
            for k in 0..24 {
                let r = t + par.support * (-0.95 + 1.9 * (k as f64 + 0.5) / 24.0);
                let i = nodes.partition_point(|v| *v < r).min(nodes.len() - 1);
                let r = nodes[i];
                for m in 0..16 {
                    let th = theta_max(r).unwrap_or(0.0) * (m as f64 + 0.5) / 16.0;
                    let exact = par.source(rho_at(r, th));
                    let u = chebyshev_u(th.cos(), lmax);
                    let approx: f64 = (0..=lmax).map(|l| source[l][i] * u[l]).sum();
                    defect = defect.max((exact - approx).abs());
                    scale = scale.max(exact.abs());
                }
            }
        }
        (source, if scale > 0.0 { defect / scale } else { 0.0 })
    };
    // raise the cutoff until the source is resolved
    let mut lmax = lmax;
    let (source, projection_defect) = loop {
        let (source, defect) = project(lmax);
        if defect <= PROJECTION_TOLERANCE || lmax >= MAX_DEGREE {
            break (source, defect);
        }
        lmax = (2 * lmax).min(MAX_DEGREE);
    };

    let coeffs = move |r: f64| model.coefficients(r);
    let modes: Vec<Vec<f64>> = (0..=lmax)
        .into_par_iter()
        .map(|l| {
            let rhs: Vec<f64> = source[l].iter().map(|v| -v).collect();
            solve_mode(&mesh, l, &coeffs, &rhs, 0.0)
        })
        .collect::<Result<Vec<_>>>()?;

    let radial_defect = {
        let gl = gauss_legendre(2 * lmax + 64);
        let coarse = SpectralMesh::uniform(problem.delta, (problem.elements / 2).max(1), problem.order)?;
        let cn = coarse.nodes();
        let rhs: Vec<f64> = cn
            .iter()
            .map(|&r| {
                if t == 0.0 {
                    -par.source(r)
                } else {
                    theta_max(r).map_or(0.0, |tm| -zonal_projection(|th| par.source(rho_at(r, th)), tm, 0, &gl)[0])
                }
            })
            .collect();
        let c0 = solve_mode(&coarse, 0, &coeffs, &rhs, 0.0)?;
        (coarse.interpolate(&c0, t) - mesh.interpolate(&modes[0], t)).abs()
    };
    if projection_defect > PROJECTION_TOLERANCE {
        return Err(Error::Residual(format!(
            "harmonic cutoff {lmax} leaves a relative source residual {projection_defect:e}"
        )));
    }

    Ok(GreenFunction {
        model,
        pole: problem.pole,
        delta: problem.delta,
        parametrix: par,
        regular_part: ZonalField { axis, mesh, modes },
        projection_defect,
        radial_defect,
    })
}

impl GreenFunction {
    /// `G̃_{-x}`, obtained from the reflection symmetry of the model.
    pub fn mirrored(&self) -> GreenFunction {
        GreenFunction {
            pole: self.pole.map(|c| -c),
            regular_part: self.regular_part.mirrored(),
            ..self.clone()
        }
    }

    pub fn t(&self) -> f64 {
        norm(&self.pole)
    }

    /// `φ_x(x)`, the constant term of the expansion at the pole in the
    /// coordinates of the chart metric.
    pub fn regular_at_pole(&self) -> f64 {
        self.regular_part.eval(&self.pole)
    }
}

impl GreenEvaluator for GreenFunction {
    fn model(&self) -> RadialModel {
        self.model
    }

    fn pole(&self) -> Point {
        self.pole
    }

    fn value(&self, y: &Point) -> f64 {
        let rho = self.model.distance(&self.pole, y);
        self.parametrix.value(rho) + self.regular_part.eval(y)
    }

    fn regular(&self, y: &Point) -> f64 {
        self.regular_part.eval(y)
    }

    fn discretization_error(&self) -> f64 {
        self.radial_defect
    }
}

/// Boundary datum of the harmonic correction `H_x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryDatum {
    /// `H_x ≡ 0`.
    Zero,
    /// Trace of the global Green's function of the model quotient, so that
    /// the assembled function is the global one.
    Global,
}

/// `L H = 0` in the ball with a zonal boundary datum `h(θ)` about `axis`.
pub fn harmonic_extension(
    model: RadialModel,
    axis: Point,
    delta: f64,
    lmax: usize,
    h: impl Fn(f64) -> f64,
) -> Result<ZonalField> {
    let breaks = vec![0.0, 0.25 * delta, 0.5 * delta, 0.75 * delta, delta];
    let mesh = SpectralMesh::new(breaks, 16)?;
    let gl = gauss_legendre(2 * lmax + 64);
    let data = zonal_projection(h, PI, lmax, &gl);
    let zero = vec![0.0; mesh.dofs()];
    let coeffs = move |r: f64| model.coefficients(r);
    let modes = data
        .par_iter()
        .enumerate()
        .map(|(l, b)| solve_mode(&mesh, l, &coeffs, &zero, *b))
        .collect::<Result<Vec<_>>>()?;
    Ok(ZonalField { axis, mesh, modes })
}

/// `G_q∘σ_P = G̃_x + G̃_{-x} + H_x` on the lifted ball.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivariantGreen {
    pub plus: GreenFunction,
    pub minus: GreenFunction,
    pub datum: BoundaryDatum,
    pub harmonic: Option<ZonalField>,
}

pub fn assemble_equivariant(plus: GreenFunction, minus: GreenFunction, datum: BoundaryDatum) -> Result<EquivariantGreen> {
    let mismatch = (0..4).map(|i| (plus.pole[i] + minus.pole[i]).abs()).fold(0.0, f64::max);
    if mismatch > 1e-14 || plus.model != minus.model || plus.delta != minus.delta {
        return Err(invalid("the two Green's functions must have antipodal poles on the same ball"));
    }
    if plus.t() == 0.0 {
        return Err(invalid("the pole must be distinct from the tip"));
    }
    let harmonic = match datum {
        BoundaryDatum::Zero => None,
        BoundaryDatum::Global => {
            let (model, x, delta) = (plus.model, plus.pole, plus.delta);
            let axis = plus.regular_part.axis;
            let perp = pole_frame(&x)[1];
            let h = |th: f64| {
                let (s, c) = th.sin_cos();
                let y: Point = [0, 1, 2, 3].map(|i| delta * (c * axis[i] + s * perp[i]));
                model.global_green(&x, &y) + model.global_green(&x.map(|v| -v), &y)
            };
            let lmax = plus.regular_part.modes.len().max(33) - 1;
            Some(harmonic_extension(model, axis, delta, lmax, h)?)
        }
    };
    Ok(EquivariantGreen {
        plus,
        minus,
        datum,
        harmonic,
    })
}

impl EquivariantGreen {
    pub fn harmonic_value(&self, y: &Point) -> f64 {
        self.harmonic.as_ref().map_or(0.0, |h| h.eval(y))
    }

    /// Largest `|G(y) - G(-y)|` relative to `|G(y)|` on random samples.
    pub fn symmetry_defect(&self, samples: usize, seed: u64) -> f64 {
        let t = self.plus.t();
        let mut worst: f64 = 0.0;
        for (k, d) in sample_points(samples, seed).iter().enumerate() {
            let r = self.plus.delta * (0.05 + 0.9 * (k as f64 + 0.5) / samples as f64);
            if (r - t).abs() < 0.05 * t {
                continue;
            }
            let y = d.map(|v| v * r);
            let a = self.value(&y);
            let b = self.value(&y.map(|v| -v));
            worst = worst.max((a - b).abs() / a.abs().max(1e-300));
        }
        worst
    }
}

impl GreenEvaluator for EquivariantGreen {
    fn model(&self) -> RadialModel {
        self.plus.model
    }

    fn pole(&self) -> Point {
        self.plus.pole
    }

    fn value(&self, y: &Point) -> f64 {
        self.plus.value(y) + self.minus.value(y) + self.harmonic_value(y)
    }

    fn regular(&self, y: &Point) -> f64 {
        self.plus.regular(y) + self.minus.value(y) + self.harmonic_value(y)
    }

    fn discretization_error(&self) -> f64 {
        self.plus.radial_defect + self.minus.radial_defect
    }
}

/// Solves `G̃_x`, mirrors it to `G̃_{-x}` and assembles.
pub fn solve_equivariant(problem: &GreenProblem, datum: BoundaryDatum) -> Result<EquivariantGreen> {
    let plus = solve_dirichlet_green(problem)?;
    let minus = plus.mirrored();
    assemble_equivariant(plus, minus, datum)
}
