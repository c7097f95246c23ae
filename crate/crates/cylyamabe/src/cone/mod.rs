//! Conical charts over round links and their normalizations.
//!
//! Metrics live on a coordinate ball in ℝ⁴ and are written once, generic over
//! [`Real`], so the same closed form yields values, exact jets, or finite
//! differences.

pub mod cnc;
pub mod curvature;
pub mod football;
pub mod link;
pub mod normal;
pub mod regularity;

use crate::constants::Point;
use crate::error::{invalid, Error, Result};
use crate::real::{Real, Series};
use nalgebra::{Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::sync::LazyLock;

pub use cnc::{cnc_polynomial, verify_cnc, CncFactor, CncResiduals, Cutoff};
pub use curvature::{curvature_at, curvature_at_analytic, CurvatureSnapshot, MetricJet};
pub use football::{football_metric, Football};
pub use link::{alpha_pullback, link_flow, verify_first_order_identity, AlphaSample, GaugeCheck};
pub use normal::{normal_coordinates, NormalChart};
pub use regularity::{regularity_probe, RegularityReport};

pub type Mat4 = [[f64; 4]; 4];
pub type MatT<T> = [[T; 4]; 4];

pub(crate) fn zeros<T: Real>() -> MatT<T> {
    [[T::cst(0.0); 4]; 4]
}

pub(crate) fn identity<T: Real>() -> MatT<T> {
    let mut m = zeros::<T>();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::cst(1.0);
    }
    m
}

pub(crate) fn to_matrix(m: &Mat4) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| m[i][j])
}

pub(crate) fn dot4<T: Real>(a: &[T; 4], b: &[T; 4]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Projector `I - y yᵀ` onto the tangent space of the unit sphere at `y`.
pub(crate) fn tangent_projector<T: Real>(y: &[T; 4]) -> MatT<T> {
    let mut p = identity::<T>();
    for i in 0..4 {
        for j in 0..4 {
            p[i][j] = p[i][j] - y[i] * y[j];
        }
    }
    p
}

pub(crate) fn sandwich<T: Real>(p: &MatT<T>, m: &MatT<T>) -> MatT<T> {
    let mut pm = zeros::<T>();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = T::cst(0.0);
            for k in 0..4 {
                acc = acc + p[i][k] * m[k][j];
            }
            pm[i][j] = acc;
        }
    }
    let mut out = zeros::<T>();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = T::cst(0.0);
            for k in 0..4 {
                acc = acc + pm[i][k] * p[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

/// `sin²√u/u` and `(1 - sin²√u/u)/u` as power series in `u = r²`.
static SIN_SERIES: LazyLock<(Series, Series)> = LazyLock::new(|| {
    let n = 40;
    let mut f = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let fact = |k: u32| (1..=k).fold(1.0f64, |a, b| a * b as f64);
    for m in 0..n as i32 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        f.push(sign * 2f64.powi(2 * m + 1) / fact((2 * m + 2) as u32));
        g.push(sign * 2f64.powi(2 * m + 3) / fact((2 * m + 4) as u32));
    }
    (Series { coeffs: f }, Series { coeffs: g })
});

/// `F(u) = sin²r/r²`, `u = r²`.
pub fn sinc2_of_sq<T: Real>(u: T) -> T {
    SIN_SERIES.0.apply(u)
}

/// `G(u) = (1 - F(u))/u`.
pub fn sinc2_defect_of_sq<T: Real>(u: T) -> T {
    SIN_SERIES.1.apply(u)
}

/// Round metric of curvature one in normal coordinates:
/// `g = F(|x|²) δ + G(|x|²) x xᵀ`.
pub fn round_normal_metric<T: Real>(x: &[T; 4]) -> MatT<T> {
    let u = dot4(x, x);
    let f = sinc2_of_sq(u);
    let gq = sinc2_defect_of_sq(u);
    let mut m = zeros::<T>();
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = gq * x[i] * x[j];
        }
        m[i][i] = m[i][i] + f;
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Link {
    Sphere,
    ProjectiveSpace,
}

/// A function on the link, given by an ambient formula restricted to the
/// unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LinkFunction {
    Constant(f64),
    Linear(Point),
    /// `zᵀAz` with `A` symmetric.
    Quadratic(Mat4),
}

impl LinkFunction {
    pub fn ambient<T: Real>(&self, z: &[T; 4]) -> T {
        match self {
            LinkFunction::Constant(k) => T::cst(*k),
            LinkFunction::Linear(a) => z[0] * a[0] + z[1] * a[1] + z[2] * a[2] + z[3] * a[3],
            LinkFunction::Quadratic(a) => {
                let mut acc = T::cst(0.0);
                for i in 0..4 {
                    for j in 0..4 {
                        acc = acc + z[i] * z[j] * a[i][j];
                    }
                }
                acc
            }
        }
    }

    pub fn ambient_grad<T: Real>(&self, z: &[T; 4]) -> [T; 4] {
        match self {
            LinkFunction::Constant(_) => [T::cst(0.0); 4],
            LinkFunction::Linear(a) => a.map(T::cst),
            LinkFunction::Quadratic(a) => {
                let mut g = [T::cst(0.0); 4];
                for i in 0..4 {
                    for j in 0..4 {
                        g[i] = g[i] + z[j] * (2.0 * a[i][j]);
                    }
                }
                g
            }
        }
    }

    pub fn ambient_hessian(&self) -> Mat4 {
        match self {
            LinkFunction::Quadratic(a) => {
                let mut h = *a;
                for row in h.iter_mut() {
                    for v in row.iter_mut() {
                        *v *= 2.0;
                    }
                }
                h
            }
            _ => [[0.0; 4]; 4],
        }
    }

    pub fn value(&self, z: &Point) -> f64 {
        self.ambient(z)
    }

    /// Gradient on the unit sphere, `P∇F`.
    pub fn gradient(&self, z: &Point) -> Point {
        let g = self.ambient_grad(z);
        let zg = dot4(z, &g);
        [0, 1, 2, 3].map(|i| g[i] - zg * z[i])
    }

    /// Hessian on the unit sphere as an ambient bilinear form on the tangent
    /// space, `P D²F P - (z·∇F) P`.
    pub fn hessian<T: Real>(&self, z: &[T; 4]) -> MatT<T> {
        let p = tangent_projector(z);
        let d2 = self.ambient_hessian();
        let d2t: MatT<T> = d2.map(|r| r.map(T::cst));
        let mut h = sandwich(&p, &d2t);
        let zg = dot4(z, &self.ambient_grad(z));
        for i in 0..4 {
            for j in 0..4 {
                h[i][j] = h[i][j] - zg * p[i][j];
            }
        }
        h
    }

    pub fn sup_abs(&self) -> f64 {
        match self {
            LinkFunction::Constant(k) => k.abs(),
            LinkFunction::Linear(a) => crate::constants::norm(a),
            LinkFunction::Quadratic(a) => {
                let e = SymmetricEigen::new(to_matrix(a));
                e.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            }
        }
    }

    /// Invariance under `z ↦ -z`, required for functions on ℝP³.
    pub fn is_even(&self) -> bool {
        !matches!(self, LinkFunction::Linear(a) if a.iter().any(|v| *v != 0.0))
    }
}

/// One-parameter family `h(s)` of metrics on the link, `h(0) = h₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LinkFamily {
    /// `h(s) = h₀`: the exact cone, flat space in polar form.
    Round,
    /// `h(s) = (1 + s²) h₀`.
    OnePlusSquare,
    /// `h(s) = (sin²s/s²) h₀`: the suspension of the round link.
    Football,
    /// `h(s) = h₀ - s(∇²f + f h₀)`, the family whose first-order term the
    /// gauge change removes.
    Gauge(LinkFunction),
    /// `h(s) = h₀ + s^power N` with `N` an ambient symmetric matrix
    /// restricted to the link.
    Perturbed { power: u32, n: Mat4 },
}

impl LinkFamily {
    /// `h(s)` at `y ∈ S³` as an ambient matrix; only its tangent block is
    /// meaningful.
    pub fn tensor<T: Real>(&self, s: T, y: &[T; 4]) -> MatT<T> {
        match self {
            LinkFamily::Round => identity(),
            LinkFamily::OnePlusSquare => scaled_identity(s * s + 1.0),
            LinkFamily::Football => scaled_identity(sinc2_of_sq(s * s)),
            LinkFamily::Gauge(f) => {
                let h = f.hessian(y);
                let fv = f.ambient(y);
                let mut m = identity::<T>();
                for i in 0..4 {
                    for j in 0..4 {
                        m[i][j] = m[i][j] - s * h[i][j];
                    }
                    m[i][i] = m[i][i] - s * fv;
                }
                m
            }
            LinkFamily::Perturbed { power, n } => {
                let sp = s.powi(*power as i32);
                let mut m = identity::<T>();
                for i in 0..4 {
                    for j in 0..4 {
                        m[i][j] = m[i][j] + sp * n[i][j];
                    }
                }
                m
            }
        }
    }

    /// `h'(0)` at `y`, by forward-mode differentiation of [`Self::tensor`].
    pub fn derivative_at_zero(&self, y: &Point) -> Mat4 {
        use crate::real::Dual;
        let s = Dual::<1>::var(0.0, 0);
        let yy = y.map(Dual::<1>::cst);
        self.tensor(s, &yy).map(|r| r.map(|v| v.d[0]))
    }

    /// Largest `k` with `Φ*(ds² + s²h(s))` of class `C^{k-1,1}` at the tip, or
    /// `None` if it is smooth.
    pub fn regularity(&self) -> Option<u32> {
        match self {
            LinkFamily::Round | LinkFamily::OnePlusSquare | LinkFamily::Football => None,
            LinkFamily::Gauge(_) => Some(1),
            LinkFamily::Perturbed { power, .. } => Some(*power),
        }
    }

    pub fn validate(&self, link: Link) -> Result<()> {
        if let (Link::ProjectiveSpace, LinkFamily::Gauge(f)) = (link, self) {
            if !f.is_even() {
                return Err(invalid("link function must be even on the projective link"));
            }
        }
        Ok(())
    }
}

fn scaled_identity<T: Real>(k: T) -> MatT<T> {
    let mut m = zeros::<T>();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = k;
    }
    m
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeMetric {
    pub link: Link,
    pub family: LinkFamily,
    pub s_max: f64,
}

impl ConeMetric {
    pub fn new(link: Link, family: LinkFamily, s_max: f64) -> Result<Self> {
        family.validate(link)?;
        if !(s_max > 0.0) {
            return Err(invalid("cone radius must be positive"));
        }
        Ok(ConeMetric { link, family, s_max })
    }

    /// `ds² + s²h(s)` on `(∂_s, v)` pairs with `v, w` tangent at `y`.
    pub fn polar_metric(&self, s: f64, y: &Point, (a, v): (f64, Point), (b, w): (f64, Point)) -> f64 {
        let h = self.family.tensor(s, y);
        let mut acc = a * b;
        for i in 0..4 {
            for j in 0..4 {
                acc += s * s * h[i][j] * v[i] * w[j];
            }
        }
        acc
    }
}

/// Normal-coordinate polynomial metric `δ + c₂(x,x) + c₃(x,x,x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialMetric {
    /// Coefficient of each sorted quadratic monomial `x_k x_l` (k ≤ l).
    pub quad: Vec<[[f64; 4]; 4]>,
    /// Coefficient of each sorted cubic monomial `x_k x_l x_m` (k ≤ l ≤ m).
    pub cubic: Vec<[[f64; 4]; 4]>,
}

pub(crate) fn quad_monomials() -> Vec<[usize; 2]> {
    let mut v = Vec::new();
    for k in 0..4 {
        for l in k..4 {
            v.push([k, l]);
        }
    }
    v
}

pub(crate) fn cubic_monomials() -> Vec<[usize; 3]> {
    let mut v = Vec::new();
    for k in 0..4 {
        for l in k..4 {
            for m in l..4 {
                v.push([k, l, m]);
            }
        }
    }
    v
}

impl PolynomialMetric {
    /// Collects full coefficient tensors `A_ij,kl` and `B_ij,klm` into
    /// monomial form.
    pub fn from_tensors(a: &[[[[f64; 4]; 4]; 4]; 4], b: &[[[[[f64; 4]; 4]; 4]; 4]; 4]) -> Self {
        let qm = quad_monomials();
        let cm = cubic_monomials();
        let mut quad = vec![[[0.0; 4]; 4]; qm.len()];
        let mut cubic = vec![[[0.0; 4]; 4]; cm.len()];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let key = if k <= l { [k, l] } else { [l, k] };
                        let idx = qm.iter().position(|m| *m == key).unwrap();
                        quad[idx][i][j] += a[i][j][k][l];
                        for m in 0..4 {
                            let mut key = [k, l, m];
                            key.sort_unstable();
                            let idx = cm.iter().position(|c| *c == key).unwrap();
                            cubic[idx][i][j] += b[i][j][k][l][m];
                        }
                    }
                }
            }
        }
        PolynomialMetric { quad, cubic }
    }

    /// Normal-coordinate expansion
    /// `g_ij = δ_ij - ⅓R_ikjl x^k x^l - ⅙∇_m R_ikjl x^k x^l x^m`
    /// from orthonormal-frame components of the curvature.
    pub fn from_normal_jet(riem: &[[[[f64; 4]; 4]; 4]; 4], nabla: &[[[[[f64; 4]; 4]; 4]; 4]; 4]) -> Self {
        let mut a = [[[[0.0; 4]; 4]; 4]; 4];
        let mut b = [[[[[0.0; 4]; 4]; 4]; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        a[i][j][k][l] = -riem[i][k][j][l] / 3.0;
                        for m in 0..4 {
                            b[i][j][k][l][m] = -nabla[m][i][k][j][l] / 6.0;
                        }
                    }
                }
            }
        }
        Self::from_tensors(&a, &b)
    }

    /// A fixed smooth metric that is neither Einstein nor conformally flat,
    /// positive-definite on the ball of radius 0.5.
    pub fn test_metric() -> Self {
        let qm = quad_monomials();
        let cm = cubic_monomials();
        let coef = |i: usize, j: usize, seed: usize| {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            0.04 * ((1 + a + 3 * b + 7 * seed) as f64 * 1.7).sin()
        };
        let mut quad = vec![[[0.0; 4]; 4]; qm.len()];
        for (n, row) in quad.iter_mut().enumerate() {
            for i in 0..4 {
                for j in 0..4 {
                    row[i][j] = coef(i, j, n);
                }
            }
        }
        let mut cubic = vec![[[0.0; 4]; 4]; cm.len()];
        for (n, row) in cubic.iter_mut().enumerate() {
            for i in 0..4 {
                for j in 0..4 {
                    row[i][j] = 0.5 * coef(i, j, n + 11);
                }
            }
        }
        PolynomialMetric { quad, cubic }
    }

    pub fn eval<T: Real>(&self, x: &[T; 4]) -> MatT<T> {
        let mut m = identity::<T>();
        let qm = quad_monomials();
        for (c, [k, l]) in self.quad.iter().zip(qm) {
            let mono = x[k] * x[l];
            for i in 0..4 {
                for j in 0..4 {
                    if c[i][j] != 0.0 {
                        m[i][j] = m[i][j] + mono * c[i][j];
                    }
                }
            }
        }
        for (c, [k, l, n]) in self.cubic.iter().zip(cubic_monomials()) {
            let mono = x[k] * x[l] * x[n];
            for i in 0..4 {
                for j in 0..4 {
                    if c[i][j] != 0.0 {
                        m[i][j] = m[i][j] + mono * c[i][j];
                    }
                }
            }
        }
        m
    }
}

/// A metric tensor field on a coordinate ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ChartMetricField {
    Flat,
    /// Round 𝕊⁴ of curvature one in normal coordinates about a point.
    RoundNormal,
    /// `Φ*(ds² + s²h(s))` in Cartesian coordinates, `δ` at the tip.
    Cone(LinkFamily),
    Polynomial(Box<PolynomialMetric>),
    /// `e^{f} g` with `f` a cut-off conformal-normal-coordinate polynomial.
    Conformal(Box<ChartMetricField>, Box<CncFactor>),
}

impl ChartMetricField {
    pub fn eval<T: Real>(&self, x: &[T; 4]) -> MatT<T> {
        match self {
            ChartMetricField::Flat => identity(),
            ChartMetricField::RoundNormal => round_normal_metric(x),
            ChartMetricField::Cone(fam) => cone_pullback(fam, x),
            ChartMetricField::Polynomial(p) => p.eval(x),
            ChartMetricField::Conformal(base, f) => {
                let e = f.eval(x).exp();
                let mut m = base.eval(x);
                for row in m.iter_mut() {
                    for v in row.iter_mut() {
                        *v = *v * e;
                    }
                }
                m
            }
        }
    }

    /// Metric at `x`, checked for symmetry and positive-definiteness.
    pub fn metric(&self, x: &Point) -> Result<Mat4> {
        let g = self.eval(x);
        if !g.iter().flatten().all(|v| v.is_finite()) || to_matrix(&g).cholesky().is_none() {
            return Err(Error::ChartBreakdown(format!("metric not positive-definite at {x:?}")));
        }
        Ok(g)
    }

    /// Whether closed-form jets are valid at `x` (cone tips are excluded for
    /// non-smooth families).
    pub fn smooth_at(&self, x: &Point) -> bool {
        match self {
            ChartMetricField::Cone(fam) => fam.regularity().is_none() || crate::constants::norm(x) > 0.0,
            ChartMetricField::Conformal(b, _) => b.smooth_at(x),
            _ => true,
        }
    }
}

/// `Φ*(ds² + s²h(s)) = x̂x̂ᵀ + P h(|x|) P`, `P = I - x̂x̂ᵀ`.
pub fn cone_pullback<T: Real>(fam: &LinkFamily, x: &[T; 4]) -> MatT<T> {
    match fam {
        LinkFamily::Round => identity(),
        LinkFamily::Football => round_normal_metric(x),
        LinkFamily::OnePlusSquare => {
            // (1 + |x|²) δ - x xᵀ
            let u = dot4(x, x);
            let mut m = zeros::<T>();
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] = -(x[i] * x[j]);
                }
                m[i][i] = m[i][i] + u + 1.0;
            }
            m
        }
        _ => {
            let u = dot4(x, x);
            if u.value() == 0.0 {
                return identity();
            }
            let r = u.sqrt();
            let y = x.map(|v| v / r);
            let p = tangent_projector(&y);
            let h = fam.tensor(r, &y);
            let mut m = sandwich(&p, &h);
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] = m[i][j] + y[i] * y[j];
                }
            }
            m
        }
    }
}

/// Result of pulling a cone metric back to Cartesian coordinates.
pub fn pullback_via_phi(cone: &ConeMetric, ball_radius: f64) -> Result<ChartMetricField> {
    if !(ball_radius > 0.0 && ball_radius <= cone.s_max) {
        return Err(invalid(format!(
            "ball radius {ball_radius} must lie in (0, {}]",
            cone.s_max
        )));
    }
    let field = ChartMetricField::Cone(cone.family.clone());
    // sample positive-definiteness on a few shells
    for k in 1..=8 {
        let r = ball_radius * k as f64 / 8.0;
        for dir in [[1.0, 0.0, 0.0, 0.0], [0.0, 0.6, 0.8, 0.0], [0.5, 0.5, 0.5, 0.5]] {
            field.metric(&dir.map(|v: f64| v * r))?;
        }
    }
    Ok(field)
}
