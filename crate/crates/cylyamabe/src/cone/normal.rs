//! Geodesic normal coordinates by shooting, and closed normal forms.

use super::curvature::{curvature_at_analytic, inverse, MetricJet, Tensor3};
use super::{ChartMetricField, LinkFamily, Mat4, PolynomialMetric};
use crate::constants::{norm, Point};
use crate::error::{invalid, Error, Result};
use crate::ode::{integrate, OdeTolerance};
use crate::real::{Dual, Real};
use serde::{Deserialize, Serialize};

/// `Γ^a_bc` and `∂_e Γ^a_bc` (as `[e][a][b][c]`) from exact derivatives.
pub(crate) fn christoffel_with_derivative(field: &ChartMetricField, x: &Point) -> Result<(Tensor3, [Tensor3; 4])> {
    let jet = MetricJet::analytic(field, x)?;
    let lift = |v: f64, d: [f64; 4]| Dual::<4> { v, d };
    let mut g = [[Dual::<4>::cst(0.0); 4]; 4];
    let mut dg = [[[Dual::<4>::cst(0.0); 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            g[i][j] = lift(jet.g[i][j], [0, 1, 2, 3].map(|m| jet.dg[m][i][j]));
            for k in 0..4 {
                dg[k][i][j] = lift(jet.dg[k][i][j], [0, 1, 2, 3].map(|m| jet.d2g[k][m][i][j]));
            }
        }
    }
    let ginv = inverse(&g);
    let mut gamma = [[[0.0; 4]; 4]; 4];
    let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut acc = Dual::<4>::cst(0.0);
                for d in 0..4 {
                    acc = acc + ginv[a][d] * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]) * 0.5;
                }
                gamma[a][b][c] = acc.v;
                for e in 0..4 {
                    dgamma[e][a][b][c] = acc.d[e];
                }
            }
        }
    }
    Ok((gamma, dgamma))
}


/// `g`-orthonormal frame at `x` (columns), first vector along `direction`.
pub fn orthonormal_frame(g: &Mat4, direction: &Point) -> Result<Mat4> {
    let ip = |a: &Point, b: &Point| {
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                acc += g[i][j] * a[i] * b[j];
            }
        }
        acc
    };
    let mut basis: Vec<Point> = Vec::new();
    let mut candidates = vec![*direction];
    for i in 0..4 {
        let mut e = [0.0; 4];
        e[i] = 1.0;
        candidates.push(e);
    }
    for mut c in candidates {
        for b in &basis {
            let p = ip(&c, b);
            for i in 0..4 {
                c[i] -= p * b[i];
            }
        }
        let n = ip(&c, &c);
        if n > 1e-10 {
            let s = n.sqrt();
            basis.push(c.map(|v| v / s));
        }
        if basis.len() == 4 {
            break;
        }
    }
    if basis.len() < 4 {
        return Err(Error::ChartBreakdown("degenerate frame".into()));
    }
    let mut e = [[0.0; 4]; 4];
    for (col, b) in basis.iter().enumerate() {
        for row in 0..4 {
            e[row][col] = b[row];
        }
    }
    Ok(e)
}

/// Geodesic normal coordinates about a basepoint of a chart.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalChart {
    pub field: ChartMetricField,
    pub base: Point,
    /// Columns are the orthonormal frame at the base.
    pub frame: Mat4,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalCertificate {
    pub metric_defect: f64,
    pub first_derivative: f64,
}

fn geodesic_rhs(field: &ChartMetricField, with_jacobi: bool) -> impl FnMut(f64, &[f64], &mut [f64]) -> Result<()> + '_ {
    move |_s, y, dy| {
        let x = [y[0], y[1], y[2], y[3]];
        let v = [y[4], y[5], y[6], y[7]];
        let (gam, dgam) = if with_jacobi {
            christoffel_with_derivative(field, &x)?
        } else {
            (christoffel_with_derivative(field, &x)?.0, [[[[0.0; 4]; 4]; 4]; 4])
        };
        for a in 0..4 {
            dy[a] = v[a];
            let mut acc = 0.0;
            for b in 0..4 {
                for c in 0..4 {
                    acc += gam[a][b][c] * v[b] * v[c];
                }
            }
            dy[4 + a] = -acc;
        }
        if with_jacobi {
            // X^a_j at 8 + 4a + j, V^a_j at 24 + 4a + j
            for a in 0..4 {
                for j in 0..4 {
                    dy[8 + 4 * a + j] = y[24 + 4 * a + j];
                    let mut acc = 0.0;
                    for b in 0..4 {
                        for c in 0..4 {
                            let vv = v[b] * v[c];
                            for e in 0..4 {
                                acc += dgam[e][a][b][c] * y[8 + 4 * e + j] * vv;
                            }
                            acc += 2.0 * gam[a][b][c] * v[b] * y[24 + 4 * c + j];
                        }
                    }
                    dy[24 + 4 * a + j] = -acc;
                }
            }
        }
        Ok(())
    }
}

impl NormalChart {
    fn tol() -> OdeTolerance {
        OdeTolerance {
            rel: 1e-13,
            abs: 1e-15,
            max_steps: 200_000,
        }
    }

    fn shoot(&self, y: &Point) -> Result<Vec<f64>> {
        if norm(y) > self.radius * (1.0 + 1e-12) {
            return Err(Error::LeftChart(format!("|y| = {} exceeds radius {}", norm(y), self.radius)));
        }
        let e = &self.frame;
        let mut state = vec![0.0; 40];
        for a in 0..4 {
            state[a] = self.base[a];
            state[4 + a] = (0..4).map(|i| e[a][i] * y[i]).sum();
            for j in 0..4 {
                state[24 + 4 * a + j] = e[a][j];
            }
        }
        let out = integrate(geodesic_rhs(&self.field, true), 0.0, 1.0, &state, &Self::tol())?;
        let x = [out[0], out[1], out[2], out[3]];
        if !x.iter().all(|v| v.is_finite()) || !self.field.smooth_at(&x) {
            return Err(Error::LeftChart(format!("geodesic reached {x:?}")));
        }
        Ok(out)
    }

    /// `exp_base(E y)` and its Jacobian in `y`.
    pub fn forward_with_jacobian(&self, y: &Point) -> Result<(Point, Mat4)> {
        let out = self.shoot(y)?;
        let x = [out[0], out[1], out[2], out[3]];
        let mut j = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                j[a][b] = out[8 + 4 * a + b];
            }
        }
        Ok((x, j))
    }

    /// `exp_base(E y)` and `Δ(d²/2)` there, `d` the distance from the base,
    /// as the trace of `∇_s J · J⁻¹` over the Jacobi fields of the shot.
    pub fn half_square_laplacian(&self, y: &Point) -> Result<(Point, f64)> {
        let out = self.shoot(y)?;
        let x = [out[0], out[1], out[2], out[3]];
        let v = [out[4], out[5], out[6], out[7]];
        let (gam, _) = christoffel_with_derivative(&self.field, &x)?;
        let mut jm = nalgebra::Matrix4::<f64>::zeros();
        let mut dm = nalgebra::Matrix4::<f64>::zeros();
        for a in 0..4 {
            for j in 0..4 {
                jm[(a, j)] = out[8 + 4 * a + j];
                let mut acc = out[24 + 4 * a + j];
                for b in 0..4 {
                    for c in 0..4 {
                        acc += gam[a][b][c] * v[b] * out[8 + 4 * c + j];
                    }
                }
                dm[(a, j)] = acc;
            }
        }
        let inv = jm
            .try_inverse()
            .ok_or_else(|| Error::ChartBreakdown("conjugate point along the radial geodesic".into()))?;
        Ok((x, (dm * inv).trace()))
    }

    pub fn forward(&self, y: &Point) -> Result<Point> {
        Ok(self.forward_with_jacobian(y)?.0)
    }

    /// Newton inversion of [`Self::forward`].
    pub fn inverse(&self, x: &Point) -> Result<Point> {
        let g = self.field.metric(&self.base)?;
        // first guess: y = Eᵀ g (x - base)
        let d = [0, 1, 2, 3].map(|i| x[i] - self.base[i]);
        let mut y = [0.0; 4];
        for i in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    y[i] += self.frame[a][i] * g[a][b] * d[b];
                }
            }
        }
        for _ in 0..50 {
            let (fx, j) = self.forward_with_jacobian(&y)?;
            let r = [0, 1, 2, 3].map(|i| fx[i] - x[i]);
            if norm(&r) < 1e-14 * (1.0 + norm(x)) {
                return Ok(y);
            }
            let jm = super::to_matrix(&j);
            let step = jm
                .lu()
                .solve(&nalgebra::Vector4::from_column_slice(&r))
                .ok_or_else(|| Error::ChartBreakdown("singular exponential map".into()))?;
            for i in 0..4 {
                y[i] -= step[i];
            }
        }
        Err(Error::ChartBreakdown("normal-coordinate inversion did not converge".into()))
    }

    /// Metric in normal coordinates, `Jᵀ g(exp y) J`.
    pub fn metric(&self, y: &Point) -> Result<Mat4> {
        let (x, j) = self.forward_with_jacobian(y)?;
        let g = self.field.metric(&x)?;
        let mut out = [[0.0; 4]; 4];
        for p in 0..4 {
            for q in 0..4 {
                let mut acc = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        acc += j[a][p] * g[a][b] * j[b][q];
                    }
                }
                out[p][q] = acc;
            }
        }
        Ok(out)
    }

    /// Length of the radial geodesic to `y`, by quadrature of its speed.
    pub fn radial_length(&self, y: &Point) -> Result<f64> {
        let n = 16;
        let gl = crate::quadrature::gauss_legendre(n);
        let mut len = 0.0;
        for (s, w) in gl {
            let tau = 0.5 * (s + 1.0);
            let yt = y.map(|v| v * tau);
            let (x, j) = self.forward_with_jacobian(&yt)?;
            let g = self.field.metric(&x)?;
            let v: Point = [0, 1, 2, 3].map(|a| (0..4).map(|b| j[a][b] * y[b]).sum());
            let mut sp = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    sp += g[a][b] * v[a] * v[b];
                }
            }
            len += 0.5 * w * sp.sqrt();
        }
        Ok(len)
    }

    /// `|g_N(0) - δ|` and the largest centered-difference `|∂g_N(0)|`.
    pub fn certify(&self, h: f64) -> Result<NormalCertificate> {
        let g0 = self.metric(&[0.0; 4])?;
        let mut metric_defect: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let d = if i == j { 1.0 } else { 0.0 };
                metric_defect = metric_defect.max((g0[i][j] - d).abs());
            }
        }
        let mut first_derivative: f64 = 0.0;
        for k in 0..4 {
            let mut p = [0.0; 4];
            p[k] = h;
            let gp = self.metric(&p)?;
            p[k] = -h;
            let gm = self.metric(&p)?;
            for i in 0..4 {
                for j in 0..4 {
                    first_derivative = first_derivative.max(((gp[i][j] - gm[i][j]) / (2.0 * h)).abs());
                }
            }
        }
        Ok(NormalCertificate {
            metric_defect,
            first_derivative,
        })
    }
}

/// Normal coordinates about `basepoint`; the first frame axis follows
/// `direction`, or points toward the cone tip when `None`.
pub fn normal_coordinates(
    field: &ChartMetricField,
    basepoint: &Point,
    radius: f64,
    direction: Option<Point>,
) -> Result<NormalChart> {
    let dist_tip = norm(basepoint);
    let singular = !field.smooth_at(&[0.0; 4]);
    if singular && radius >= dist_tip {
        return Err(invalid(format!(
            "radius {radius} reaches the singular tip at distance {dist_tip}"
        )));
    }
    let g = field.metric(basepoint)?;
    let dir = match direction {
        Some(d) => d,
        None if dist_tip > 0.0 => basepoint.map(|v| -v / dist_tip),
        None => [1.0, 0.0, 0.0, 0.0],
    };
    let frame = orthonormal_frame(&g, &dir)?;
    Ok(NormalChart {
        field: field.clone(),
        base: *basepoint,
        frame,
        radius,
    })
}

/// The metric expressed in normal coordinates at `x`: exact for fields that
/// are homogeneous (flat, round), otherwise the third-order normal-coordinate
/// expansion built from `R` and `∇R` at `x`.
pub fn normal_form(field: &ChartMetricField, x: &Point, direction: Option<Point>) -> Result<ChartMetricField> {
    match field {
        ChartMetricField::Flat | ChartMetricField::Cone(LinkFamily::Round) => Ok(ChartMetricField::Flat),
        ChartMetricField::RoundNormal | ChartMetricField::Cone(LinkFamily::Football) => Ok(ChartMetricField::RoundNormal),
        _ => {
            let snap = curvature_at_analytic(field, x)?;
            let d = match direction {
                Some(d) => d,
                None if norm(x) > 0.0 => x.map(|v| -v / norm(x)),
                None => [1.0, 0.0, 0.0, 0.0],
            };
            let e = orthonormal_frame(&snap.g, &d)?;
            let (riem, nabla) = snap.in_frame(&e);
            Ok(ChartMetricField::Polynomial(Box::new(PolynomialMetric::from_normal_jet(&riem, &nabla))))
        }
    }
}
