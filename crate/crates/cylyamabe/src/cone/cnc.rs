//! Conformal normal coordinates to third order.

use super::curvature::{curvature_at, CurvatureSnapshot, Tensor3};
use super::normal::normal_form;
use super::{ChartMetricField, Mat4};
use crate::constants::Point;
use crate::error::{invalid, Result};
use crate::real::Real;
use serde::{Deserialize, Serialize};

/// Smooth cutoff equal to one on `|z| ≤ t/4` and zero on `|z| ≥ t/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub t: f64,
}

impl Cutoff {
    /// A cutoff that never switches off.
    pub fn none() -> Self {
        Cutoff { t: f64::INFINITY }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r)
    }

    pub fn eval<T: Real>(&self, r: T) -> T {
        let q = self.t / 4.0;
        if !(r.value() > q) {
            return T::cst(1.0);
        }
        if r.value() >= 2.0 * q {
            return T::cst(0.0);
        }
        let u = (r - q) / q;
        let u3 = u * u * u;
        // 1 - (10u³ - 15u⁴ + 6u⁵)
        -(u3 * (u * (u * 6.0 - 15.0) + 10.0)) + 1.0
    }
}

/// `f(z) = φ_t(|z|) (zᵀQz + C_ijk z^i z^j z^k)` about `basepoint`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CncFactor {
    pub basepoint: Point,
    /// Symmetric.
    pub quadratic: Mat4,
    /// Fully symmetric.
    pub cubic: Tensor3,
    pub cutoff: Cutoff,
}

impl CncFactor {
    pub fn eval<T: Real>(&self, x: &[T; 4]) -> T {
        let z: [T; 4] = [0, 1, 2, 3].map(|i| x[i] - self.basepoint[i]);
        let mut acc = T::cst(0.0);
        for i in 0..4 {
            for j in 0..4 {
                let zz = z[i] * z[j];
                let mut inner = T::cst(self.quadratic[i][j]);
                for k in 0..4 {
                    inner = inner + z[k] * self.cubic[i][j][k];
                }
                acc = acc + zz * inner;
            }
        }
        if self.cutoff.t.is_finite() {
            let r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2] + z[3] * z[3];
            if r2.value() > 0.0 {
                acc = acc * self.cutoff.eval(r2.sqrt());
            }
        }
        acc
    }

    pub fn value(&self, x: &Point) -> f64 {
        self.eval(x)
    }
}

/// The conformal factor exponent that kills `R`, `∇R` and the symmetrized
/// `∇Ric` at the origin of a normal chart, read off from a curvature snapshot
/// taken there. `t` is the cutoff scale.
///
/// Monomial coefficients:
/// `(z^i)²`: `(2Ric_ii - R/3)/4`; `z^i z^j` (i<j): `Ric_ij`;
/// `(z^i)³`: `(∂_iRic_ii - ∂_iR/6)/6`;
/// `(z^i)² z^k`: `(∂_kRic_ii + 2∂_iRic_ik - ∂_kR/6)/6`;
/// `z^i z^j z^k` (distinct): `(∂_kRic_ij + ∂_iRic_kj + ∂_jRic_ik)/3`.
pub fn cnc_polynomial(snapshot: &CurvatureSnapshot, t: f64) -> Result<CncFactor> {
    if !(t > 0.0) {
        return Err(invalid("cutoff scale must be positive"));
    }
    let ric = &snapshot.ric;
    let r = snapshot.r;
    let d = &snapshot.dric;
    let dr = &snapshot.dr;
    let mut q = [[0.0; 4]; 4];
    for i in 0..4 {
        q[i][i] = 0.25 * (2.0 * ric[i][i] - r / 3.0);
        for j in 0..4 {
            if i != j {
                q[i][j] = 0.5 * ric[i][j];
            }
        }
    }
    let mut c = [[[0.0; 4]; 4]; 4];
    for i in 0..4 {
        c[i][i][i] = (d[i][i][i] - dr[i] / 6.0) / 6.0;
        for k in 0..4 {
            if k == i {
                continue;
            }
            let coef = (d[k][i][i] + 2.0 * d[i][i][k] - dr[k] / 6.0) / 6.0;
            for (a, b, e) in [(i, i, k), (i, k, i), (k, i, i)] {
                c[a][b][e] = coef / 3.0;
            }
            for j in 0..4 {
                if j == i || j == k || !(i < j && j < k) {
                    continue;
                }
                let coef = (d[k][i][j] + d[i][k][j] + d[j][i][k]) / 3.0;
                for (a, b, e) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                    c[a][b][e] = coef / 6.0;
                }
            }
        }
    }
    Ok(CncFactor {
        basepoint: snapshot.x,
        quadratic: q,
        cubic: c,
        cutoff: Cutoff { t },
    })
}

/// Curvature left at the origin after the conformal change.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CncResiduals {
    pub h: f64,
    pub r: f64,
    pub dr: f64,
    /// Largest `|∂_kRic_ij + ∂_iRic_jk + ∂_jRic_ki|`.
    pub sym_dric: f64,
    /// Largest `|Ric_ij|` (not required to vanish).
    pub ric: f64,
    pub factor: CncFactor,
}

impl CncResiduals {
    pub fn max(&self) -> f64 {
        self.r.abs().max(self.dr).max(self.sym_dric)
    }
}

pub(crate) fn residuals_of(snap: &CurvatureSnapshot, h: f64, factor: CncFactor) -> CncResiduals {
    let mut sym: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let s = snap.dric[k][i][j] + snap.dric[i][j][k] + snap.dric[j][k][i];
                sym = sym.max(s.abs());
            }
        }
    }
    CncResiduals {
        h,
        r: snap.r,
        dr: snap.dr.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        sym_dric: sym,
        ric: snap.ric.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())),
        factor,
    }
}

/// Pass to normal coordinates at `basepoint`, apply the cubic conformal
/// factor and measure what is left by finite differences of step `h_fd`.
/// The first normal axis points toward the chart origin (the cone tip).
pub fn verify_cnc(field: &ChartMetricField, basepoint: &Point, h_fd: f64) -> Result<CncResiduals> {
    verify_cnc_along(field, basepoint, None, h_fd)
}

pub fn verify_cnc_along(
    field: &ChartMetricField,
    basepoint: &Point,
    direction: Option<Point>,
    h_fd: f64,
) -> Result<CncResiduals> {
    if !(h_fd > 0.0) {
        return Err(invalid("finite-difference step must be positive"));
    }
    let dist = crate::constants::norm(basepoint);
    let singular = !field.smooth_at(&[0.0; 4]);
    if singular && dist <= 8.0 * h_fd {
        return Err(invalid(format!("basepoint {basepoint:?} too close to the tip")));
    }
    let t = if singular { dist } else { f64::INFINITY };
    let gn = normal_form(field, basepoint, direction)?;
    let origin = [0.0; 4];
    let snap_n = curvature_at(&gn, &origin, h_fd)?;
    let factor = cnc_polynomial(&snap_n, t)?;
    let corrected = ChartMetricField::Conformal(Box::new(gn), Box::new(factor.clone()));
    let snap = curvature_at(&corrected, &origin, h_fd)?;
    Ok(residuals_of(&snap, h_fd, factor))
}
