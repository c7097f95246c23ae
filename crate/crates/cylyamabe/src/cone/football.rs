//! The suspension of ℝP³: `ds² + sin²s h_{ℝP³}` on `[0, π]`, a closed
//! orbifold with two ℤ₂-conical points, the quotient of the round 𝕊⁴ by the
//! antipodal map of its equatorial ℝ⁴.

use super::{ChartMetricField, ConeMetric, Link, LinkFamily};
use crate::constants::{norm, Point};
use crate::error::{invalid, Result};
use crate::quadrature::{integrate_axis, Axis, QuadratureSpec};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pole {
    North,
    South,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Football {
    /// Radius of the conical chart about each pole.
    pub delta: f64,
    pub cone: ConeMetric,
    /// Lift of the chart through the double cover (round normal coordinates).
    pub lifted: ChartMetricField,
}

pub fn football_metric(delta: f64) -> Result<Football> {
    if !(delta > 0.0 && delta < PI / 4.0) {
        return Err(invalid(format!("delta = {delta} must lie in (0, π/4)")));
    }
    Ok(Football {
        delta,
        cone: ConeMetric::new(Link::ProjectiveSpace, LinkFamily::Football, PI)?,
        lifted: ChartMetricField::RoundNormal,
    })
}

impl Football {
    pub fn scalar_curvature(&self) -> f64 {
        12.0
    }

    /// Volume `Vol(ℝP³) ∫₀^π sin³s ds`, by quadrature.
    pub fn volume(&self) -> Result<f64> {
        let link = PI * PI;
        let r = integrate_axis(|s| s.sin().powi(3), &Axis::finite(0.0, PI), &QuadratureSpec::default());
        Ok(link * r.into_result()?)
    }

    /// `σ_P`: a point of the lifted chart about `pole` to its cone
    /// coordinates `(s, [y])`, with `y` the representative whose first
    /// nonzero entry is positive.
    pub fn sigma_p(&self, pole: Pole, x: &Point) -> (f64, Point) {
        let r = norm(x);
        if r == 0.0 {
            return (self.pole_s(pole), [1.0, 0.0, 0.0, 0.0]);
        }
        let mut y = x.map(|v| v / r);
        if let Some(first) = y.iter().find(|v| v.abs() > 1e-15) {
            if *first < 0.0 {
                y = y.map(|v| -v);
            }
        }
        let s = match pole {
            Pole::North => r,
            Pole::South => PI - r,
        };
        (s, y)
    }

    fn pole_s(&self, pole: Pole) -> f64 {
        match pole {
            Pole::North => 0.0,
            Pole::South => PI,
        }
    }

    /// The lifted chart point as a point of the unit 𝕊⁴ ⊂ ℝ⁵.
    pub fn embed(&self, pole: Pole, x: &Point) -> [f64; 5] {
        let r = norm(x);
        let c = if r == 0.0 { 1.0 } else { r.sin() / r };
        let sgn = if pole == Pole::North { 1.0 } else { -1.0 };
        [sgn * r.cos(), c * x[0], c * x[1], c * x[2], c * x[3]]
    }

    /// Geodesic distance on 𝕊⁴ between lifted points.
    pub fn lifted_distance(a: &[f64; 5], b: &[f64; 5]) -> f64 {
        let d: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
        d.clamp(-1.0, 1.0).acos()
    }
}
