//! Empirical Hölder/Lipschitz class of a metric at the chart origin.

use super::link::sample_points;
use super::ChartMetricField;
use crate::constants::Point;
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub order: u32,
    pub radii: Vec<f64>,
    /// Largest `|∂^k g_ij|` seen on the shell of each radius.
    pub sup: Vec<f64>,
    /// Least-squares slope of `log sup` against `log r`.
    pub exponent: f64,
    pub bounded: bool,
}

/// Exponent above which a derivative is read as bounded near the origin.
pub const BOUNDED_EXPONENT: f64 = -0.25;

fn multi_indices(k: u32) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for m in &out {
            let start = m.last().copied().unwrap_or(0);
            for a in start..4 {
                let mut n = m.clone();
                n.push(a);
                next.push(n);
            }
        }
        out = next;
    }
    out
}

/// Iterated central difference `∂_{a₁}…∂_{a_k} f(p)` with step `h`.
fn iterated_difference(f: &dyn Fn(&Point) -> f64, p: &Point, axes: &[usize], h: f64) -> f64 {
    let k = axes.len();
    let mut acc = 0.0;
    for mask in 0..(1u32 << k) {
        let mut q = *p;
        let mut sign = 1.0;
        for (bit, &a) in axes.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                q[a] -= h;
                sign = -sign;
            } else {
                q[a] += h;
            }
        }
        acc += sign * f(&q);
    }
    acc / (2.0 * h).powi(k as i32)
}

/// Probes `∂^k` of a scalar function on shells `|x| = r`, step `r/10`.
pub fn regularity_probe_fn(f: &dyn Fn(&Point) -> f64, order: u32, radii: &[f64]) -> Result<RegularityReport> {
    if order == 0 || order > 4 {
        return Err(invalid("derivative order must be 1..=4"));
    }
    if radii.len() < 2 || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(invalid("need at least two positive radii"));
    }
    let dirs = sample_points(12, 0xdec0de);
    let idx = multi_indices(order);
    let mut sup = Vec::with_capacity(radii.len());
    for &r in radii {
        let h = 0.1 * r;
        let mut m: f64 = 0.0;
        for d in &dirs {
            let p = d.map(|v| v * r);
            for axes in &idx {
                m = m.max(iterated_difference(f, &p, axes, h).abs());
            }
        }
        sup.push(m);
    }
    let top = sup.iter().cloned().fold(0.0f64, f64::max);
    let exponent = if top < 1e-9 {
        0.0
    } else {
        let pts: Vec<(f64, f64)> = radii
            .iter()
            .zip(&sup)
            .map(|(r, s)| (r.ln(), s.max(1e-300).ln()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    Ok(RegularityReport {
        order,
        radii: radii.to_vec(),
        sup,
        exponent,
        bounded: exponent >= BOUNDED_EXPONENT,
    })
}

/// [`regularity_probe_fn`] over all components of a metric field.
pub fn regularity_probe(field: &ChartMetricField, order: u32, radii: &[f64]) -> Result<RegularityReport> {
    let mut worst: Option<RegularityReport> = None;
    for i in 0..4 {
        for j in i..4 {
            let f = |p: &Point| field.eval(p)[i][j];
            let rep = regularity_probe_fn(&f, order, radii)?;
            let top = rep.sup.iter().cloned().fold(0.0f64, f64::max);
            if top < 1e-9 {
                continue;
            }
            worst = Some(match worst {
                Some(w) if w.exponent <= rep.exponent => w,
                _ => rep,
            });
        }
    }
    Ok(worst.unwrap_or(RegularityReport {
        order,
        radii: radii.to_vec(),
        sup: vec![0.0; radii.len()],
        exponent: 0.0,
        bounded: true,
    }))
}
