//! Dormand–Prince 5(4) with per-step error control.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeTolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        OdeTolerance {
            rel: 1e-12,
            abs: 1e-14,
            max_steps: 100_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = rhs(s, y)` from `s0` to `s1` (either direction).
pub fn integrate<F>(mut rhs: F, s0: f64, s1: f64, y0: &[f64], tol: &OdeTolerance) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    if s1 == s0 {
        return Ok(y);
    }
    let dir = (s1 - s0).signum();
    let span = (s1 - s0).abs();
    let mut s = s0;
    let mut h = span.min(0.05 * span.max(1e-3)).max(span * 1e-3);
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    rhs(s, &y, &mut k[0])?;
    let mut steps = 0;
    while (s1 - s) * dir > 0.0 {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::StepUnderflow(s));
        }
        let rem = (s1 - s).abs();
        if h > rem {
            h = rem;
        }
        let hs = h * dir;
        for st in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for j in 0..st {
                    acc += hs * A[st][j] * k[j][i];
                }
                tmp[i] = acc;
            }
            rhs(s + C[st] * hs, &tmp, &mut k[st])?;
        }
        let mut err: f64 = 0.0;
        let mut y5 = vec![0.0; n];
        for i in 0..n {
            let mut a5 = y[i];
            let mut a4 = y[i];
            for j in 0..7 {
                a5 += hs * B5[j] * k[j][i];
                a4 += hs * B4[j] * k[j][i];
            }
            y5[i] = a5;
            let sc = tol.abs + tol.rel * y[i].abs().max(a5.abs());
            err = err.max(((a5 - a4) / sc).abs());
        }
        if !err.is_finite() {
            h *= 0.25;
        } else if err <= 1.0 {
            s = if h == rem { s1 } else { s + hs };
            y = y5;
            // FSAL: last stage is the derivative at the new point
            let last = k[6].clone();
            k[0] = last;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
        if h < 1e-14 * span.max(s.abs()) {
            return Err(Error::StepUnderflow(s));
        }
    }
    Ok(y)
}
