//! The link flow `ψ_s`, the diffeomorphism `α`, and the first-order gauge
//! identity.

use super::{dot4, LinkFamily, LinkFunction, Mat4};
use crate::constants::{norm, Point};
use crate::error::{invalid, Result};
use crate::ode::{integrate, OdeTolerance};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn check_flow_time(f: &LinkFunction, s: f64) -> Result<()> {
    if s.abs() * f.sup_abs() >= 0.5 {
        return Err(invalid(format!(
            "|s| sup|f| = {} must stay below 1/2",
            s.abs() * f.sup_abs()
        )));
    }
    Ok(())
}

/// `ψ_s(z)` and `dψ_s` at `z` (ambient 4×4, acting on tangent vectors),
/// for the flow of `½∇f`.
pub fn flow_with_jacobian(f: &LinkFunction, s: f64, z: &Point) -> Result<(Point, Mat4)> {
    check_flow_time(f, s)?;
    let h = f.ambient_hessian();
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let z = [y[0], y[1], y[2], y[3]];
        let g = f.ambient_grad(&z);
        let zg = dot4(&z, &g);
        let mut hz = [0.0; 4];
        for i in 0..4 {
            dy[i] = 0.5 * (g[i] - zg * z[i]);
            hz[i] = (0..4).map(|k| z[k] * h[k][i]).sum();
        }
        // DV = ½(H - z (g + Hz)ᵀ - (z·g) I)
        let mut dv = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                dv[i][j] = 0.5 * (h[i][j] - z[i] * (g[j] + hz[j]));
            }
            dv[i][i] -= 0.5 * zg;
        }
        for i in 0..4 {
            for j in 0..4 {
                dy[4 + 4 * i + j] = (0..4).map(|k| dv[i][k] * y[4 + 4 * k + j]).sum();
            }
        }
        Ok(())
    };
    let mut y0 = vec![0.0; 20];
    y0[..4].copy_from_slice(z);
    for i in 0..4 {
        y0[4 + 5 * i] = 1.0;
    }
    let out = integrate(rhs, 0.0, s, &y0, &OdeTolerance::default())?;
    let zs = [out[0], out[1], out[2], out[3]];
    let mut j = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            j[a][b] = out[4 + 4 * a + b];
        }
    }
    Ok((zs, j))
}

/// Images of `points` under `ψ_s`.
pub fn link_flow(f: &LinkFunction, s: f64, points: &[Point]) -> Result<Vec<Point>> {
    points.iter().map(|z| Ok(flow_with_jacobian(f, s, z)?.0)).collect()
}

/// `ḡ = (1 + 2sf) α*(dr² + r²h(r))` at `(s, z)` in the frame
/// `(∂_s, e₁, e₂, e₃)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaSample {
    pub s: f64,
    pub z: Point,
    pub basis: [Point; 3],
    pub g_ss: f64,
    pub g_sv: [f64; 3],
    pub g_vv: [[f64; 3]; 3],
}

/// Orthonormal basis of `T_zS³`.
pub fn tangent_basis(z: &Point) -> [Point; 3] {
    let mut out = Vec::with_capacity(3);
    for i in 0..4 {
        let mut e = [0.0; 4];
        e[i] = 1.0;
        let mut v = e;
        for k in 0..4 {
            v[k] -= e.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() * z[k];
        }
        for b in &out {
            let p = dot4(&v, b);
            for k in 0..4 {
                v[k] -= p * b[k];
            }
        }
        let n = norm(&v);
        if n > 0.3 {
            out.push(v.map(|c| c / n));
        }
        if out.len() == 3 {
            break;
        }
    }
    [out[0], out[1], out[2]]
}

fn bilinear(m: &Mat4, a: &Point, b: &Point) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            acc += m[i][j] * a[i] * b[j];
        }
    }
    acc
}

fn apply(m: &Mat4, v: &Point) -> Point {
    [0, 1, 2, 3].map(|i| (0..4).map(|j| m[i][j] * v[j]).sum())
}

pub fn alpha_pullback(f: &LinkFunction, family: &LinkFamily, s: f64, z: &Point) -> Result<AlphaSample> {
    let (pz, dpsi) = flow_with_jacobian(f, s, z)?;
    let fz = f.value(z);
    let grad_z = f.gradient(z);
    let grad_pz = f.gradient(&pz);
    let a1 = s - 0.5 * s * s * fz;
    let h = family.tensor(a1, &pz);
    let basis = tangent_basis(z);
    // dα(∂_s) = (1 - sf, ½∇f(ψz)); dα(v) = (-½s² df(v), dψ v)
    let rad: Vec<f64> = std::iter::once(1.0 - s * fz)
        .chain(basis.iter().map(|v| -0.5 * s * s * dot4(&grad_z, v)))
        .collect();
    let tan: Vec<Point> = std::iter::once(grad_pz.map(|c| 0.5 * c))
        .chain(basis.iter().map(|v| apply(&dpsi, v)))
        .collect();
    let conf = 1.0 + 2.0 * s * fz;
    let g = |a: usize, b: usize| conf * (rad[a] * rad[b] + a1 * a1 * bilinear(&h, &tan[a], &tan[b]));
    let mut g_vv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g_vv[i][j] = g(i + 1, j + 1);
        }
    }
    Ok(AlphaSample {
        s,
        z: *z,
        basis,
        g_ss: g(0, 0),
        g_sv: [g(0, 1), g(0, 2), g(0, 3)],
        g_vv,
    })
}

/// `ι_s*H` on `basis`: `(1 + 2sf)(s²/4 df⊗df + (1 - sf/2)² h(α¹)(dψ·, dψ·))`,
/// which equals `s⁻²` times the tangential block of [`alpha_pullback`].
pub fn iota_h(f: &LinkFunction, family: &LinkFamily, s: f64, z: &Point, basis: &[Point; 3]) -> Result<[[f64; 3]; 3]> {
    let (pz, dpsi) = flow_with_jacobian(f, s, z)?;
    let fz = f.value(z);
    let grad = f.gradient(z);
    let a1 = s - 0.5 * s * s * fz;
    let h = family.tensor(a1, &pz);
    let conf = 1.0 + 2.0 * s * fz;
    let k = (1.0 - 0.5 * s * fz).powi(2);
    let pushed: Vec<Point> = basis.iter().map(|v| apply(&dpsi, v)).collect();
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let df = dot4(&grad, &basis[i]) * dot4(&grad, &basis[j]);
            out[i][j] = conf * (0.25 * s * s * df + k * bilinear(&h, &pushed[i], &pushed[j]));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeSample {
    pub z: Point,
    pub fd_derivative: [[f64; 3]; 3],
    pub predicted: [[f64; 3]; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeCheck {
    pub h: f64,
    pub samples: Vec<GaugeSample>,
    /// Largest Frobenius norm of `fd - predicted`.
    pub residual: f64,
    /// Largest Frobenius norm of the finite-difference derivative itself.
    pub derivative_norm: f64,
}

/// Deterministic sample points on `S³`.
pub fn sample_points(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p: Point = [0; 4].map(|_| rng.random_range(-1.0..1.0));
        let r = norm(&p);
        if r > 0.2 && r <= 1.0 {
            out.push(p.map(|v| v / r));
        }
    }
    out
}

fn frob3(a: &[[f64; 3]; 3]) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Compares `d/ds ι_s*H` at `s = 0` (one-sided second-order differences)
/// with `h'(0) + ∇²f + f h₀` at deterministic points of the link.
pub fn verify_first_order_identity(f: &LinkFunction, family: &LinkFamily, h_fd: f64) -> Result<GaugeCheck> {
    if !(h_fd > 0.0) {
        return Err(invalid("finite-difference step must be positive"));
    }
    check_flow_time(f, 2.0 * h_fd)?;
    let mut samples = Vec::new();
    let mut residual: f64 = 0.0;
    let mut derivative_norm: f64 = 0.0;
    for z in sample_points(16, 0x5eed) {
        let basis = tangent_basis(&z);
        let h0 = iota_h(f, family, 0.0, &z, &basis)?;
        let h1 = iota_h(f, family, h_fd, &z, &basis)?;
        let h2 = iota_h(f, family, 2.0 * h_fd, &z, &basis)?;
        let dh = family.derivative_at_zero(&z);
        let hess = f.hessian(&z);
        let fz = f.value(&z);
        let mut fd = [[0.0; 3]; 3];
        let mut pred = [[0.0; 3]; 3];
        let mut diff = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                fd[i][j] = (-3.0 * h0[i][j] + 4.0 * h1[i][j] - h2[i][j]) / (2.0 * h_fd);
                let id = dot4(&basis[i], &basis[j]);
                pred[i][j] = bilinear(&dh, &basis[i], &basis[j]) + bilinear(&hess, &basis[i], &basis[j]) + fz * id;
                diff[i][j] = fd[i][j] - pred[i][j];
            }
        }
        residual = residual.max(frob3(&diff));
        derivative_norm = derivative_norm.max(frob3(&fd));
        samples.push(GaugeSample {
            z,
            fd_derivative: fd,
            predicted: pred,
        });
    }
    Ok(GaugeCheck {
        h: h_fd,
        samples,
        residual,
        derivative_norm,
    })
}
