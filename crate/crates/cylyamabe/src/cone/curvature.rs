//! Christoffel symbols, Riemann, Ricci, scalar and Weyl curvature from a
//! third-order metric jet.
//!
//! Conventions: `Γ^a_bc = ½g^ad(∂_b g_dc + ∂_c g_db - ∂_d g_bc)`,
//! `R^a_bcd = ∂_cΓ^a_db - ∂_dΓ^a_cb + Γ^a_ceΓ^e_db - Γ^a_deΓ^e_cb`,
//! `R_abcd = g_ae R^e_bcd`, `Ric_bd = R^a_bad`. The unit sphere has
//! `R_abcd = g_ac g_bd - g_ad g_bc`.
//!
//! The algebra is generic: run on [`Dual<4>`] numbers whose derivative parts
//! carry the next order of the jet, it returns curvature together with its
//! first coordinate derivatives.

use super::{ChartMetricField, Mat4, MatT};
use crate::constants::Point;
use crate::error::{Error, Result};
use crate::real::{Dual, Jet3, Real};
use serde::{Deserialize, Serialize};

pub type Tensor3 = [[[f64; 4]; 4]; 4];
pub type Tensor4 = [[[[f64; 4]; 4]; 4]; 4];
pub type Tensor5 = [[[[[f64; 4]; 4]; 4]; 4]; 4];

/// `g`, `∂_k g`, `∂_k∂_l g`, `∂_k∂_l∂_m g` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricJet {
    pub g: Mat4,
    pub dg: [Mat4; 4],
    pub d2g: [[Mat4; 4]; 4],
    pub d3g: [[[Mat4; 4]; 4]; 4],
}

impl MetricJet {
    /// Exact jet by third-order Taylor arithmetic.
    pub fn analytic(field: &ChartMetricField, x: &Point) -> Result<MetricJet> {
        if !field.smooth_at(x) {
            return Err(Error::ChartBreakdown(format!("no jet at singular point {x:?}")));
        }
        let m = field.eval(&Jet3::point(x));
        let mut jet = MetricJet::zero();
        for i in 0..4 {
            for j in 0..4 {
                let e = &m[i][j];
                jet.g[i][j] = e.value();
                for k in 0..4 {
                    jet.dg[k][i][j] = e.d1(k);
                    for l in 0..4 {
                        jet.d2g[k][l][i][j] = e.d2(k, l);
                        for n in 0..4 {
                            jet.d3g[k][l][n][i][j] = e.d3(k, l, n);
                        }
                    }
                }
            }
        }
        Ok(jet)
    }

    /// Nested second-order central differences with step `h`.
    pub fn finite_difference(field: &ChartMetricField, x: &Point, h: f64) -> Result<MetricJet> {
        let ev = |p: &Point| field.metric(p);
        let shift = |p: &Point, k: usize, s: f64| {
            let mut q = *p;
            q[k] += s;
            q
        };
        let second = |p: &Point| -> Result<[[Mat4; 4]; 4]> {
            let g0 = ev(p)?;
            let mut out = [[[[0.0; 4]; 4]; 4]; 4];
            for k in 0..4 {
                for l in k..4 {
                    let d = if k == l {
                        let a = ev(&shift(p, k, h))?;
                        let b = ev(&shift(p, k, -h))?;
                        combine(&[(&a, 1.0), (&g0, -2.0), (&b, 1.0)], 1.0 / (h * h))
                    } else {
                        let pp = ev(&shift(&shift(p, k, h), l, h))?;
                        let pm = ev(&shift(&shift(p, k, h), l, -h))?;
                        let mp = ev(&shift(&shift(p, k, -h), l, h))?;
                        let mm = ev(&shift(&shift(p, k, -h), l, -h))?;
                        combine(&[(&pp, 1.0), (&pm, -1.0), (&mp, -1.0), (&mm, 1.0)], 1.0 / (4.0 * h * h))
                    };
                    out[k][l] = d;
                    out[l][k] = d;
                }
            }
            Ok(out)
        };
        let mut jet = MetricJet::zero();
        jet.g = ev(x)?;
        for k in 0..4 {
            let a = ev(&shift(x, k, h))?;
            let b = ev(&shift(x, k, -h))?;
            jet.dg[k] = combine(&[(&a, 1.0), (&b, -1.0)], 0.5 / h);
        }
        jet.d2g = second(x)?;
        for n in 0..4 {
            let a = second(&shift(x, n, h))?;
            let b = second(&shift(x, n, -h))?;
            for k in 0..4 {
                for l in 0..4 {
                    jet.d3g[k][l][n] = combine(&[(&a[k][l], 1.0), (&b[k][l], -1.0)], 0.5 / h);
                }
            }
        }
        // symmetrize the third derivative over its three slots
        let raw = jet.d3g;
        for k in 0..4 {
            for l in 0..4 {
                for n in 0..4 {
                    let perms = [
                        raw[k][l][n],
                        raw[k][n][l],
                        raw[l][k][n],
                        raw[l][n][k],
                        raw[n][k][l],
                        raw[n][l][k],
                    ];
                    let mut avg = [[0.0; 4]; 4];
                    for p in &perms {
                        for i in 0..4 {
                            for j in 0..4 {
                                avg[i][j] += p[i][j] / 6.0;
                            }
                        }
                    }
                    jet.d3g[k][l][n] = avg;
                }
            }
        }
        Ok(jet)
    }

    fn zero() -> MetricJet {
        MetricJet {
            g: [[0.0; 4]; 4],
            dg: [[[0.0; 4]; 4]; 4],
            d2g: [[[[0.0; 4]; 4]; 4]; 4],
            d3g: [[[[[0.0; 4]; 4]; 4]; 4]; 4],
        }
    }
}

fn combine(terms: &[(&Mat4, f64)], scale: f64) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (m, c) in terms {
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] += c * m[i][j];
            }
        }
    }
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    out
}

/// Inverse of a symmetric positive-definite matrix by Gauss–Jordan without
/// pivoting.
pub(crate) fn inverse<T: Real>(m: &MatT<T>) -> MatT<T> {
    let mut a = *m;
    let mut inv = super::identity::<T>();
    for c in 0..4 {
        let p = a[c][c].recip();
        for j in 0..4 {
            a[c][j] = a[c][j] * p;
            inv[c][j] = inv[c][j] * p;
        }
        for r in 0..4 {
            if r != c {
                let f = a[r][c];
                for j in 0..4 {
                    a[r][j] = a[r][j] - f * a[c][j];
                    inv[r][j] = inv[r][j] - f * inv[c][j];
                }
            }
        }
    }
    inv
}

pub(crate) struct Curvature<T> {
    pub gamma: [[[T; 4]; 4]; 4],
    pub riem: [[[[T; 4]; 4]; 4]; 4],
    pub ric: MatT<T>,
    pub r: T,
}

/// Curvature from `(g, ∂g, ∂²g)`.
pub(crate) fn curvature_from<T: Real>(g: &MatT<T>, dg: &[MatT<T>; 4], d2g: &[[MatT<T>; 4]; 4]) -> Curvature<T> {
    let z = T::cst(0.0);
    let ginv = inverse(g);
    // Γ_e,db lowered, and its derivative ∂_c Γ_e,db
    let mut low = [[[z; 4]; 4]; 4];
    let mut dlow = [[[[z; 4]; 4]; 4]; 4];
    for e in 0..4 {
        for d in 0..4 {
            for b in 0..4 {
                low[e][d][b] = (dg[d][e][b] + dg[b][e][d] - dg[e][d][b]) * 0.5;
                for c in 0..4 {
                    dlow[c][e][d][b] = (d2g[c][d][e][b] + d2g[c][b][e][d] - d2g[c][e][d][b]) * 0.5;
                }
            }
        }
    }
    let mut gamma = [[[z; 4]; 4]; 4];
    for a in 0..4 {
        for d in 0..4 {
            for b in 0..4 {
                let mut acc = z;
                for e in 0..4 {
                    acc = acc + ginv[a][e] * low[e][d][b];
                }
                gamma[a][d][b] = acc;
            }
        }
    }
    // ∂_c g^{ae} = -g^{ap} ∂_c g_pq g^{qe}
    let mut dginv = [[[z; 4]; 4]; 4];
    for c in 0..4 {
        let mut tmp = [[z; 4]; 4];
        for a in 0..4 {
            for q in 0..4 {
                let mut acc = z;
                for p in 0..4 {
                    acc = acc + ginv[a][p] * dg[c][p][q];
                }
                tmp[a][q] = acc;
            }
        }
        for a in 0..4 {
            for e in 0..4 {
                let mut acc = z;
                for q in 0..4 {
                    acc = acc + tmp[a][q] * ginv[q][e];
                }
                dginv[c][a][e] = -acc;
            }
        }
    }
    // ∂_c Γ^a_db
    let mut dgamma = [[[[z; 4]; 4]; 4]; 4];
    for c in 0..4 {
        for a in 0..4 {
            for d in 0..4 {
                for b in 0..4 {
                    let mut acc = z;
                    for e in 0..4 {
                        acc = acc + dginv[c][a][e] * low[e][d][b] + ginv[a][e] * dlow[c][e][d][b];
                    }
                    dgamma[c][a][d][b] = acc;
                }
            }
        }
    }
    let mut up = [[[[z; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if c == d {
                        continue;
                    }
                    let mut acc = dgamma[c][a][d][b] - dgamma[d][a][c][b];
                    for e in 0..4 {
                        acc = acc + gamma[a][c][e] * gamma[e][d][b] - gamma[a][d][e] * gamma[e][c][b];
                    }
                    up[a][b][c][d] = acc;
                }
            }
        }
    }
    let mut riem = [[[[z; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut acc = z;
                    for e in 0..4 {
                        acc = acc + g[a][e] * up[e][b][c][d];
                    }
                    riem[a][b][c][d] = acc;
                }
            }
        }
    }
    let mut ric = [[z; 4]; 4];
    for b in 0..4 {
        for d in 0..4 {
            let mut acc = z;
            for a in 0..4 {
                acc = acc + up[a][b][a][d];
            }
            ric[b][d] = acc;
        }
    }
    let mut r = z;
    for b in 0..4 {
        for d in 0..4 {
            r = r + ginv[b][d] * ric[b][d];
        }
    }
    Curvature {
        gamma,
        riem,
        ric,
        r,
    }
}

/// Pointwise curvature with first derivatives, in chart coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSnapshot {
    pub x: Point,
    pub g: Mat4,
    pub r: f64,
    pub ric: Mat4,
    pub dr: [f64; 4],
    /// `dric[k][i][j] = ∂_k Ric_ij`.
    pub dric: [Mat4; 4],
    pub weyl: Tensor4,
    pub riemann: Tensor4,
    /// `∇_m R_abcd` stored as `[m][a][b][c][d]`.
    pub nabla_riemann: Tensor5,
    pub christoffel: Tensor3,
}

impl CurvatureSnapshot {
    pub fn from_jet(x: Point, jet: &MetricJet) -> CurvatureSnapshot {
        let lift = |v: f64, d: [f64; 4]| Dual::<4> { v, d };
        let mut g = [[Dual::<4>::cst(0.0); 4]; 4];
        let mut dg = [[[Dual::<4>::cst(0.0); 4]; 4]; 4];
        let mut d2g = [[[[Dual::<4>::cst(0.0); 4]; 4]; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                g[i][j] = lift(jet.g[i][j], [0, 1, 2, 3].map(|m| jet.dg[m][i][j]));
                for k in 0..4 {
                    dg[k][i][j] = lift(jet.dg[k][i][j], [0, 1, 2, 3].map(|m| jet.d2g[k][m][i][j]));
                    for l in 0..4 {
                        d2g[k][l][i][j] = lift(jet.d2g[k][l][i][j], [0, 1, 2, 3].map(|m| jet.d3g[k][l][m][i][j]));
                    }
                }
            }
        }
        let c = curvature_from(&g, &dg, &d2g);
        let mut riemann = [[[[0.0; 4]; 4]; 4]; 4];
        let mut d_riem = [[[[[0.0; 4]; 4]; 4]; 4]; 4];
        let mut christoffel = [[[0.0; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                christoffel[a][b] = c.gamma[a][b].map(|v| v.v);
                for cc in 0..4 {
                    for d in 0..4 {
                        let v = c.riem[a][b][cc][d];
                        riemann[a][b][cc][d] = v.v;
                        for m in 0..4 {
                            d_riem[m][a][b][cc][d] = v.d[m];
                        }
                    }
                }
            }
        }
        // ∇_m R_abcd = ∂_m R_abcd - Γ^e_ma R_ebcd - Γ^e_mb R_aecd - Γ^e_mc R_abed - Γ^e_md R_abce
        let gm = &christoffel;
        let mut nabla = d_riem;
        for m in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    for cc in 0..4 {
                        for d in 0..4 {
                            let mut acc = 0.0;
                            for e in 0..4 {
                                acc += gm[e][m][a] * riemann[e][b][cc][d]
                                    + gm[e][m][b] * riemann[a][e][cc][d]
                                    + gm[e][m][cc] * riemann[a][b][e][d]
                                    + gm[e][m][d] * riemann[a][b][cc][e];
                            }
                            nabla[m][a][b][cc][d] -= acc;
                        }
                    }
                }
            }
        }
        let ric = c.ric.map(|r| r.map(|v| v.v));
        let mut dric = [[[0.0; 4]; 4]; 4];
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    dric[k][i][j] = c.ric[i][j].d[k];
                }
            }
        }
        let r = c.r.v;
        let dr = c.r.d;
        let gv = jet.g;
        let mut weyl = [[[[0.0; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for cc in 0..4 {
                    for d in 0..4 {
                        weyl[a][b][cc][d] = riemann[a][b][cc][d]
                            - 0.5
                                * (ric[a][cc] * gv[b][d] - ric[a][d] * gv[b][cc] + ric[b][d] * gv[a][cc]
                                    - ric[b][cc] * gv[a][d])
                            + r / 6.0 * (gv[a][cc] * gv[b][d] - gv[a][d] * gv[b][cc]);
                    }
                }
            }
        }
        CurvatureSnapshot {
            x,
            g: gv,
            r,
            ric,
            dr,
            dric,
            weyl,
            riemann,
            nabla_riemann: nabla,
            christoffel,
        }
    }

    /// Largest `|g^ac W_abcd|` over all index pairs.
    pub fn weyl_trace_defect(&self) -> f64 {
        let gi = inverse(&self.g);
        let mut worst: f64 = 0.0;
        for b in 0..4 {
            for d in 0..4 {
                let mut acc = 0.0;
                for a in 0..4 {
                    for c in 0..4 {
                        acc += gi[a][c] * self.weyl[a][b][c][d];
                    }
                }
                worst = worst.max(acc.abs());
            }
        }
        worst
    }

    /// Largest `|R_abcd + R_acdb + R_adbc|`.
    pub fn bianchi_defect(&self) -> f64 {
        let r = &self.riemann;
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        worst = worst.max((r[a][b][c][d] + r[a][c][d][b] + r[a][d][b][c]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest `|Ric_ij - Ric_ji|`.
    pub fn ricci_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.ric[i][j] - self.ric[j][i]).abs());
            }
        }
        worst
    }

    /// Curvature and its covariant derivative in the frame `e` (columns
    /// `e[·][i]` are the frame vectors): `(R_ijkl, ∇_m R_ijkl)`.
    pub fn in_frame(&self, e: &Mat4) -> (Tensor4, Tensor5) {
        let riem = frame4(&self.riemann, e);
        let mut partial = [[[[[0.0; 4]; 4]; 4]; 4]; 4];
        for m in 0..4 {
            partial[m] = frame4(&self.nabla_riemann[m], e);
        }
        let mut nab = [[[[[0.0; 4]; 4]; 4]; 4]; 4];
        for (m, out) in nab.iter_mut().enumerate() {
            for (p, t) in partial.iter().enumerate() {
                let w = e[p][m];
                if w == 0.0 {
                    continue;
                }
                for a in 0..4 {
                    for b in 0..4 {
                        for c in 0..4 {
                            for d in 0..4 {
                                out[a][b][c][d] += w * t[a][b][c][d];
                            }
                        }
                    }
                }
            }
        }
        (riem, nab)
    }
}

fn frame4(src: &Tensor4, e: &Mat4) -> Tensor4 {
    let mut out = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let mut acc = 0.0;
                    for a in 0..4 {
                        for b in 0..4 {
                            for c in 0..4 {
                                for d in 0..4 {
                                    acc += e[a][i] * e[b][j] * e[c][k] * e[d][l] * src[a][b][c][d];
                                }
                            }
                        }
                    }
                    out[i][j][k][l] = acc;
                }
            }
        }
    }
    out
}

/// Curvature by centered differences of the metric with step `h_fd`.
pub fn curvature_at(field: &ChartMetricField, x: &Point, h_fd: f64) -> Result<CurvatureSnapshot> {
    if !(h_fd > 0.0) {
        return Err(crate::error::invalid("difference step must be positive"));
    }
    let jet = MetricJet::finite_difference(field, x, h_fd)?;
    Ok(CurvatureSnapshot::from_jet(*x, &jet))
}

/// Curvature from the exact third-order jet of a closed-form field.
pub fn curvature_at_analytic(field: &ChartMetricField, x: &Point) -> Result<CurvatureSnapshot> {
    let jet = MetricJet::analytic(field, x)?;
    Ok(CurvatureSnapshot::from_jet(*x, &jet))
}
