//! Curvature from finite differences of the metric components.
//!
//! Plain `f64` throughout and no jets, so it shares no code path with
//! [`crate::geometry`] beyond expression evaluation.

use crate::error::{Error, Result};
use crate::jets::{richardson, DEFAULT_STEP};
use crate::metric_dsl::MetricSpec;

/// Dense component arrays, row-major in the same slot order as
/// [`crate::geometry::CurvaturePack`].
#[derive(Debug, Clone)]
pub struct FdCurvature {
    pub dim: usize,
    pub g: Vec<f64>,
    pub gamma: Vec<f64>,
    pub riem_low: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
}

pub fn invert(m: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut a = m.to_vec();
    let mut inv: Vec<f64> = (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[piv * n + col] == 0.0 {
            return Err(Error::DegenerateMetric { det: 0.0, floor: 0.0 });
        }
        for k in 0..n {
            a.swap(piv * n + k, col * n + k);
            inv.swap(piv * n + k, col * n + k);
        }
        let r = 1.0 / a[col * n + col];
        for k in 0..n {
            a[col * n + k] *= r;
            inv[col * n + k] *= r;
        }
        for row in (0..n).filter(|&r| r != col) {
            let f = a[row * n + col];
            for k in 0..n {
                a[row * n + k] -= f * a[col * n + k];
                inv[row * n + k] -= f * inv[col * n + k];
            }
        }
    }
    Ok(inv)
}

pub fn fd_curvature(spec: &MetricSpec, point: &[f64]) -> Result<FdCurvature> {
    fd_curvature_with_step(spec, point, DEFAULT_STEP)
}

pub fn fd_curvature_with_step(spec: &MetricSpec, point: &[f64], step: f64) -> Result<FdCurvature> {
    spec.check_point(point)?;
    let n = spec.dim;
    let params = spec.param_values();
    let mut g = vec![0.0; n * n];
    let mut dg = vec![0.0; n * n * n];
    let mut ddg = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in a..n {
            let e = spec.component(a, b);
            let mut f = |x: &[f64]| e.eval(x, &params);
            let v = f(point)?;
            g[a * n + b] = v;
            g[b * n + a] = v;
            for p in 0..n {
                let mut alpha = vec![0u8; n];
                alpha[p] = 1;
                let d = richardson(&mut f, point, &alpha, step)?;
                dg[(a * n + b) * n + p] = d;
                dg[(b * n + a) * n + p] = d;
                for q in p..n {
                    let mut alpha = vec![0u8; n];
                    alpha[p] += 1;
                    alpha[q] += 1;
                    let d = richardson(&mut f, point, &alpha, step)?;
                    for (i, j) in [(a, b), (b, a)] {
                        ddg[((i * n + j) * n + p) * n + q] = d;
                        ddg[((i * n + j) * n + q) * n + p] = d;
                    }
                }
            }
        }
    }
    let gi = invert(&g, n)?;
    let d1 = |a: usize, b: usize, p: usize| dg[(a * n + b) * n + p];
    let d2 = |a: usize, b: usize, p: usize, q: usize| ddg[((a * n + b) * n + p) * n + q];
    // ∂_e g^cd = −g^cp ∂_e g_pq g^qd
    let mut dgi = vec![0.0; n * n * n];
    for c in 0..n {
        for d in 0..n {
            for e in 0..n {
                let mut s = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        s -= gi[c * n + p] * d1(p, q, e) * gi[q * n + d];
                    }
                }
                dgi[(c * n + d) * n + e] = s;
            }
        }
    }
    let mut gamma = vec![0.0; n * n * n];
    let mut dgamma = vec![0.0; n * n * n * n];
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for d in 0..n {
                    s += 0.5 * gi[c * n + d] * (d1(b, d, a) + d1(a, d, b) - d1(a, b, d));
                }
                gamma[(c * n + a) * n + b] = s;
                for e in 0..n {
                    let mut s = 0.0;
                    for d in 0..n {
                        s += 0.5 * dgi[(c * n + d) * n + e] * (d1(b, d, a) + d1(a, d, b) - d1(a, b, d));
                        s += 0.5
                            * gi[c * n + d]
                            * (d2(b, d, a, e) + d2(a, d, b, e) - d2(a, b, d, e));
                    }
                    dgamma[((c * n + a) * n + b) * n + e] = s;
                }
            }
        }
    }
    let gm = |c: usize, a: usize, b: usize| gamma[(c * n + a) * n + b];
    let dgm = |c: usize, a: usize, b: usize, e: usize| dgamma[((c * n + a) * n + b) * n + e];
    let mut mixed = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut s = dgm(c, b, d, a) - dgm(c, a, d, b);
                    for e in 0..n {
                        s += gm(c, a, e) * gm(e, b, d) - gm(c, b, e) * gm(e, a, d);
                    }
                    mixed[((a * n + b) * n + c) * n + d] = s;
                }
            }
        }
    }
    let mut riem_low = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    riem_low[((a * n + b) * n + c) * n + d] =
                        (0..n).map(|e| g[c * n + e] * mixed[((a * n + b) * n + e) * n + d]).sum();
                }
            }
        }
    }
    let mut ricci = vec![0.0; n * n];
    for b in 0..n {
        for d in 0..n {
            let mut s = 0.0;
            for a in 0..n {
                for c in 0..n {
                    s += gi[a * n + c] * riem_low[((a * n + b) * n + c) * n + d];
                }
            }
            ricci[b * n + d] = s;
        }
    }
    let scalar = (0..n * n).map(|k| gi[k] * ricci[k]).sum();
    Ok(FdCurvature {
        dim: n,
        g,
        gamma,
        riem_low,
        ricci,
        scalar,
    })
}
