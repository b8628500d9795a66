use super::spec::MetricSpec;
use crate::error::{Error, Result};
use crate::jets::{Jet, JetSpace};
use crate::scalar::Scalar;
use crate::tensor::{ComponentTensor, Variance};

/// Relative floor on `|det g|`, scaled by `max|g_ab|^dim`.
pub const NONDEGENERACY_FLOOR: f64 = 1e-12;

/// The metric and its inverse at one chart point, as values and as jets.
#[derive(Debug, Clone)]
pub struct MetricAtPoint<T: Scalar> {
    pub point: Vec<T>,
    pub g: ComponentTensor<T>,
    pub g_inv: ComponentTensor<T>,
    pub g_jet: ComponentTensor<Jet<T>>,
    pub g_inv_jet: ComponentTensor<Jet<T>>,
    pub det: T,
    /// Counts of positive and negative eigenvalues.
    pub signature: (usize, usize),
}

impl<T: Scalar> MetricAtPoint<T> {
    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn order(&self) -> usize {
        self.g_jet.order()
    }

    pub fn space(&self) -> JetSpace<T> {
        self.g_jet.entries()[0].space()
    }
}

/// Inverts a symmetric jet-valued matrix by Gauss–Jordan elimination with
/// partial pivoting on the values. Returns the inverse and the determinant
/// of the values.
pub fn invert_jet_matrix<T: Scalar>(m: &[Jet<T>], n: usize) -> Result<(Vec<Jet<T>>, T)> {
    let space = m[0].space();
    let mut a: Vec<Jet<T>> = m.to_vec();
    let mut inv: Vec<Jet<T>> = (0..n * n)
        .map(|k| space.constant(if k / n == k % n { T::one() } else { T::zero() }))
        .collect();
    let mut det = T::one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .value()
                    .abs()
                    .partial_cmp(&a[j * n + col].value().abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        let pv = a[piv * n + col].value();
        if pv == T::zero() || !pv.is_finite() {
            return Err(Error::DegenerateMetric {
                det: 0.0,
                floor: 0.0,
            });
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
                inv.swap(piv * n + k, col * n + k);
            }
            det = -det;
        }
        det *= pv;
        let r = a[col * n + col].recip()?;
        for k in 0..n {
            a[col * n + k] = &a[col * n + k] * &r;
            inv[col * n + k] = &inv[col * n + k] * &r;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row * n + col].clone();
            if f.max_abs_coeff() == T::zero() {
                continue;
            }
            for k in 0..n {
                a[row * n + k] = &a[row * n + k] - &(&f * &a[col * n + k]);
                inv[row * n + k] = &inv[row * n + k] - &(&f * &inv[col * n + k]);
            }
        }
    }
    // symmetrise away elimination roundoff
    for i in 0..n {
        for j in i + 1..n {
            let s = (&inv[i * n + j] + &inv[j * n + i]).scale(T::lit(0.5));
            inv[i * n + j] = s.clone();
            inv[j * n + i] = s;
        }
    }
    Ok((inv, det))
}

/// Counts of positive and negative eigenvalues of a symmetric matrix
/// (cyclic Jacobi rotations).
pub fn inertia(g: &[f64], n: usize) -> (usize, usize) {
    let mut a = g.to_vec();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let tol = 1e-12 * scale;
    let pos = (0..n).filter(|&i| a[i * n + i] > tol).count();
    let neg = (0..n).filter(|&i| a[i * n + i] < -tol).count();
    (pos, neg)
}

/// Evaluates every metric component as a jet of the given order at `point`.
pub fn evaluate_metric_jet<T: Scalar>(
    spec: &MetricSpec,
    point: &[T],
    order: usize,
) -> Result<MetricAtPoint<T>> {
    let p64: Vec<f64> = point.iter().map(|x| x.as_f64()).collect();
    spec.check_point(&p64)?;
    let n = spec.dim;
    let space = JetSpace::new(point, order);
    let params = spec.param_values();
    let mut jets: Vec<Option<Jet<T>>> = vec![None; n * n];
    for a in 0..n {
        for b in a..n {
            let j = spec.component(a, b).eval_jet(&space, &params)?;
            jets[a * n + b] = Some(j.clone());
            jets[b * n + a] = Some(j);
        }
    }
    let jets: Vec<Jet<T>> = jets.into_iter().map(Option::unwrap).collect();
    let scale = jets
        .iter()
        .fold(T::zero(), |m, j| m.max(j.value().abs()));
    let floor = NONDEGENERACY_FLOOR * scale.as_f64().powi(n as i32);
    let (inv, det) = invert_jet_matrix(&jets, n).map_err(|e| match e {
        Error::DegenerateMetric { .. } => Error::DegenerateMetric { det: 0.0, floor },
        other => other,
    })?;
    if !(det.as_f64().abs() > floor) {
        return Err(Error::DegenerateMetric {
            det: det.as_f64(),
            floor,
        });
    }
    let g_jet = ComponentTensor::from_entries(n, vec![Variance::Co; 2], jets);
    let g_inv_jet = ComponentTensor::from_entries(n, vec![Variance::Contra; 2], inv);
    let g = g_jet.values();
    let g_inv = g_inv_jet.values();
    let g64: Vec<f64> = g.entries().iter().map(|v| v.as_f64()).collect();
    Ok(MetricAtPoint {
        point: point.to_vec(),
        signature: inertia(&g64, n),
        g,
        g_inv,
        g_jet,
        g_inv_jet,
        det,
    })
}
