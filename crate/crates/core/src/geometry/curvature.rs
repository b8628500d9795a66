use super::connection::{christoffel, covariant_derivative};
use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::metric_dsl::{evaluate_metric_jet, MetricAtPoint, MetricSpec};
use crate::scalar::Scalar;
use crate::tensor::{ComponentTensor, Variance};

/// Metric jet order used when none is requested. Leaves order 1 on `∇R`.
pub const DEFAULT_METRIC_ORDER: usize = 4;

/// Curvature of a metric at one point, carried as jets.
///
/// Conventions:
/// `R_ab^c_d = ∂_a Γ^c_bd − ∂_b Γ^c_ad + Γ^c_ae Γ^e_bd − Γ^c_be Γ^e_ad`,
/// `R_abcd = g_ce R_ab^e_d`, `R_bd = g^ac R_abcd`, `R = g^bd R_bd`.
/// With these, `(∇_a∇_b − ∇_b∇_a) X^c = R_ab^c_d X^d` and the unit sphere has
/// `R_abcd = g_ac g_bd − g_ad g_bc`.
#[derive(Debug, Clone)]
pub struct CurvaturePack<T: Scalar> {
    pub point: Vec<T>,
    pub m: MetricAtPoint<T>,
    /// `Γ^c_ab`, slots `[c, a, b]`.
    pub gamma: ComponentTensor<Jet<T>>,
    /// `R_ab^c_d`, slots `[a, b, c, d]`.
    pub riem_mixed: ComponentTensor<Jet<T>>,
    pub riem_low: ComponentTensor<Jet<T>>,
    pub ricci: ComponentTensor<Jet<T>>,
    pub scalar: Jet<T>,
    /// `∇_e R_abcd`, slots `[e, a, b, c, d]`.
    pub nabla_riem: ComponentTensor<Jet<T>>,
}

impl<T: Scalar> CurvaturePack<T> {
    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// Magnitude used to normalise curvature residuals.
    pub fn curvature_scale(&self) -> T {
        let r: T = self.riem_low.max_abs();
        let ric: T = self.ricci.max_abs();
        r + ric + self.scalar.value().abs()
    }
}

/// Curvature of `spec` at `point` from metric jets of the given order
/// (at least 3).
pub fn curvature_pack<T: Scalar>(
    spec: &MetricSpec,
    point: &[T],
    order: usize,
) -> Result<CurvaturePack<T>> {
    if order < 3 {
        return Err(Error::InsufficientJetOrder {
            needed: 3,
            have: order,
        });
    }
    curvature_from_metric(evaluate_metric_jet(spec, point, order)?)
}

/// Same as [`curvature_pack`] for an already evaluated metric.
pub fn curvature_from_metric<T: Scalar>(m: MetricAtPoint<T>) -> Result<CurvaturePack<T>> {
    let n = m.dim();
    let order = m.order();
    if order < 3 {
        return Err(Error::InsufficientJetOrder {
            needed: 3,
            have: order,
        });
    }
    let gamma = christoffel(&m)?;
    // dgamma[((c*n + a)*n + b)*n + e] = ∂_e Γ^c_ab
    let mut dgamma = Vec::with_capacity(n * n * n * n);
    for j in gamma.entries() {
        for e in 0..n {
            dgamma.push(j.partial(e)?);
        }
    }
    let dg = |c: usize, a: usize, b: usize, e: usize| &dgamma[((c * n + a) * n + b) * n + e];
    let ro = order - 2;
    let gm = gamma.truncate(ro);
    let space = m.space();
    let zero = space.zero().truncate(ro);
    let mixed = [Variance::Co, Variance::Co, Variance::Contra, Variance::Co];
    let mut riem_mixed = ComponentTensor::from_fn(n, mixed.to_vec(), |_| zero.clone());
    for a in 0..n {
        for b in a + 1..n {
            for c in 0..n {
                for d in 0..n {
                    let mut acc = dg(c, b, d, a) - dg(c, a, d, b);
                    for e in 0..n {
                        acc = acc + gm.get(&[c, a, e]) * gm.get(&[e, b, d]);
                        acc = acc - gm.get(&[c, b, e]) * gm.get(&[e, a, d]);
                    }
                    *riem_mixed.get_mut(&[b, a, c, d]) = -&acc;
                    *riem_mixed.get_mut(&[a, b, c, d]) = acc;
                }
            }
        }
    }
    let riem_mixed = riem_mixed.with_label("riemann_mixed");
    let g = m.g_jet.truncate(ro);
    let gi = m.g_inv_jet.truncate(ro);
    let riem_low = ComponentTensor::from_fn(n, vec![Variance::Co; 4], |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        let mut acc = zero.clone();
        if a != b {
            for e in 0..n {
                acc = acc + g.get(&[c, e]) * riem_mixed.get(&[a, b, e, d]);
            }
        }
        acc
    })
    .with_label("riemann");
    let ricci = ComponentTensor::from_fn(n, vec![Variance::Co; 2], |i| {
        let mut acc = zero.clone();
        for a in 0..n {
            for c in 0..n {
                acc = acc + gi.get(&[a, c]) * riem_low.get(&[a, i[0], c, i[1]]);
            }
        }
        acc
    })
    .with_label("ricci");
    let mut scalar = zero.clone();
    for b in 0..n {
        for d in 0..n {
            scalar = scalar + gi.get(&[b, d]) * ricci.get(&[b, d]);
        }
    }
    let nabla_riem = covariant_derivative(&riem_low, &gamma)?.with_label("nabla_riemann");
    Ok(CurvaturePack {
        point: m.point.clone(),
        m,
        gamma,
        riem_mixed,
        riem_low,
        ricci,
        scalar,
        nabla_riem,
    })
}
