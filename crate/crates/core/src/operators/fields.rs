use crate::error::{Error, Result};
use crate::geometry::{christoffel, covariant_derivative, covector_jets, CurvaturePack, DEFAULT_METRIC_ORDER};
use crate::jets::{Jet, JetSpace};
use crate::metric_dsl::{evaluate_metric_jet, Expr, MetricAtPoint, MetricSpec};
use crate::scalar::Scalar;
use crate::tensor::{ComponentTensor, SymMode, Variance};

/// Jet order used for vector fields and perturbations: enough for two
/// covariant derivatives after one has been spent on `∇X`.
pub const FIELD_ORDER: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationSource {
    Expressions,
    Killing,
    RandomPolynomial,
}

/// A symmetric perturbation `h_ab` with its raised form and trace.
#[derive(Debug, Clone)]
pub struct Perturbation<T: Scalar> {
    pub h: ComponentTensor<Jet<T>>,
    pub h_up: ComponentTensor<Jet<T>>,
    pub trace: Jet<T>,
    pub source: PerturbationSource,
}

impl<T: Scalar> Perturbation<T> {
    /// Wraps jets of a symmetric `(0,2)` tensor.
    pub fn from_jets(
        h: ComponentTensor<Jet<T>>,
        m: &MetricAtPoint<T>,
        source: PerturbationSource,
    ) -> Result<Self> {
        let n = m.dim();
        if h.dim() != n || h.valence() != [Variance::Co, Variance::Co] {
            return Err(Error::BadSlots("perturbation must be a (0,2) tensor of the metric dimension".into()));
        }
        let k = h.order();
        let gi = m.g_inv_jet.truncate(k);
        let h = h.truncate(k);
        let mixed = ComponentTensor::from_fn(n, vec![Variance::Contra, Variance::Co], |i| {
            (0..n).fold(h.get(&[0, 0]).space().zero(), |acc, c| {
                acc + gi.get(&[i[0], c]) * h.get(&[c, i[1]])
            })
        });
        let h_up = ComponentTensor::from_fn(n, vec![Variance::Contra; 2], |i| {
            (0..n).fold(mixed.get(&[0, 0]).space().zero(), |acc, d| {
                acc + mixed.get(&[i[0], d]) * gi.get(&[d, i[1]])
            })
        });
        let trace = (1..n).fold(mixed.get(&[0, 0]).clone(), |acc, a| acc + mixed.get(&[a, a]));
        Ok(Perturbation {
            h,
            h_up,
            trace,
            source,
        })
    }

    /// Evaluates a row-major table of expressions; the upper triangle is used.
    pub fn from_expressions(
        h: &[Expr],
        spec: &MetricSpec,
        m: &MetricAtPoint<T>,
        order: usize,
        source: PerturbationSource,
    ) -> Result<Self> {
        let n = spec.dim;
        if h.len() != n * n {
            return Err(Error::BadSlots("perturbation must be a (0,2) tensor of the metric dimension".into()));
        }
        let space = JetSpace::new(&m.point, order);
        let params = spec.param_values();
        let mut entries: Vec<Option<Jet<T>>> = vec![None; n * n];
        for a in 0..n {
            for b in a..n {
                let j = h[a * n + b].eval_jet(&space, &params)?;
                entries[b * n + a] = Some(j.clone());
                entries[a * n + b] = Some(j);
            }
        }
        let h = ComponentTensor::from_entries(
            n,
            vec![Variance::Co; 2],
            entries.into_iter().map(Option::unwrap).collect(),
        );
        Self::from_jets(h, m, source)
    }

    pub fn order(&self) -> usize {
        self.h.order()
    }
}

/// A covector field with the pieces of `∇_a X_b`.
#[derive(Debug, Clone)]
pub struct KillingData<T: Scalar> {
    pub x_low: ComponentTensor<Jet<T>>,
    pub x_up: ComponentTensor<Jet<T>>,
    /// `∇_(a X_b)`.
    pub h: ComponentTensor<Jet<T>>,
    /// `∇_[a X_b]`.
    pub mu: ComponentTensor<Jet<T>>,
}

impl<T: Scalar> KillingData<T> {
    /// `h` as a perturbation, ready for the Calabi operator.
    pub fn perturbation(&self, m: &MetricAtPoint<T>) -> Result<Perturbation<T>> {
        Perturbation::from_jets(self.h.clone(), m, PerturbationSource::Killing)
    }
}

/// Killing operator `X_b ↦ ∇_(a X_b)` at one point.
pub fn killing_k<T: Scalar>(x: &[Expr], spec: &MetricSpec, point: &[T]) -> Result<KillingData<T>> {
    let m = evaluate_metric_jet(spec, point, DEFAULT_METRIC_ORDER)?;
    let gamma = christoffel(&m)?;
    killing_from_parts(x, spec, &m, &gamma, FIELD_ORDER)
}

/// [`killing_k`] reusing the metric and connection of a curvature pack.
pub fn killing_with_pack<T: Scalar>(
    x: &[Expr],
    spec: &MetricSpec,
    pack: &CurvaturePack<T>,
) -> Result<KillingData<T>> {
    killing_from_parts(x, spec, &pack.m, &pack.gamma, FIELD_ORDER)
}

pub fn killing_from_parts<T: Scalar>(
    x: &[Expr],
    spec: &MetricSpec,
    m: &MetricAtPoint<T>,
    gamma: &ComponentTensor<Jet<T>>,
    order: usize,
) -> Result<KillingData<T>> {
    if order < 3 {
        return Err(Error::InsufficientJetOrder {
            needed: 3,
            have: order,
        });
    }
    let n = spec.dim;
    let x_low = covector_jets(x, spec, &JetSpace::new(&m.point, order))?;
    let gi = m.g_inv_jet.truncate(order);
    let x_up = ComponentTensor::from_fn(n, vec![Variance::Contra], |i| {
        (1..n).fold(gi.get(&[i[0], 0]) * x_low.get(&[0]), |acc, b| {
            acc + gi.get(&[i[0], b]) * x_low.get(&[b])
        })
    });
    let nx = covariant_derivative(&x_low, gamma)?;
    if nx.order() < 2 {
        return Err(Error::InsufficientJetOrder {
            needed: 3,
            have: nx.order() + 1,
        });
    }
    let h = nx.symmetrize_slots(&[0, 1], SymMode::Sym)?.with_label("killing");
    let mu = nx.symmetrize_slots(&[0, 1], SymMode::Antisym)?.with_label("mu");
    Ok(KillingData { x_low, x_up, h, mu })
}
