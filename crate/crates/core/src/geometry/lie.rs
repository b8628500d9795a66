use crate::error::{Error, Result};
use crate::jets::{Jet, JetSpace};
use crate::metric_dsl::{evaluate_metric_jet, Expr, MetricSpec};
use crate::scalar::Scalar;
use crate::tensor::{ComponentTensor, Variance};

/// Evaluates a covector field, one expression per coordinate, as jets.
pub fn covector_jets<T: Scalar>(
    x: &[Expr],
    spec: &MetricSpec,
    space: &JetSpace<T>,
) -> Result<ComponentTensor<Jet<T>>> {
    if x.len() != spec.dim {
        return Err(Error::Semantic {
            line: 0,
            message: format!("field has {} components, metric has dim {}", x.len(), spec.dim),
        });
    }
    let params = spec.param_values();
    let entries = x
        .iter()
        .map(|e| e.eval_jet(space, &params))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComponentTensor::from_entries(spec.dim, vec![Variance::Co], entries))
}

/// `L_X g` at `point`, as values.
pub fn lie_derivative_metric<T: Scalar>(
    x: &[Expr],
    spec: &MetricSpec,
    point: &[T],
) -> Result<ComponentTensor<T>> {
    Ok(lie_derivative_metric_jet(x, spec, point, 1)?.values())
}

/// `L_X g_ab = X^c ∂_c g_ab + (∂_a X^c) g_cb + (∂_b X^c) g_ac` with
/// `X^c = g^cd X_d`, from partial derivatives only. Jets of `X` and `g` are
/// taken to `order`; the result has order `order − 1`.
pub fn lie_derivative_metric_jet<T: Scalar>(
    x: &[Expr],
    spec: &MetricSpec,
    point: &[T],
    order: usize,
) -> Result<ComponentTensor<Jet<T>>> {
    if order < 1 {
        return Err(Error::InsufficientJetOrder {
            needed: 1,
            have: order,
        });
    }
    let m = evaluate_metric_jet(spec, point, order)?;
    let n = spec.dim;
    let xl = covector_jets(x, spec, &m.space())?;
    let x_up: Vec<Jet<T>> = (0..n)
        .map(|c| {
            (1..n).fold(m.g_inv_jet.get(&[c, 0]) * xl.get(&[0]), |acc, d| {
                acc + m.g_inv_jet.get(&[c, d]) * xl.get(&[d])
            })
        })
        .collect();
    // dx[c*n + a] = ∂_a X^c
    let mut dx = Vec::with_capacity(n * n);
    for xc in &x_up {
        for a in 0..n {
            dx.push(xc.partial(a)?);
        }
    }
    let mut dg = Vec::with_capacity(n * n * n);
    for g in m.g_jet.entries() {
        for c in 0..n {
            dg.push(g.partial(c)?);
        }
    }
    let g = m.g_jet.truncate(order - 1);
    let xu: Vec<Jet<T>> = x_up.iter().map(|j| j.truncate(order - 1)).collect();
    Ok(ComponentTensor::from_fn(n, vec![Variance::Co; 2], |i| {
        let (a, b) = (i[0], i[1]);
        let mut acc = &xu[0] * &dg[(a * n + b) * n];
        for c in 0..n {
            if c > 0 {
                acc = acc + &xu[c] * &dg[(a * n + b) * n + c];
            }
            acc = acc + &dx[c * n + a] * g.get(&[c, b]);
            acc = acc + &dx[c * n + b] * g.get(&[a, c]);
        }
        acc
    })
    .with_label("lie_derivative_metric"))
}

/// Symbolic `L_X g` for a vector field `X^c` given as expressions, row-major.
pub fn lie_derivative_expressions(spec: &MetricSpec, x_up: &[Expr]) -> Vec<Expr> {
    let n = spec.dim;
    assert_eq!(x_up.len(), n);
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = Expr::num(0.0);
            for (c, xc) in x_up.iter().enumerate() {
                acc = Expr::add(acc, Expr::mul(xc.clone(), spec.component(a, b).diff(c)));
                acc = Expr::add(acc, Expr::mul(xc.diff(a), spec.component(c, b).clone()));
                acc = Expr::add(acc, Expr::mul(xc.diff(b), spec.component(a, c).clone()));
            }
            out.push(acc);
        }
    }
    out
}
