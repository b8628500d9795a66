use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::metric_dsl::MetricAtPoint;
use crate::scalar::Scalar;
use crate::tensor::{ComponentTensor, Variance};

/// Levi-Civita connection `Γ^c_ab = ½ g^cd (∂_a g_bd + ∂_b g_ad − ∂_d g_ab)`,
/// stored with slot order `[c, a, b]` and jet order one below the metric's.
pub fn christoffel<T: Scalar>(m: &MetricAtPoint<T>) -> Result<ComponentTensor<Jet<T>>> {
    let n = m.dim();
    let order = m.order();
    if order < 1 {
        return Err(Error::InsufficientJetOrder {
            needed: 1,
            have: order,
        });
    }
    // dg[(a*n + b)*n + d] = ∂_d g_ab
    let mut dg = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            let g = m.g_jet.get(&[a, b]);
            for d in 0..n {
                dg.push(g.partial(d)?);
            }
        }
    }
    let d = |a: usize, b: usize, c: usize| &dg[(a * n + b) * n + c];
    let half = T::lit(0.5);
    // first kind: Γ_dab
    let mut first = Vec::with_capacity(n * n * n);
    for dd in 0..n {
        for a in 0..n {
            for b in 0..n {
                first.push((d(b, dd, a) + d(a, dd, b) - d(a, b, dd)).scale(half));
            }
        }
    }
    let ginv = m.g_inv_jet.truncate(order - 1);
    Ok(ComponentTensor::from_fn(
        n,
        vec![Variance::Contra, Variance::Co, Variance::Co],
        |i| {
            let (c, a, b) = (i[0], i[1], i[2]);
            let mut acc = ginv.get(&[c, 0]) * &first[a * n + b];
            for dd in 1..n {
                acc = acc + ginv.get(&[c, dd]) * &first[(dd * n + a) * n + b];
            }
            acc
        },
    )
    .with_label("christoffel"))
}

/// `∇_e T`: the new derivative slot `e` is placed first. The result has jet
/// order one below `min(order(T), order(Γ) + 1)`.
pub fn covariant_derivative<T: Scalar>(
    t: &ComponentTensor<Jet<T>>,
    gamma: &ComponentTensor<Jet<T>>,
) -> Result<ComponentTensor<Jet<T>>> {
    let n = t.dim();
    let order = t.order();
    if order < 1 {
        return Err(Error::InsufficientJetOrder {
            needed: 1,
            have: order,
        });
    }
    if gamma.order() + 1 < order {
        // Γ must carry at least order − 1
        return covariant_derivative(&t.truncate(gamma.order() + 1), gamma);
    }
    let out_order = order - 1;
    let tt = t.truncate(out_order);
    let gm = gamma.truncate(out_order);
    let partials: Vec<Vec<Jet<T>>> = t
        .entries()
        .iter()
        .map(|j| (0..n).map(|e| j.partial(e)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut valence = vec![Variance::Co];
    valence.extend_from_slice(t.valence());
    let rank = t.rank();
    let mut src = vec![0usize; rank];
    Ok(ComponentTensor::from_fn(n, valence, |idx| {
        let e = idx[0];
        let rest = &idx[1..];
        let mut acc = partials[t.offset(rest)][e].clone();
        for s in 0..rank {
            src.copy_from_slice(rest);
            for f in 0..n {
                src[s] = f;
                let term = match t.valence()[s] {
                    Variance::Contra => gm.get(&[rest[s], e, f]) * tt.get(&src),
                    Variance::Co => -(gm.get(&[f, e, rest[s]]) * tt.get(&src)),
                };
                acc = acc + term;
            }
        }
        acc
    }))
}
