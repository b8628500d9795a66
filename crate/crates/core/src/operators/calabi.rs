use super::fields::{KillingData, Perturbation};
use crate::error::{Error, Result};
use crate::geometry::{covariant_derivative, CurvaturePack};
use crate::jets::Jet;
use crate::scalar::Scalar;
use crate::tensor::{ComponentTensor, Variance};

/// Bound on the relative disagreement between two assembly paths.
pub const PATH_TOLERANCE: f64 = 1e-10;
/// Floor on the scale of an operator output.
pub const OUTPUT_SCALE_FLOOR: f64 = 1e-12;

/// An operator value with the magnitude its residuals are measured against:
/// the sum of the largest magnitudes of its constituent terms.
#[derive(Debug, Clone)]
pub struct OperatorOutput<T> {
    pub value: ComponentTensor<T>,
    pub scale: T,
}

/// Two evaluations of the same quantity by different routes.
#[derive(Debug, Clone)]
pub struct TwoPath<T> {
    pub value: ComponentTensor<T>,
    pub other_path: ComponentTensor<T>,
    pub residual: T,
    pub scale: T,
}

impl<T: Scalar> TwoPath<T> {
    pub fn relative_residual(&self) -> T {
        self.residual / self.scale.max(T::lit(OUTPUT_SCALE_FLOOR))
    }

    fn checked(self) -> Result<Self> {
        let bound = PATH_TOLERANCE * self.scale.as_f64().max(OUTPUT_SCALE_FLOOR);
        if self.residual.as_f64() > bound || !self.residual.is_finite() {
            return Err(Error::PathMismatch {
                residual: self.residual.as_f64(),
                bound,
            });
        }
        Ok(self)
    }
}

fn max_abs<T: Scalar>(t: &ComponentTensor<T>) -> T {
    t.max_abs()
}

/// Terms of the Calabi operator kept apart so that each linear combination
/// built on them can report its own scale.
struct CalabiParts<T: Scalar> {
    /// `∇_(a∇_c)h_bd − ∇_(b∇_c)h_ad − ∇_(a∇_d)h_bc + ∇_(b∇_d)h_ac`
    second: ComponentTensor<T>,
    /// `R_ab^e_[c h_d]e + R_cd^e_[a h_b]e`
    curv: ComponentTensor<T>,
    second_scale: T,
    curv_scale: T,
}

fn second_derivatives<T: Scalar>(
    h: &ComponentTensor<Jet<T>>,
    pack: &CurvaturePack<T>,
) -> Result<ComponentTensor<T>> {
    if h.order() < 2 {
        return Err(Error::InsufficientJetOrder {
            needed: 2,
            have: h.order(),
        });
    }
    let nh = covariant_derivative(&h.truncate(2), &pack.gamma)?;
    Ok(covariant_derivative(&nh, &pack.gamma)?.values())
}

/// `R_ab^e_[c t_d]e` for a `(0,2)` tensor `t`.
fn riemann_wedge<T: Scalar>(rm: &ComponentTensor<T>, t: &ComponentTensor<T>, i: [usize; 4]) -> T {
    let [a, b, c, d] = i;
    let n = t.dim();
    let mut s = T::zero();
    for e in 0..n {
        s += *rm.get(&[a, b, e, c]) * *t.get(&[d, e]) - *rm.get(&[a, b, e, d]) * *t.get(&[c, e]);
    }
    s * T::lit(0.5)
}

fn calabi_parts<T: Scalar>(p: &Perturbation<T>, pack: &CurvaturePack<T>) -> Result<CalabiParts<T>> {
    let n = pack.dim();
    let nnh = second_derivatives(&p.h, pack)?;
    let half = T::lit(0.5);
    let s = |a: usize, c: usize, b: usize, d: usize| {
        half * (*nnh.get(&[a, c, b, d]) + *nnh.get(&[c, a, b, d]))
    };
    let mut second_scale = T::zero();
    let second = ComponentTensor::from_fn(n, vec![Variance::Co; 4], |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        let t = [s(a, c, b, d), s(b, c, a, d), s(a, d, b, c), s(b, d, a, c)];
        for v in t {
            second_scale = second_scale.max(v.abs());
        }
        t[0] - t[1] - t[2] + t[3]
    });
    let rm = pack.riem_mixed.values();
    let h = p.h.values();
    let (mut s1, mut s2) = (T::zero(), T::zero());
    let curv = ComponentTensor::from_fn(n, vec![Variance::Co; 4], |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        let t1 = riemann_wedge(&rm, &h, [a, b, c, d]);
        let t2 = riemann_wedge(&rm, &h, [c, d, a, b]);
        s1 = s1.max(t1.abs());
        s2 = s2.max(t2.abs());
        t1 + t2
    });
    Ok(CalabiParts {
        second,
        curv,
        second_scale: second_scale * T::lit(4.0),
        curv_scale: s1 + s2,
    })
}

/// The Calabi operator:
/// `(Ch)_abcd = ∇_(a∇_c)h_bd − ∇_(b∇_c)h_ad − ∇_(a∇_d)h_bc + ∇_(b∇_d)h_ac
///  − R_ab^e_[c h_d]e − R_cd^e_[a h_b]e`.
pub fn calabi_c<T: Scalar>(p: &Perturbation<T>, pack: &CurvaturePack<T>) -> Result<OperatorOutput<T>> {
    let parts = calabi_parts(p, pack)?;
    Ok(OperatorOutput {
        value: parts.second.sub(&parts.curv).with_label("calabi"),
        scale: parts.second_scale + parts.curv_scale,
    })
}

/// The first-order coefficient `B` in `R̃_abcd = R_abcd − (ε/2) B + O(ε²)`,
/// `B = [∇∇-terms] + R_ab^e_[c h_d]e + R_cd^e_[a h_b]e`. The second path is
/// `Ch + 2(R_ab^e_[c h_d]e + R_cd^e_[a h_b]e)`.
pub fn linearised_riemann<T: Scalar>(
    p: &Perturbation<T>,
    pack: &CurvaturePack<T>,
) -> Result<TwoPath<T>> {
    let parts = calabi_parts(p, pack)?;
    let direct = parts.second.add(&parts.curv);
    let ch = parts.second.sub(&parts.curv);
    let via_calabi = ch.add(&parts.curv.scale(T::lit(2.0)));
    TwoPath {
        residual: direct.max_abs_diff(&via_calabi),
        value: direct.with_label("linearised_riemann"),
        other_path: via_calabi,
        scale: parts.second_scale + parts.curv_scale * T::lit(2.0),
    }
    .checked()
}

/// The bracket with the curvature terms entering with the sign of the Calabi
/// operator instead. Used only as a deliberately wrong control.
pub fn linearised_riemann_opposite_sign<T: Scalar>(
    p: &Perturbation<T>,
    pack: &CurvaturePack<T>,
) -> Result<ComponentTensor<T>> {
    Ok(calabi_c(p, pack)?.value)
}

/// `R_b^e t_de` symmetrised over `(b, d)`.
fn ricci_sym<T: Scalar>(pack: &CurvaturePack<T>, t: &ComponentTensor<T>) -> ComponentTensor<T> {
    let n = pack.dim();
    let ric = pack.ricci.values();
    let gi = &pack.m.g_inv;
    // R_b^e = R_bf g^fe
    let mixed = ComponentTensor::from_fn(n, vec![Variance::Co, Variance::Contra], |i| {
        (0..n).fold(T::zero(), |s, f| s + ric[(i[0], f)] * gi[(f, i[1])])
    });
    ComponentTensor::from_fn(n, vec![Variance::Co; 2], |i| {
        let (b, d) = (i[0], i[1]);
        let mut s = T::zero();
        for e in 0..n {
            s += mixed[(b, e)] * t[(d, e)] + mixed[(d, e)] * t[(b, e)];
        }
        s * T::lit(0.5)
    })
}

/// `g^ac T_abcd`.
fn trace_ac<T: Scalar>(pack: &CurvaturePack<T>, t: &ComponentTensor<T>) -> ComponentTensor<T> {
    let n = pack.dim();
    let gi = &pack.m.g_inv;
    ComponentTensor::from_fn(n, vec![Variance::Co; 2], |i| {
        let mut s = T::zero();
        for a in 0..n {
            for c in 0..n {
                s += gi[(a, c)] * *t.get(&[a, i[0], c, i[1]]);
            }
        }
        s
    })
}

/// First-order Ricci coefficient `R_(b^e h_d)e − ½ g^ac (Ch)_abcd`.
pub fn linearised_ricci<T: Scalar>(
    p: &Perturbation<T>,
    pack: &CurvaturePack<T>,
) -> Result<OperatorOutput<T>> {
    let ch = calabi_c(p, pack)?;
    let rh = ricci_sym(pack, &p.h.values());
    let tr = trace_ac(pack, &ch.value).scale(T::lit(-0.5));
    let scale = max_abs(&rh) + max_abs(&tr);
    Ok(OperatorOutput {
        value: rh.add(&tr).with_label("linearised_ricci"),
        scale,
    })
}

/// `P h = g^ac (Ch)_abcd` (path A), checked against
/// `Δh_bd − 2∇^e∇_(b h_d)e + ∇_b∇_d h + 2R_(b^e h_d)e` (path B).
/// The scale is the sum of the magnitudes of the four path-B terms.
pub fn operator_p<T: Scalar>(p: &Perturbation<T>, pack: &CurvaturePack<T>) -> Result<TwoPath<T>> {
    operator_p_paths(p, pack)?.checked()
}

/// [`operator_p`] without the agreement check.
pub fn operator_p_paths<T: Scalar>(
    p: &Perturbation<T>,
    pack: &CurvaturePack<T>,
) -> Result<TwoPath<T>> {
    let n = pack.dim();
    let path_a = trace_ac(pack, &calabi_c(p, pack)?.value);
    let nnh = second_derivatives(&p.h, pack)?;
    let gi = &pack.m.g_inv;
    let laplacian = ComponentTensor::from_fn(n, vec![Variance::Co; 2], |i| {
        let mut s = T::zero();
        for a in 0..n {
            for e in 0..n {
                s += gi[(a, e)] * *nnh.get(&[a, e, i[0], i[1]]);
            }
        }
        s
    });
    let divergence = ComponentTensor::from_fn(n, vec![Variance::Co; 2], |i| {
        let (b, d) = (i[0], i[1]);
        let mut s = T::zero();
        for e in 0..n {
            for f in 0..n {
                s += gi[(e, f)] * (*nnh.get(&[f, b, d, e]) + *nnh.get(&[f, d, b, e]));
            }
        }
        // −2 · ½ (…)
        -s
    });
    // Hessian of the trace, differentiated as a scalar field.
    let tr = ComponentTensor::from_entries(n, vec![], vec![p.trace.truncate(2)]);
    if p.trace.order() < 2 {
        return Err(Error::InsufficientJetOrder {
            needed: 2,
            have: p.trace.order(),
        });
    }
    let hess = covariant_derivative(&covariant_derivative(&tr, &pack.gamma)?, &pack.gamma)?.values();
    let curv = ricci_sym(pack, &p.h.values()).scale(T::lit(2.0));
    let scale = max_abs(&laplacian) + max_abs(&divergence) + max_abs(&hess) + max_abs(&curv);
    let path_b = laplacian.add(&divergence).add(&hess).add(&curv);
    Ok(TwoPath {
        residual: path_a.max_abs_diff(&path_b),
        value: path_a.with_label("operator_p"),
        other_path: path_b,
        scale,
    })
}

/// `2R_ab^e_[c μ_d]e + 2R_cd^e_[a μ_b]e − (∇^e R_abcd) X_e`.
pub fn ck_formula<T: Scalar>(kd: &KillingData<T>, pack: &CurvaturePack<T>) -> Result<OperatorOutput<T>> {
    let n = pack.dim();
    if kd.mu.dim() != n {
        return Err(Error::BadSlots("field dimension differs from the curvature pack".into()));
    }
    let rm = pack.riem_mixed.values();
    let mu = kd.mu.values();
    let xu = kd.x_up.values();
    let nr = pack.nabla_riem.values();
    let (mut s1, mut s2, mut s3) = (T::zero(), T::zero(), T::zero());
    let two = T::lit(2.0);
    let value = ComponentTensor::from_fn(n, vec![Variance::Co; 4], |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        let t1 = two * riemann_wedge(&rm, &mu, [a, b, c, d]);
        let t2 = two * riemann_wedge(&rm, &mu, [c, d, a, b]);
        let t3 = (0..n).fold(T::zero(), |s, f| s + *xu.get(&[f]) * *nr.get(&[f, a, b, c, d]));
        s1 = s1.max(t1.abs());
        s2 = s2.max(t2.abs());
        s3 = s3.max(t3.abs());
        t1 + t2 - t3
    });
    // Terms can vanish identically (every one does in two dimensions), so
    // the inputs set the scale too.
    let inputs = two * pack.curvature_scale() * mu.max_abs() + nr.max_abs() * xu.max_abs();
    Ok(OperatorOutput {
        value: value.with_label("ck_formula"),
        scale: s1 + s2 + s3 + inputs,
    })
}

/// Residuals of the two trace identities, each with its scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceResiduals<T> {
    /// `|g^ac(R_ab^e_[c h_d]e + R_cd^e_[a h_b]e) + R_(b^e h_d)e + h^ac R_abcd|`
    pub ricci_cancellation: T,
    pub ricci_scale: T,
    /// `|g^ac (CK)_abcd + 2R_(b^e μ_d)e + (∇^e R_bd) X_e|`
    pub killing_trace: T,
    pub killing_scale: T,
}

impl<T: Scalar> TraceResiduals<T> {
    pub fn relative(&self) -> (T, T) {
        let fl = T::lit(OUTPUT_SCALE_FLOOR);
        (
            self.ricci_cancellation / self.ricci_scale.max(fl),
            self.killing_trace / self.killing_scale.max(fl),
        )
    }
}

pub fn trace_identity_check<T: Scalar>(
    p: &Perturbation<T>,
    kd: &KillingData<T>,
    pack: &CurvaturePack<T>,
) -> Result<TraceResiduals<T>> {
    let n = pack.dim();
    let h = p.h.values();
    let h_up = p.h_up.values();
    let rm = pack.riem_mixed.values();
    let rl = pack.riem_low.values();
    let curv = ComponentTensor::from_fn(n, vec![Variance::Co; 4], |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        riemann_wedge(&rm, &h, [a, b, c, d]) + riemann_wedge(&rm, &h, [c, d, a, b])
    });
    let t1 = trace_ac(pack, &curv);
    let t2 = ricci_sym(pack, &h);
    let t3 = ComponentTensor::from_fn(n, vec![Variance::Co; 2], |i| {
        let mut s = T::zero();
        for a in 0..n {
            for c in 0..n {
                s += h_up[(a, c)] * *rl.get(&[a, i[0], c, i[1]]);
            }
        }
        s
    });
    let r1 = t1.add(&t2).add(&t3);

    let ck = ck_formula(kd, pack)?;
    let u1 = trace_ac(pack, &ck.value);
    let u2 = ricci_sym(pack, &kd.mu.values()).scale(T::lit(2.0));
    let nric = covariant_derivative(&pack.ricci, &pack.gamma)?.values();
    let xu = kd.x_up.values();
    let u3 = ComponentTensor::from_fn(n, vec![Variance::Co; 2], |i| {
        (0..n).fold(T::zero(), |s, f| s + *xu.get(&[f]) * *nric.get(&[f, i[0], i[1]]))
    });
    let r2 = u1.add(&u2).add(&u3);
    // Every term can vanish identically (2D, constant curvature), so the
    // scales also carry the sizes of the factors going into the products.
    let curv = pack.curvature_scale();
    let inputs_h = curv * max_abs(&h);
    let inputs_x =
        curv * max_abs(&kd.mu.values()) + max_abs(&pack.nabla_riem.values()) * max_abs(&xu);
    Ok(TraceResiduals {
        ricci_cancellation: max_abs(&r1),
        ricci_scale: max_abs(&t1) + max_abs(&t2) + max_abs(&t3) + inputs_h,
        killing_trace: max_abs(&r2),
        killing_scale: ck.scale + max_abs(&u2) + max_abs(&u3) + inputs_x,
    })
}
