use super::*;
use crate::harness::fd_curvature::fd_curvature;
use crate::harness::sampling::{random_covector, sample_points, stream};
use crate::jets::Jet;
use crate::metric_dsl::{
    builtin_background, builtin_catalog, default_params, evaluate_metric_jet, parse_expression,
    parse_metric_file, Expr, MetricSpec,
};
use crate::tensor::{ComponentTensor, Variance};

fn builtin(name: &str, dim: usize) -> MetricSpec {
    builtin_background(name, dim, &default_params(name)).unwrap()
}

fn polar() -> MetricSpec {
    parse_metric_file("dim 2\ncoords r phi\ng[0][0] = 1\ng[1][1] = r^2\ndomain r in (0.5, 2)\ndomain phi in (-1, 1)")
        .unwrap()
}

fn catalog() -> Vec<MetricSpec> {
    builtin_catalog()
        .into_iter()
        .map(|(n, d)| builtin(n, d))
        .collect()
}

#[test]
fn flat_christoffel_vanishes() {
    let m = evaluate_metric_jet::<f64>(&builtin("flat_minkowski", 4), &[0.1, 0.2, 0.3, 0.4], 3).unwrap();
    let g = christoffel(&m).unwrap();
    assert_eq!(g.order(), 2);
    assert!(g.entries().iter().all(|j| j.max_abs_coeff() == 0.0));
}

#[test]
fn polar_christoffel() {
    let s = polar();
    let m = evaluate_metric_jet::<f64>(&s, &[1.3, 0.2], 2).unwrap();
    let g = christoffel(&m).unwrap().values();
    assert!((g.get(&[0, 1, 1]) + 1.3).abs() < 1e-14);
    assert!((g.get(&[1, 0, 1]) - 1.0 / 1.3).abs() < 1e-14);
    assert!((g.get(&[1, 1, 0]) - 1.0 / 1.3).abs() < 1e-14);
    let fd = fd_curvature(&s, &[1.3, 0.2]).unwrap();
    for (a, b) in g.entries().iter().zip(&fd.gamma) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn sphere_christoffel() {
    let th: f64 = 1.1;
    let m = evaluate_metric_jet::<f64>(&builtin("sphere", 2), &[th, 0.4], 2).unwrap();
    let g = christoffel(&m).unwrap().values();
    assert!((g.get(&[0, 1, 1]) + th.sin() * th.cos()).abs() < 1e-14);
    assert!((g.get(&[1, 0, 1]) - th.cos() / th.sin()).abs() < 1e-14);
}

#[test]
fn christoffel_needs_first_derivatives() {
    let m = evaluate_metric_jet::<f64>(&polar(), &[1.0, 0.0], 0).unwrap();
    assert!(matches!(
        christoffel(&m),
        Err(crate::Error::InsufficientJetOrder { needed: 1, have: 0 })
    ));
}

#[test]
fn metric_is_parallel() {
    for s in catalog() {
        let mut rng = stream(7, &s.name, "parallel");
        for p in sample_points(&s, &mut rng, 3) {
            let m = evaluate_metric_jet::<f64>(&s, &p, 3).unwrap();
            let gamma = christoffel(&m).unwrap();
            let ng = covariant_derivative(&m.g_jet, &gamma).unwrap();
            let scale: f64 = m.g.max_abs();
            let r: f64 = ng.max_abs();
            assert!(r < 1e-12 * scale.max(1.0), "{} {r}", s.name);
        }
    }
}

#[test]
fn covariant_derivative_is_partial_on_flat() {
    let s = builtin("flat_euclidean", 2);
    let m = evaluate_metric_jet::<f64>(&s, &[0.3, 0.5], 3).unwrap();
    let gamma = christoffel(&m).unwrap();
    let x = covector_jets(
        &[parse_expression("x^2*y", &["x", "y"], &[]).unwrap(), Expr::coord(0)],
        &s,
        &m.space(),
    )
    .unwrap();
    let nx = covariant_derivative(&x, &gamma).unwrap().values();
    assert!((nx.get(&[0, 0]) - 2.0 * 0.3 * 0.5).abs() < 1e-15);
    assert!((nx.get(&[1, 0]) - 0.09).abs() < 1e-15);
    assert_eq!(*nx.get(&[0, 1]), 1.0);
    assert_eq!(*nx.get(&[1, 1]), 0.0);
}

#[test]
fn flat_curvature_vanishes() {
    for name in ["flat_euclidean", "flat_minkowski"] {
        for dim in 2..=4 {
            let s = builtin(name, dim);
            let pack = curvature_pack::<f64>(&s, &vec![0.3; dim], 4).unwrap();
            let r: f64 = pack.riem_low.max_abs();
            let n: f64 = pack.nabla_riem.max_abs();
            assert!(r < 1e-13 && n < 1e-13 && pack.scalar.value().abs() < 1e-13);
        }
    }
}

#[test]
fn unit_sphere_curvature() {
    let s = builtin("sphere", 2);
    let pack = curvature_pack::<f64>(&s, &[0.9, 2.0], 4).unwrap();
    assert!((pack.scalar.value() - 2.0).abs() < 1e-13);
    let ric = pack.ricci.values();
    assert!(ric.max_abs_diff(&pack.m.g) < 1e-13);
    let fd = fd_curvature(&s, &[0.9, 2.0]).unwrap();
    assert!((fd.scalar - 2.0).abs() < 1e-6);
}

#[test]
fn schwarzschild_is_ricci_flat_not_flat() {
    let s = builtin("schwarzschild", 4);
    let pack = curvature_pack::<f64>(&s, &[0.0, 4.0, 1.2, 0.5], 4).unwrap();
    let ric: f64 = pack.ricci.max_abs();
    let riem: f64 = pack.riem_low.max_abs();
    assert!(ric < 1e-9, "{ric}");
    assert!(riem > 1e-3, "{riem}");
}

#[test]
fn curvature_pack_needs_order_three() {
    assert!(matches!(
        curvature_pack::<f64>(&builtin("sphere", 2), &[1.0, 1.0], 2),
        Err(crate::Error::InsufficientJetOrder { needed: 3, .. })
    ));
    assert!(matches!(
        curvature_pack::<f64>(&builtin("sphere", 2), &[0.1, 1.0], 4),
        Err(crate::Error::OutsideDomain { .. })
    ));
}

#[test]
fn packs_match_finite_difference_oracle() {
    for s in catalog() {
        let mut rng = stream(11, &s.name, "fd-oracle");
        for p in sample_points(&s, &mut rng, 2) {
            let pack = curvature_pack::<f64>(&s, &p, 4).unwrap();
            let fd = fd_curvature(&s, &p).unwrap();
            let tol = 1e-6f64.max(1e-6 * pack.curvature_scale());
            let rl = pack.riem_low.values();
            for (a, b) in rl.entries().iter().zip(&fd.riem_low) {
                assert!((a - b).abs() < tol, "{} riemann {a} vs {b}", s.name);
            }
            for (a, b) in pack.ricci.values().entries().iter().zip(&fd.ricci) {
                assert!((a - b).abs() < tol, "{} ricci {a} vs {b}", s.name);
            }
        }
    }
}

#[test]
fn riemann_symmetries_and_ricci_symmetry() {
    for s in catalog() {
        let mut rng = stream(3, &s.name, "symmetries");
        for p in sample_points(&s, &mut rng, 2) {
            let pack = curvature_pack::<f64>(&s, &p, 4).unwrap();
            let scale = pack.curvature_scale().max(SCALE_FLOOR);
            let rep = pack.riem_low.values().check_riemann_symmetries().unwrap();
            assert!(rep.max_residual() < 1e-11 * scale, "{}", s.name);
            let ric = pack.ricci.values();
            for b in 0..s.dim {
                for d in 0..s.dim {
                    assert!((ric[(b, d)] - ric[(d, b)]).abs() < 1e-11 * scale);
                }
            }
        }
    }
}

/// `(∇_a∇_b − ∇_b∇_a) X^c = R_ab^c_d X^d` for random vector fields; this
/// pins the sign convention of the Riemann tensor.
#[test]
fn commutator_identity() {
    let cat = catalog();
    let mut count = 0;
    for k in 0..20 {
        let s = &cat[(k * 5 + 2) % cat.len()];
        let mut rng = stream(k as u64, &s.name, "commutator");
        let p = &sample_points(s, &mut rng, 1)[0];
        let pack = curvature_pack::<f64>(s, p, 4).unwrap();
        let x = covector_jets(&random_covector(s, &mut rng, 3), s, &crate::jets::JetSpace::new(p, 3))
            .unwrap();
        let x = ComponentTensor::from_entries(s.dim, vec![Variance::Contra], x.into_entries());
        let nx = covariant_derivative(&x, &pack.gamma).unwrap();
        let nnx = covariant_derivative(&nx, &pack.gamma).unwrap().values();
        let xv = x.values();
        let rm = pack.riem_mixed.values();
        let n = s.dim;
        let mut res: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let lhs = nnx.get(&[a, b, c]) - nnx.get(&[b, a, c]);
                    let rhs: f64 = (0..n).map(|d| rm.get(&[a, b, c, d]) * xv.get(&[d])).sum();
                    res = res.max((lhs - rhs).abs());
                    scale = scale.max(lhs.abs()).max(rhs.abs());
                }
            }
        }
        assert!(res < 1e-10 * scale.max(1.0), "{} residual {res}", s.name);
        count += 1;
    }
    assert_eq!(count, 20);
}

#[test]
fn second_bianchi() {
    for s in catalog() {
        let mut rng = stream(5, &s.name, "bianchi");
        let p = &sample_points(&s, &mut rng, 1)[0];
        let pack = curvature_pack::<f64>(&s, p, 4).unwrap();
        let nr = pack.nabla_riem.values();
        let n = s.dim;
        let scale: f64 = nr.max_abs::<f64>() + pack.curvature_scale() + 1e-12;
        let mut res: f64 = 0.0;
        for i in nr.indices() {
            let (e, a, b, c, d) = (i[0], i[1], i[2], i[3], i[4]);
            let v = nr.get(&[e, a, b, c, d]) + nr.get(&[a, b, e, c, d]) + nr.get(&[b, e, a, c, d]);
            res = res.max(v.abs());
        }
        assert!(res < 1e-10 * scale, "{} {res}", s.name);
        // contracted: ∇^e R_ed = 0 on Einstein backgrounds
        let nric = covariant_derivative(&pack.ricci, &pack.gamma).unwrap().values();
        for d in 0..n {
            let div: f64 = (0..n)
                .flat_map(|a| (0..n).map(move |e| (a, e)))
                .map(|(a, e)| pack.m.g_inv[(a, e)] * nric.get(&[a, e, d]))
                .sum();
            assert!(div.abs() < 1e-9 * scale.max(1.0), "{} {div}", s.name);
        }
    }
}

fn points_for(s: &MetricSpec, n: usize) -> Vec<Vec<f64>> {
    sample_points(s, &mut stream(1, &s.name, "classify"), n)
}

#[test]
fn classify_sphere_radius_two() {
    let mut p = default_params("sphere");
    p.insert("r".into(), 2.0);
    let s = builtin_background("sphere", 3, &p).unwrap();
    let c = classify_background(&s, &points_for(&s, 4), 1e-9).unwrap();
    assert!(c.is_einstein && c.is_constant_curvature);
    assert!((c.lambda - 0.5).abs() < 1e-12);
    assert!((c.kappa - 0.25).abs() < 1e-12);
}

#[test]
fn classify_schwarzschild() {
    let s = builtin("schwarzschild", 4);
    let c = classify_background(&s, &points_for(&s, 4), 1e-9).unwrap();
    assert!(c.is_einstein);
    assert!(c.lambda.abs() < 1e-9);
    assert!(!c.is_constant_curvature);
    assert!(c.cc_residual > 1e-3);
    assert_eq!(c.signature, (3, 1));
}

#[test]
fn classify_minkowski_and_de_sitter() {
    let s = builtin("flat_minkowski", 3);
    let c = classify_background(&s, &points_for(&s, 3), 1e-9).unwrap();
    assert!(c.is_einstein && c.is_constant_curvature);
    assert_eq!((c.lambda, c.kappa), (0.0, 0.0));
    let s = builtin("de_sitter_static", 4);
    let c = classify_background(&s, &points_for(&s, 3), 1e-9).unwrap();
    assert!(c.is_einstein && c.is_constant_curvature);
    assert!((c.lambda - 0.75).abs() < 1e-10);
}

#[test]
fn classify_rejects_non_einstein_and_few_points() {
    let s = parse_metric_file(
        "dim 2\ncoords x y\ng[0][0] = 1\ng[1][1] = 1 + x^2\ndomain x in (-1, 1)\ndomain y in (-1, 1)",
    )
    .unwrap();
    let c = classify_background(&s, &points_for(&s, 5), 1e-9).unwrap();
    assert!(!c.is_einstein && !c.is_constant_curvature);
    assert!(c.lambda_spread > 1e-3);
    assert!(matches!(
        classify_background(&s, &points_for(&s, 1), 1e-9),
        Err(crate::Error::InsufficientSamples { needed: 2, got: 1 })
    ));
}

#[test]
fn lie_derivative_of_killing_fields() {
    let s = builtin("flat_euclidean", 2);
    let c = [Expr::num(0.7), Expr::num(-1.2)];
    let l = lie_derivative_metric(&c, &s, &[0.2, 0.3]).unwrap();
    assert_eq!(l.max_abs::<f64>(), 0.0);
    let rot = [Expr::neg(Expr::coord(1)), Expr::coord(0)];
    let l = lie_derivative_metric(&rot, &s, &[0.2, 0.3]).unwrap();
    assert_eq!(l.max_abs::<f64>(), 0.0);
    // sphere rotation about the pole: X = ∂_φ, X_φ = sin²θ
    let sp = builtin("sphere", 2);
    let x = [Expr::num(0.0), parse_expression("sin(theta)^2", &["theta", "phi"], &[]).unwrap()];
    let l = lie_derivative_metric(&x, &sp, &[1.0, 1.0]).unwrap();
    assert!(l.max_abs::<f64>() < 1e-15);
}

#[test]
fn symbolic_lie_derivative_matches_jets() {
    for s in catalog() {
        let mut rng = stream(2, &s.name, "lie");
        let x_up = random_covector(&s, &mut rng, 2);
        let h = lie_derivative_expressions(&s, &x_up);
        let p = &sample_points(&s, &mut rng, 1)[0];
        let m = evaluate_metric_jet::<f64>(&s, p, 2).unwrap();
        let xu = covector_jets(&x_up, &s, &m.space()).unwrap();
        // lower to a covector and feed the jet routine
        let n = s.dim;
        let x_low: Vec<Jet<f64>> = (0..n)
            .map(|a| (0..n).fold(m.space().zero(), |acc, c| acc + m.g_jet.get(&[a, c]) * xu.get(&[c])))
            .collect();
        let l = lie_derivative_from_jets(&s, p, &x_low);
        for a in 0..n {
            for b in 0..n {
                let v = h[a * n + b].eval(p, &s.param_values()).unwrap();
                let scale = 1.0 + v.abs();
                assert!((v - l[a * n + b]).abs() < 1e-10 * scale, "{}", s.name);
            }
        }
    }
}

/// Coordinate formula applied to a lowered field given directly as jets.
fn lie_derivative_from_jets(s: &MetricSpec, p: &[f64], x_low: &[Jet<f64>]) -> Vec<f64> {
    let n = s.dim;
    let m = evaluate_metric_jet::<f64>(s, p, 2).unwrap();
    let xu: Vec<Jet<f64>> = (0..n)
        .map(|c| (0..n).fold(m.space().zero(), |acc, d| acc + m.g_inv_jet.get(&[c, d]) * &x_low[d]))
        .collect();
    let mut out = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let mut v = 0.0;
            for c in 0..n {
                v += xu[c].value() * m.g_jet.get(&[a, b]).derivative(&unit(n, c)).unwrap();
                v += xu[c].derivative(&unit(n, a)).unwrap() * m.g[(c, b)];
                v += xu[c].derivative(&unit(n, b)).unwrap() * m.g[(a, c)];
            }
            out[a * n + b] = v;
        }
    }
    out
}

fn unit(n: usize, i: usize) -> Vec<u8> {
    let mut v = vec![0u8; n];
    v[i] = 1;
    v
}
