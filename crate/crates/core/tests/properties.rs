//! Property tests for jets, the metric language and curvature.

use einstein_deform::geometry::curvature_pack;
use einstein_deform::jets::{fd_derivative, Jet, JetSpace};
use einstein_deform::metric_dsl::{evaluate_metric_jet, parse_expression, parse_metric_file, MetricSpec};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

/// A point together with two random jets of the given dimension and order.
fn jet_pair(dim: usize, order: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    let len = JetSpace::new(&vec![0.0; dim], order).zero().coeffs().len();
    (
        prop::collection::vec(-1.0..1.0f64, dim),
        prop::collection::vec(coeff(), len),
        prop::collection::vec(coeff(), len),
    )
}

fn close(a: &Jet<f64>, b: &Jet<f64>, tol: f64) -> bool {
    a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

/// Small expressions in `x`, `y`, smooth on `[-1, 1]²`.
fn smooth_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        (-3.0..3.0f64).prop_map(|c| format!("({c})")),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("exp(0.3 * {a})")),
            inner.prop_map(|a| format!("({a})^2")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leibniz_rule((p, a, b) in jet_pair(3, 4), var in 0usize..3) {
        let s = JetSpace::new(&p, 4);
        let (a, b) = (s.from_coeffs(a), s.from_coeffs(b));
        let lhs = (&a * &b).partial(var).unwrap();
        let rhs = &a.partial(var).unwrap() * &b.truncate(3) + &a.truncate(3) * &b.partial(var).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn ring_laws((p, a, b) in jet_pair(2, 5)) {
        let s = JetSpace::new(&p, 5);
        let (a, b) = (s.from_coeffs(a), s.from_coeffs(b));
        prop_assert!(close(&(&a * &b), &(&b * &a), 1e-14));
        let c = &a + &b;
        prop_assert!(close(&(&c * &a), &(&(&a * &a) + &(&b * &a)), 1e-12));
    }

    #[test]
    fn division_inverts_multiplication((p, a, b) in jet_pair(2, 4)) {
        let s = JetSpace::new(&p, 4);
        let a = s.from_coeffs(a);
        let mut b = b;
        b[0] = 3.0 + b[0].abs();
        let b = s.from_coeffs(b);
        let q = (&a * &b).try_div(&b).unwrap();
        prop_assert!(close(&q, &a, 1e-10));
    }

    #[test]
    fn exp_ln_round_trip((p, a, _b) in jet_pair(2, 4)) {
        let s = JetSpace::new(&p, 4);
        let mut a = a;
        a[0] = 1.0 + a[0].abs();
        let a = s.from_coeffs(a);
        prop_assert!(close(&a.ln().unwrap().exp(), &a, 1e-10));
    }

    #[test]
    fn jets_agree_with_finite_differences(text in smooth_expr(), x in -0.8..0.8f64, y in -0.8..0.8f64) {
        let e = parse_expression(&text, &["x", "y"], &[]).unwrap();
        let p = [x, y];
        let j = e.eval_jet(&JetSpace::new(&p, 2), &[]).unwrap();
        for alpha in [[1u8, 0], [0, 1], [2, 0], [1, 1], [0, 2]] {
            let exact = j.derivative(&alpha).unwrap();
            let fd = fd_derivative(&e, &[], &p, &alpha).unwrap();
            let scale = 1.0 + j.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
            prop_assert!((exact - fd).abs() <= 1e-5 * scale, "{text}: {alpha:?} jet {exact} fd {fd}");
        }
    }

    #[test]
    fn metric_files_round_trip(diag in prop::collection::vec((0.5..2.0f64, -0.4..0.4f64), 3), off in -0.2..0.2f64, x in -0.5..0.5f64, y in -0.5..0.5f64, z in -0.5..0.5f64) {
        let mut text = String::from("name roundtrip\ndim 3\ncoords x y z\nparam a = 0.25\n");
        for (i, (c, k)) in diag.iter().enumerate() {
            text.push_str(&format!("g[{i}][{i}] = {c} + {k}*x^2 + a*sin(y)^2\n"));
        }
        text.push_str(&format!("g[0][2] = {off}*x*z\n"));
        for v in ["x", "y", "z"] {
            text.push_str(&format!("domain {v} in (-1, 1)\n"));
        }
        let spec: MetricSpec = parse_metric_file(&text).unwrap();
        let again = parse_metric_file(&spec.to_dsl()).unwrap();
        prop_assert_eq!(again.dim, 3);
        let p = [x, y, z];
        let m1 = evaluate_metric_jet::<f64>(&spec, &p, 2).unwrap();
        let m2 = evaluate_metric_jet::<f64>(&again, &p, 2).unwrap();
        prop_assert!(m1.g_jet.max_abs_diff(&m2.g_jet) <= 1e-14);
    }

    #[test]
    fn riemann_has_its_symmetries(c in prop::collection::vec(-0.3..0.3f64, 4), x in -0.5..0.5f64, y in -0.5..0.5f64, z in -0.5..0.5f64) {
        let text = format!(
            "name warped\ndim 3\ncoords x y z\ng[0][0] = 1 + {}*y^2\ng[1][1] = exp({}*x)\ng[2][2] = 1 + {}*x*y\ng[0][1] = {}*z\n\
             domain x in (-1, 1)\ndomain y in (-1, 1)\ndomain z in (-1, 1)\n",
            c[0], c[1], c[2], c[3]
        );
        let spec = parse_metric_file(&text).unwrap();
        let pack = curvature_pack::<f64>(&spec, &[x, y, z], 3).unwrap();
        let r = pack.riem_low.values().check_riemann_symmetries().unwrap();
        prop_assert!(r.max_residual() <= 1e-12 * (1.0 + pack.curvature_scale()));
    }
}
