use einstein_deform::error::Error;
use einstein_deform::harness::{emit_report, resolve_backgrounds, run_suite, Format, OracleConfig, Status};
use einstein_deform::metric_dsl::{builtin_background, default_params, parse_metric_file, MetricSpec, Params};

fn builtin(name: &str, dim: usize) -> MetricSpec {
    builtin_background(name, dim, &default_params(name)).unwrap()
}

fn small() -> OracleConfig {
    OracleConfig {
        points_per_background: 4,
        fields_per_point: 2,
        perturbations: 2,
        ..OracleConfig::default()
    }
}

#[test]
fn dichotomy_separates_constant_curvature_from_schwarzschild() {
    let bgs = vec![
        builtin("sphere", 3),
        builtin("hyperbolic", 3),
        builtin("flat_euclidean", 3),
        builtin("schwarzschild", 4),
    ];
    let bundle = run_suite("dichotomy", &small(), &bgs).unwrap();
    assert!(bundle.pass);
    for r in &bundle.reports[..3] {
        assert!(r.checks.iter().any(|c| c.name == "ck_formula_vanishes" && c.pass));
    }
    let witness = bundle.reports[3].checks.iter().find(|c| c.name == "ck_formula_witness").unwrap();
    assert!(witness.relative > 1e-4);
}

#[test]
fn reports_follow_background_then_suite_order() {
    let bgs = vec![builtin("flat_minkowski", 2), builtin("sphere", 2)];
    let bundle = run_suite("all", &small(), &bgs).unwrap();
    let keys: Vec<(String, String)> = bundle
        .reports
        .iter()
        .map(|r| (r.background.clone(), r.suite.clone()))
        .collect();
    let suites = ["complex", "dichotomy", "perturbation", "kernel", "internal"];
    let want: Vec<(String, String)> = ["flat_minkowski", "sphere"]
        .iter()
        .flat_map(|b| suites.iter().map(move |s| (b.to_string(), s.to_string())))
        .collect();
    assert_eq!(keys, want);
    assert_eq!(bundle.exit_code(), 0);
}

#[test]
fn kernel_refuses_non_einstein_backgrounds() {
    let text = "name bumpy\ndim 2\ncoords x y\ng[0][0] = 1\ng[1][1] = 1 + x^2\ndomain x in (-1, 1)\ndomain y in (-1, 1)\n";
    let spec = parse_metric_file(text).unwrap();
    let bundle = run_suite("kernel", &small(), &[spec]).unwrap();
    assert_eq!(bundle.status(), Status::Fail);
    let r = &bundle.reports[0];
    assert_eq!(r.checks[0].name, "background_is_einstein");
    assert!(r.slopes.is_empty());
}

#[test]
fn flat_backgrounds_saturate_for_constant_perturbations() {
    let bundle = run_suite("perturbation", &small(), &[builtin("flat_euclidean", 3)]).unwrap();
    let c = bundle.reports[0].checks.iter().find(|c| c.name == "flat_constant_h_stays_flat").unwrap();
    assert!(c.pass);
    let k = run_suite("kernel", &small(), &[builtin("flat_euclidean", 3)]).unwrap();
    assert!(k.reports[0].slopes.iter().any(|s| s.name == "constant_multiple_of_g" && s.pass));
}

#[test]
fn mutations_are_caught_on_schwarzschild() {
    let bundle = run_suite("perturbation", &small(), &[builtin("schwarzschild", 4)]).unwrap();
    let r = &bundle.reports[0];
    assert!(r.pass);
    for s in r.slopes.iter().filter(|s| s.name.starts_with("mutation")) {
        let v = s.fitted_slope.unwrap();
        assert!((0.8..=1.2).contains(&v), "{} {v}", s.name);
    }
    for s in r.slopes.iter().filter(|s| s.name.starts_with("ricci_first_order")) {
        let v = s.fitted_slope.unwrap();
        assert!((1.8..=2.2).contains(&v), "{} {v}", s.name);
    }
}

#[test]
fn same_seed_same_bytes() {
    let bgs = vec![builtin("hyperbolic", 2)];
    let a = emit_report(&run_suite("internal", &small(), &bgs).unwrap(), Format::Json);
    let b = emit_report(&run_suite("internal", &small(), &bgs).unwrap(), Format::Json);
    assert_eq!(a, b);
}

#[test]
fn bad_requests() {
    assert!(matches!(run_suite("bogus", &small(), &[]), Err(Error::UnknownSuite(_))));
    let mut c = small();
    c.points_per_background = 1;
    assert!(matches!(run_suite("complex", &c, &[]), Err(Error::InvalidConfig(_))));
    let none = Params::new();
    assert_eq!(resolve_backgrounds("all", None, &none).unwrap().len(), 14);
    assert_eq!(resolve_backgrounds("all", Some(4), &none).unwrap().len(), 6);
    assert_eq!(resolve_backgrounds("sphere", None, &none).unwrap().len(), 3);
    assert!(matches!(resolve_backgrounds("torus", None, &none), Err(Error::UnknownBackground(_))));
    assert!(matches!(resolve_backgrounds("missing.metric", None, &none), Err(Error::Io(_))));
    let mut r2 = Params::new();
    r2.insert("r".into(), 2.0);
    let s = resolve_backgrounds("sphere", Some(2), &r2).unwrap();
    assert_eq!(s[0].params, vec![("r".to_string(), 2.0)]);
}

/// A linear `h` on a flat chart has constant first derivatives, so the
/// perturbed Christoffels are `O(ε)` and the curvature `O(ε²)`: the Riemann
/// residual converges at slope 2 rather than sitting at roundoff. Only a
/// constant `h` keeps the chart flat.
#[test]
fn linear_perturbation_of_flat_space_curves_at_second_order() {
    use einstein_deform::harness::{fit_slope, perturbed_metric_pack, SlopeVerdict};
    use einstein_deform::metric_dsl::parse_expression;
    let spec = builtin("flat_euclidean", 2);
    let e = |s: &str| parse_expression(s, &["x", "y"], &[]).unwrap();
    let h = vec![e("x + 2*y"), e("0.5*x"), e("0.5*x"), e("y - x")];
    let point = [0.3, -0.2];
    let ladder = OracleConfig::default().epsilons;
    let res: Vec<f64> = ladder
        .iter()
        .map(|&eps| perturbed_metric_pack(&spec, &h, eps, &point, 3).unwrap().pack.riem_low.values().max_abs())
        .collect();
    let fit = fit_slope(&ladder, &res, None);
    assert_eq!(fit.verdict, SlopeVerdict::Fitted);
    assert!((fit.slope.unwrap() - 2.0).abs() < 0.05, "{fit:?}");
}
