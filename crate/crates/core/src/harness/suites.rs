//! The verification suites.

use std::time::Instant;

use rayon::prelude::*;

use super::fd_curvature::fd_curvature;
use super::oracle::{cap_epsilons, fit_slope, perturbed_metric_pack, OracleConfig, PerturbedPack};
use super::report::{CheckBuilder, ReportBundle, SlopeCheck, VerificationReport};
use super::sampling::{random_covector, random_polynomial, random_symmetric, sample_points, stream};
use crate::error::{Error, Result};
use crate::geometry::{
    classify_background, covariant_derivative, covector_jets, curvature_pack,
    lie_derivative_expressions, lie_derivative_metric, CurvaturePack, EinsteinCertificate,
};
use crate::jets::JetSpace;
use crate::metric_dsl::{
    builtin_background, builtin_catalog, default_params, documented_status, parse_metric_file,
    Expr, MetricSpec, Params, BUILTIN_NAMES,
};
use crate::operators::{
    calabi_c, ck_formula, killing_with_pack, linearised_ricci, linearised_riemann,
    operator_p_paths, trace_identity_check, Perturbation, PerturbationSource, FIELD_ORDER,
};
use crate::tensor::{ComponentTensor, Variance};

/// Polynomial degree of random fields.
pub const FIELD_DEGREE: usize = 3;
/// Tolerance for classifying backgrounds.
pub const CLASSIFY_TOLERANCE: f64 = 1e-9;

pub const SLOPE_SECOND_ORDER: [f64; 2] = [1.8, 2.2];
pub const SLOPE_FIRST_ORDER: [f64; 2] = [0.8, 1.2];
/// Ladder points fitted for the Calabi-sign mutation.
pub const CALABI_SIGN_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Complex,
    Dichotomy,
    Perturbation,
    Kernel,
    Internal,
    Gauge,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Complex,
        Suite::Dichotomy,
        Suite::Perturbation,
        Suite::Kernel,
        Suite::Internal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Complex => "complex",
            Suite::Dichotomy => "dichotomy",
            Suite::Perturbation => "perturbation",
            Suite::Kernel => "kernel",
            Suite::Internal => "internal",
            Suite::Gauge => "gauge",
        }
    }

    /// Expands a suite name; `all` runs every suite except the `gauge`
    /// subset, which `internal` already covers.
    pub fn expand(name: &str) -> Result<Vec<Suite>> {
        Ok(match name {
            "all" => Suite::ALL.to_vec(),
            "complex" => vec![Suite::Complex],
            "dichotomy" => vec![Suite::Dichotomy],
            "perturbation" => vec![Suite::Perturbation],
            "kernel" => vec![Suite::Kernel],
            "internal" => vec![Suite::Internal],
            "gauge" => vec![Suite::Gauge],
            other => return Err(Error::UnknownSuite(other.into())),
        })
    }
}

/// Runs `suite` on every background. Reports come out in background order,
/// then suite order, whatever the thread scheduling.
pub fn run_suite(suite: &str, config: &OracleConfig, backgrounds: &[MetricSpec]) -> Result<ReportBundle> {
    config.validate()?;
    let suites = Suite::expand(suite)?;
    let tasks: Vec<(&MetricSpec, Suite)> = backgrounds
        .iter()
        .flat_map(|b| suites.iter().map(move |s| (b, *s)))
        .collect();
    let reports = tasks
        .par_iter()
        .map(|(b, s)| run_one(*s, b, config))
        .collect();
    Ok(ReportBundle::new(suite, config.seed, reports))
}

pub fn run_one(suite: Suite, spec: &MetricSpec, config: &OracleConfig) -> VerificationReport {
    let start = Instant::now();
    let mut report = VerificationReport::new(suite.name(), &spec.name, spec.dim, config.seed);
    let ctx = Context::new(spec, config);
    match suite {
        Suite::Complex => complex(&ctx, &mut report),
        Suite::Dichotomy => dichotomy(&ctx, &mut report),
        Suite::Perturbation => perturbation(&ctx, &mut report),
        Suite::Kernel => kernel(&ctx, &mut report),
        Suite::Internal => internal(&ctx, &mut report),
        Suite::Gauge => gauge(&ctx, &mut report),
    }
    report.seal();
    report.wall_time = start.elapsed().as_secs_f64();
    report
}

struct Context<'a> {
    spec: &'a MetricSpec,
    config: &'a OracleConfig,
    points: Vec<Vec<f64>>,
}

impl<'a> Context<'a> {
    fn new(spec: &'a MetricSpec, config: &'a OracleConfig) -> Self {
        let mut rng = stream(config.seed, &spec.name, "points");
        let points = sample_points(spec, &mut rng, config.points_per_background);
        Context {
            spec,
            config,
            points,
        }
    }

    fn rng(&self, purpose: &str, index: usize) -> rand_chacha::ChaCha8Rng {
        stream(self.config.seed, &self.spec.name, &format!("{purpose}/{index}"))
    }

    fn pack(&self, point: &[f64]) -> Result<CurvaturePack<f64>> {
        curvature_pack(self.spec, point, self.config.jet_order)
    }

    fn classify(&self) -> Result<EinsteinCertificate> {
        classify_background(self.spec, &self.points, CLASSIFY_TOLERANCE)
    }

    fn is_flat(&self, pack: &CurvaturePack<f64>) -> bool {
        pack.curvature_scale() <= 1e-12
    }

    fn random_perturbation(&self, rng: &mut impl rand::Rng, pack: &CurvaturePack<f64>) -> Result<(Vec<Expr>, Perturbation<f64>)> {
        let h = random_symmetric(self.spec, rng, FIELD_DEGREE);
        let p = Perturbation::from_expressions(
            &h,
            self.spec,
            &pack.m,
            FIELD_ORDER,
            PerturbationSource::RandomPolynomial,
        )?;
        Ok((h, p))
    }
}

fn fail_all(builders: &mut [&mut CheckBuilder], e: &Error) {
    for b in builders {
        b.fail_with(e);
    }
}

fn complex(ctx: &Context, report: &mut VerificationReport) {
    let mut pk = CheckBuilder::below("p_of_killing_vanishes", 1e-8);
    let mut ck = CheckBuilder::below("calabi_of_killing_equals_ck_formula", 1e-10);
    let mut paths = CheckBuilder::below("p_path_agreement", 1e-10);
    for (i, p) in ctx.points.iter().enumerate() {
        let pack = match ctx.pack(p) {
            Ok(pk) => pk,
            Err(e) => {
                fail_all(&mut [&mut pk, &mut ck, &mut paths], &e);
                break;
            }
        };
        let mut rng = ctx.rng("complex", i);
        for _ in 0..ctx.config.fields_per_point {
            let x = random_covector(ctx.spec, &mut rng, FIELD_DEGREE);
            let r = (|| {
                let kd = killing_with_pack(&x, ctx.spec, &pack)?;
                let h = kd.perturbation(&pack.m)?;
                let p = operator_p_paths(&h, &pack)?;
                let c = calabi_c(&h, &pack)?;
                let f = ck_formula(&kd, &pack)?;
                Ok((p, c, f))
            })();
            match r {
                Ok((p, c, f)) => {
                    pk.record(p.value.max_abs(), p.scale);
                    paths.record(p.residual, p.scale);
                    ck.record(c.value.max_abs_diff(&f.value), c.scale.max(f.scale));
                }
                Err(e) => fail_all(&mut [&mut pk, &mut ck, &mut paths], &e),
            }
        }
    }
    report.push(pk);
    report.push(ck);
    report.push(paths);
}

fn dichotomy(ctx: &Context, report: &mut VerificationReport) {
    let cert = match ctx.classify() {
        Ok(c) => c,
        Err(e) => {
            let mut c = CheckBuilder::below("classification", 0.0);
            c.fail_with(&e);
            report.push(c);
            return;
        }
    };
    if BUILTIN_NAMES.contains(&ctx.spec.name.as_str()) {
        if let Some(doc) = documented_status(&ctx.spec.name) {
            let mut c = CheckBuilder::below("classification_matches_catalog", 0.5);
            let agree = doc.einstein == cert.is_einstein
                && doc.constant_curvature == cert.is_constant_curvature;
            c.record(if agree { 0.0 } else { 1.0 }, 1.0);
            report.push(c);
        }
    }
    let mut c = if cert.is_constant_curvature {
        CheckBuilder::below("ck_formula_vanishes", 1e-10)
    } else {
        CheckBuilder::above("ck_formula_witness", 1e-4)
    };
    for (i, p) in ctx.points.iter().enumerate() {
        let pack = match ctx.pack(p) {
            Ok(pk) => pk,
            Err(e) => {
                c.fail_with(&e);
                break;
            }
        };
        let mut rng = ctx.rng("dichotomy", i);
        for _ in 0..ctx.config.fields_per_point {
            let x = random_covector(ctx.spec, &mut rng, FIELD_DEGREE);
            c.record_result((|| {
                let kd = killing_with_pack(&x, ctx.spec, &pack)?;
                let f = ck_formula(&kd, &pack)?;
                Ok((f.value.max_abs(), f.scale))
            })());
        }
    }
    report.push(c);
}

/// Perturbed packs along a capped ladder.
fn ladder_packs(ctx: &Context, h: &[Expr], point: &[f64]) -> Result<(Vec<f64>, Vec<PerturbedPack>)> {
    let eps = cap_epsilons(ctx.spec, h, point, &ctx.config.epsilons)?;
    let packs = eps
        .iter()
        .map(|&e| perturbed_metric_pack(ctx.spec, h, e, point, 3))
        .collect::<Result<Vec<_>>>()?;
    Ok((eps, packs))
}

fn slope(ctx: &Context, name: &str, eps: &[f64], residuals: Vec<f64>, expected: [f64; 2], saturation_passes: bool) -> SlopeCheck {
    SlopeCheck::from_fit(
        name,
        Ok(fit_slope(eps, &residuals, ctx.config.slope_window)),
        expected,
        saturation_passes,
    )
}

fn perturbation(ctx: &Context, report: &mut VerificationReport) {
    let names = [
        "riemann_first_order",
        "ricci_first_order",
        "inverse_metric_first_order",
        "mutation_flipped_bracket",
        "mutation_calabi_sign",
    ];
    for k in 0..ctx.config.perturbations {
        let point = &ctx.points[k % ctx.points.len()];
        let mut rng = ctx.rng("perturbation", k);
        let mut run = || -> Result<Vec<SlopeCheck>> {
            let pack = ctx.pack(point)?;
            let (h, pert) = ctx.random_perturbation(&mut rng, &pack)?;
            let bracket = linearised_riemann(&pert, &pack)?.value;
            let ric1 = linearised_ricci(&pert, &pack)?.value;
            let ch = calabi_c(&pert, &pack)?.value;
            let (eps, tilde) = ladder_packs(ctx, &h, point)?;
            let r0 = pack.riem_low.values();
            let ric0 = pack.ricci.values();
            let mut res = vec![Vec::new(); 5];
            for (&e, t) in eps.iter().zip(&tilde) {
                let rt = t.pack.riem_low.values();
                let diff = rt.sub(&r0);
                res[0].push(diff.max_abs_diff(&bracket.scale(-0.5 * e)));
                let dric = t.pack.ricci.values().sub(&ric0);
                res[1].push(dric.max_abs_diff(&ric1.scale(e)));
                res[2].push(t.inverse_residual);
                res[3].push(diff.max_abs_diff(&bracket.scale(0.5 * e)));
                res[4].push(diff.max_abs_diff(&ch.scale(-0.5 * e)));
            }
            let mut out = Vec::new();
            for (j, r) in res.into_iter().enumerate() {
                // On flat backgrounds the Calabi sign coincides with the bracket.
                if j == 4 && ctx.is_flat(&pack) {
                    continue;
                }
                let name = format!("{}/h{k}", names[j]);
                if j == 4 {
                    // Its first-order error is small next to the second-order
                    // one at the coarse end, so only the fine tail is fitted.
                    let fit = fit_slope(&eps, &r, Some(CALABI_SIGN_WINDOW.min(eps.len())));
                    out.push(SlopeCheck::from_fit(&name, Ok(fit), SLOPE_FIRST_ORDER, false));
                    continue;
                }
                let (expected, sat) = if j < 3 {
                    (SLOPE_SECOND_ORDER, true)
                } else {
                    (SLOPE_FIRST_ORDER, false)
                };
                out.push(slope(ctx, &name, &eps, r, expected, sat));
            }
            Ok(out)
        };
        match run() {
            Ok(v) => v.into_iter().for_each(|s| report.push_slope(s)),
            Err(e) => report.push_slope(SlopeCheck::from_fit(
                &format!("perturbation/h{k}"),
                Err(e),
                SLOPE_SECOND_ORDER,
                true,
            )),
        }
    }
    // A constant perturbation of a flat metric is again flat.
    let first = ctx.points.first().and_then(|p| ctx.pack(p).ok());
    if let Some(pack) = first.filter(|p| ctx.is_flat(p)) {
        let mut c = CheckBuilder::below("flat_constant_h_stays_flat", 1e-12);
        let mut rng = ctx.rng("perturbation/constant", 0);
        let h = random_symmetric(ctx.spec, &mut rng, 0);
        match ladder_packs(ctx, &h, &pack.point) {
            Ok((_, tilde)) => {
                for t in tilde {
                    c.record(t.pack.curvature_scale(), 1.0);
                }
            }
            Err(e) => c.fail_with(&e),
        }
        report.push(c);
    }
}

/// `max|Ric(g̃) − λ g̃|` along the ladder.
fn einstein_deviation(ctx: &Context, h: &[Expr], point: &[f64], lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (eps, tilde) = ladder_packs(ctx, h, point)?;
    let res = tilde
        .iter()
        .map(|t| t.pack.ricci.values().max_abs_diff(&t.pack.m.g.scale(lambda)))
        .collect();
    Ok((eps, res))
}

fn kernel(ctx: &Context, report: &mut VerificationReport) {
    let cert = match ctx.classify() {
        Ok(c) => c,
        Err(e) => {
            let mut c = CheckBuilder::below("background_is_einstein", CLASSIFY_TOLERANCE);
            c.fail_with(&e);
            report.push(c);
            return;
        }
    };
    let mut einstein = CheckBuilder::below("background_is_einstein", CLASSIFY_TOLERANCE);
    einstein.record(cert.einstein_residual.max(cert.lambda_spread), 1.0);
    report.push(einstein);
    if !cert.is_einstein {
        return;
    }
    let lambda = cert.lambda;
    let mut p_gauge = CheckBuilder::below("p_of_gauge_h_vanishes", 1e-8);
    let mut p_generic = CheckBuilder::above("p_of_generic_h_nonzero", 1e-5);
    for k in 0..ctx.config.perturbations {
        let point = &ctx.points[k % ctx.points.len()];
        let mut rng = ctx.rng("kernel", k);
        let x_up = random_covector(ctx.spec, &mut rng, FIELD_DEGREE);
        let gauge_h = lie_derivative_expressions(ctx.spec, &x_up);
        let generic_h = random_symmetric(ctx.spec, &mut rng, FIELD_DEGREE);
        for (h, name, expected, sat, check) in [
            (&gauge_h, "gauge_h_preserves_einstein", SLOPE_SECOND_ORDER, true, &mut p_gauge),
            (&generic_h, "generic_h_breaks_einstein", SLOPE_FIRST_ORDER, false, &mut p_generic),
        ] {
            check.record_result((|| {
                let pack = ctx.pack(point)?;
                let pert = Perturbation::from_expressions(h, ctx.spec, &pack.m, FIELD_ORDER, PerturbationSource::Expressions)?;
                let p = operator_p_paths(&pert, &pack)?;
                Ok((p.value.max_abs(), p.scale))
            })());
            let s = match einstein_deviation(ctx, h, point, lambda) {
                Ok((eps, r)) => slope(ctx, &format!("{name}/h{k}"), &eps, r, expected, sat),
                Err(e) => SlopeCheck::from_fit(&format!("{name}/h{k}"), Err(e), expected, sat),
            };
            report.push_slope(s);
        }
    }
    report.push(p_gauge);
    report.push(p_generic);
    // h = c·g is in the kernel on flat backgrounds.
    let first = ctx.points.first().and_then(|p| ctx.pack(p).ok());
    if let Some(pack) = first.filter(|p| ctx.is_flat(p)) {
        let mut rng = ctx.rng("kernel/scaling", 0);
        let c = random_polynomial(ctx.spec, &mut rng, 0);
        let n = ctx.spec.dim;
        let h: Vec<Expr> = (0..n * n)
            .map(|k| Expr::mul(c.clone(), ctx.spec.component(k / n, k % n).clone()))
            .collect();
        let s = match einstein_deviation(ctx, &h, &pack.point, lambda) {
            Ok((eps, r)) => slope(ctx, "constant_multiple_of_g", &eps, r, SLOPE_SECOND_ORDER, true),
            Err(e) => SlopeCheck::from_fit("constant_multiple_of_g", Err(e), SLOPE_SECOND_ORDER, true),
        };
        report.push_slope(s);
    }
}

fn gauge_check(ctx: &Context, pack: &CurvaturePack<f64>, x: &[Expr]) -> Result<(f64, f64)> {
    let kd = killing_with_pack(x, ctx.spec, pack)?;
    let l = lie_derivative_metric(x, ctx.spec, &pack.point)?;
    Ok((kd.h.values().scale(2.0).max_abs_diff(&l), l.max_abs()))
}

fn gauge(ctx: &Context, report: &mut VerificationReport) {
    let mut c = CheckBuilder::below("lie_derivative_equals_twice_killing", 1e-10);
    for (i, p) in ctx.points.iter().enumerate() {
        let mut rng = ctx.rng("gauge", i);
        match ctx.pack(p) {
            Ok(pack) => {
                for _ in 0..ctx.config.fields_per_point {
                    let x = random_covector(ctx.spec, &mut rng, FIELD_DEGREE);
                    c.record_result(gauge_check(ctx, &pack, &x));
                }
            }
            Err(e) => {
                c.fail_with(&e);
                break;
            }
        }
    }
    report.push(c);
}

fn internal(ctx: &Context, report: &mut VerificationReport) {
    let mut parallel = CheckBuilder::below("metric_is_parallel", 1e-12);
    let mut commutator = CheckBuilder::below("commutator_identity", 1e-10);
    let mut symmetries = CheckBuilder::below("riemann_symmetries", 1e-11);
    let mut ricci_sym = CheckBuilder::below("ricci_symmetric", 1e-11);
    let mut bianchi2 = CheckBuilder::below("second_bianchi", 1e-10);
    let mut contracted = CheckBuilder::below("contracted_bianchi", 1e-9);
    let mut calabi_sym = CheckBuilder::below("calabi_riemann_symmetries", 1e-10);
    let mut bracket_sym = CheckBuilder::below("linearised_riemann_symmetries", 1e-10);
    let mut paths = CheckBuilder::below("p_path_agreement", 1e-10);
    let mut trace_ricci = CheckBuilder::below("trace_identity_ricci", 1e-10);
    let mut trace_killing = CheckBuilder::below("trace_identity_killing", 1e-10);
    let mut gauge_id = CheckBuilder::below("lie_derivative_equals_twice_killing", 1e-10);
    let mut fd = CheckBuilder::below("jet_vs_finite_difference", 1e-6);
    for (i, p) in ctx.points.iter().enumerate() {
        let pack = match ctx.pack(p) {
            Ok(pk) => pk,
            Err(e) => {
                fail_all(
                    &mut [
                        &mut parallel, &mut commutator, &mut symmetries, &mut ricci_sym,
                        &mut bianchi2, &mut contracted, &mut calabi_sym, &mut bracket_sym,
                        &mut paths, &mut trace_ricci, &mut trace_killing, &mut gauge_id, &mut fd,
                    ],
                    &e,
                );
                break;
            }
        };
        let mut rng = ctx.rng("internal", i);
        let n = ctx.spec.dim;
        let curv = pack.curvature_scale();

        parallel.record_result((|| {
            let ng = covariant_derivative(&pack.m.g_jet.truncate(3), &pack.gamma)?;
            Ok((ng.max_abs(), pack.m.g.max_abs()))
        })());

        let x = random_covector(ctx.spec, &mut rng, FIELD_DEGREE);
        commutator.record_result(commutator_residual(ctx.spec, &pack, &x));

        let rl = pack.riem_low.values();
        symmetries.record_result(
            rl.check_riemann_symmetries()
                .map(|r| (r.max_residual(), curv)),
        );
        let ric = pack.ricci.values();
        let mut asym: f64 = 0.0;
        for b in 0..n {
            for d in 0..n {
                asym = asym.max((ric[(b, d)] - ric[(d, b)]).abs());
            }
        }
        ricci_sym.record(asym, curv);

        let nr = pack.nabla_riem.values();
        let nscale = nr.max_abs::<f64>() + curv;
        let mut b2: f64 = 0.0;
        for idx in nr.indices() {
            let (e, a, b, c, d) = (idx[0], idx[1], idx[2], idx[3], idx[4]);
            b2 = b2.max((nr.get(&[e, a, b, c, d]) + nr.get(&[a, b, e, c, d]) + nr.get(&[b, e, a, c, d])).abs());
        }
        bianchi2.record(b2, nscale);
        contracted.record_result((|| {
            // ∇^a R_ab − ½ ∂_b R
            let nric = covariant_derivative(&pack.ricci, &pack.gamma)?.values();
            let mut worst: f64 = 0.0;
            for b in 0..n {
                let mut div = 0.0;
                for a in 0..n {
                    for e in 0..n {
                        div += pack.m.g_inv[(a, e)] * nric.get(&[e, a, b]);
                    }
                }
                let mut alpha = vec![0u8; n];
                alpha[b] = 1;
                worst = worst.max((div - 0.5 * pack.scalar.derivative(&alpha)?).abs());
            }
            Ok((worst, nscale))
        })());

        let pert = ctx.random_perturbation(&mut rng, &pack).map(|(_, p)| p);
        let x = random_covector(ctx.spec, &mut rng, FIELD_DEGREE);
        match pert {
            Ok(pert) => {
                calabi_sym.record_result((|| {
                    let c = calabi_c(&pert, &pack)?;
                    Ok((c.value.check_riemann_symmetries()?.max_residual(), c.scale))
                })());
                bracket_sym.record_result((|| {
                    let b = linearised_riemann(&pert, &pack)?;
                    Ok((b.value.check_riemann_symmetries()?.max_residual(), b.scale))
                })());
                paths.record_result(operator_p_paths(&pert, &pack).map(|p| (p.residual, p.scale)));
                match killing_with_pack(&x, ctx.spec, &pack)
                    .and_then(|kd| trace_identity_check(&pert, &kd, &pack))
                {
                    Ok(t) => {
                        trace_ricci.record(t.ricci_cancellation, t.ricci_scale);
                        trace_killing.record(t.killing_trace, t.killing_scale);
                    }
                    Err(e) => fail_all(&mut [&mut trace_ricci, &mut trace_killing], &e),
                }
            }
            Err(e) => fail_all(
                &mut [&mut calabi_sym, &mut bracket_sym, &mut paths, &mut trace_ricci, &mut trace_killing],
                &e,
            ),
        }
        gauge_id.record_result(gauge_check(ctx, &pack, &x));

        fd.record_result((|| {
            let f = fd_curvature(ctx.spec, p)?;
            let mut worst: f64 = 0.0;
            for (a, b) in pack.gamma.values().entries().iter().zip(&f.gamma) {
                worst = worst.max((a - b).abs());
            }
            for (a, b) in rl.entries().iter().zip(&f.riem_low) {
                worst = worst.max((a - b).abs());
            }
            for (a, b) in ric.entries().iter().zip(&f.ricci) {
                worst = worst.max((a - b).abs());
            }
            Ok((worst, curv.max(1.0)))
        })());
    }
    for c in [
        parallel, commutator, symmetries, ricci_sym, bianchi2, contracted, calabi_sym,
        bracket_sym, paths, trace_ricci, trace_killing, gauge_id, fd,
    ] {
        report.push(c);
    }
}

/// `(∇_a∇_b − ∇_b∇_a) X^c − R_ab^c_d X^d` for a vector field given by
/// component expressions.
fn commutator_residual(spec: &MetricSpec, pack: &CurvaturePack<f64>, x: &[Expr]) -> Result<(f64, f64)> {
    let n = spec.dim;
    let xl = covector_jets(x, spec, &JetSpace::new(&pack.point, FIELD_ORDER))?;
    let xv = ComponentTensor::from_entries(n, vec![Variance::Contra], xl.into_entries());
    let nnx = covariant_derivative(&covariant_derivative(&xv, &pack.gamma)?, &pack.gamma)?.values();
    let rm = pack.riem_mixed.values();
    let xs = xv.values();
    let (mut res, mut scale): (f64, f64) = (0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let lhs = nnx.get(&[a, b, c]) - nnx.get(&[b, a, c]);
                let rhs: f64 = (0..n).map(|d| rm.get(&[a, b, c, d]) * xs.get(&[d])).sum();
                res = res.max((lhs - rhs).abs());
                scale = scale.max(nnx.get(&[a, b, c]).abs()).max(rhs.abs());
            }
        }
    }
    Ok((res, scale))
}

/// Resolves a `--background` selector: `all`, a catalog name or a path to a
/// metric file. Catalog names without a dimension expand to every catalog
/// dimension of that name.
pub fn resolve_backgrounds(selector: &str, dim: Option<usize>, overrides: &Params) -> Result<Vec<MetricSpec>> {
    let with_params = |name: &str| {
        let mut p = default_params(name);
        for (k, v) in overrides {
            if let Some(slot) = p.get_mut(k) {
                *slot = *v;
            }
        }
        p
    };
    if selector == "all" {
        return builtin_catalog()
            .into_iter()
            .filter(|(_, d)| dim.map_or(true, |want| want == *d))
            .map(|(name, d)| builtin_background(name, d, &with_params(name)))
            .collect();
    }
    if BUILTIN_NAMES.contains(&selector) {
        let known = default_params(selector);
        if let Some(k) = overrides.keys().find(|k| !known.contains_key(*k)) {
            return Err(Error::UnknownSymbol(k.clone()));
        }
        return match dim {
            Some(d) => Ok(vec![builtin_background(selector, d, &with_params(selector))?]),
            None => builtin_catalog()
                .into_iter()
                .filter(|(name, _)| *name == selector)
                .map(|(name, d)| builtin_background(name, d, &with_params(name)))
                .collect(),
        };
    }
    let path = std::path::Path::new(selector);
    if path.is_file() || selector.ends_with(".metric") {
        let text = std::fs::read_to_string(path)?;
        let spec = parse_metric_file(&text)?;
        if let Some(d) = dim {
            if d != spec.dim {
                return Err(Error::BadDimension {
                    name: spec.name.clone(),
                    dim: d,
                });
            }
        }
        return Ok(vec![spec.with_params(overrides)?]);
    }
    Err(Error::UnknownBackground(selector.into()))
}
