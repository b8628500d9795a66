use super::curvature::curvature_pack;
use crate::error::{Error, Result};
use crate::metric_dsl::MetricSpec;

/// Floor on normalisation scales; flat metrics have zero curvature.
pub const SCALE_FLOOR: f64 = 1e-12;

/// Outcome of testing `Ric = λ g` and `R_abcd = κ (g_ac g_bd − g_ad g_bc)`
/// over a set of sample points.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EinsteinCertificate {
    pub is_einstein: bool,
    /// Mean of `R / n` over the samples.
    pub lambda: f64,
    /// Largest `|λ_p − λ|` relative to the curvature scale.
    pub lambda_spread: f64,
    /// Largest pointwise `|Ric − (R/n) g| / scale`.
    pub einstein_residual: f64,
    pub is_constant_curvature: bool,
    pub kappa: f64,
    pub kappa_spread: f64,
    pub cc_residual: f64,
    /// Signature at the first sample, and whether every sample agrees.
    pub signature: (usize, usize),
    pub signature_constant: bool,
    pub samples: usize,
}

pub fn classify_background(
    spec: &MetricSpec,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<EinsteinCertificate> {
    if points.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: points.len(),
        });
    }
    let n = spec.dim;
    let nf = n as f64;
    let mut lambdas = Vec::with_capacity(points.len());
    let mut kappas = Vec::with_capacity(points.len());
    let mut scale_max: f64 = 0.0;
    let mut einstein_residual: f64 = 0.0;
    let mut cc_residual: f64 = 0.0;
    let mut signature = None;
    let mut signature_constant = true;
    for p in points {
        let pack = curvature_pack::<f64>(spec, p, 3)?;
        let g = &pack.m.g;
        let scale = pack.curvature_scale().max(SCALE_FLOOR);
        scale_max = scale_max.max(scale);
        let r = pack.scalar.value();
        let lambda = r / nf;
        let kappa = if n > 1 { r / (nf * (nf - 1.0)) } else { 0.0 };
        let mut e_res: f64 = 0.0;
        for b in 0..n {
            for d in 0..n {
                let v = pack.ricci.get(&[b, d]).value() - lambda * g[(b, d)];
                e_res = e_res.max(v.abs());
            }
        }
        let mut c_res: f64 = 0.0;
        for idx in pack.riem_low.indices() {
            let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
            let want = kappa * (g[(a, c)] * g[(b, d)] - g[(a, d)] * g[(b, c)]);
            c_res = c_res.max((pack.riem_low.get(&idx).value() - want).abs());
        }
        einstein_residual = einstein_residual.max(e_res / scale);
        cc_residual = cc_residual.max(c_res / scale);
        lambdas.push(lambda);
        kappas.push(kappa);
        match signature {
            None => signature = Some(pack.m.signature),
            Some(s) if s != pack.m.signature => signature_constant = false,
            _ => {}
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let spread = |v: &[f64], m: f64| v.iter().fold(0.0f64, |s, x| s.max((x - m).abs())) / scale_max;
    let lambda = mean(&lambdas);
    let kappa = mean(&kappas);
    let lambda_spread = spread(&lambdas, lambda);
    let kappa_spread = spread(&kappas, kappa);
    let is_einstein = einstein_residual <= tol && lambda_spread <= tol;
    Ok(EinsteinCertificate {
        is_einstein,
        lambda,
        lambda_spread,
        einstein_residual,
        is_constant_curvature: is_einstein && cc_residual <= tol && kappa_spread <= tol,
        kappa,
        kappa_spread,
        cc_residual,
        signature: signature.unwrap_or((0, 0)),
        signature_constant,
        samples: points.len(),
    })
}
