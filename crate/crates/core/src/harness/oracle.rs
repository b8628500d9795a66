//! Curvature of `g + εh` recomputed from scratch, and convergence-slope fits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{curvature_pack, CurvaturePack};
use crate::metric_dsl::{evaluate_metric_jet, Expr, MetricSpec};

/// Residuals at or below this are treated as roundoff.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Strictly decreasing, all positive.
    pub epsilons: Vec<f64>,
    /// Number of the smallest ladder entries used in slope fits; all if `None`.
    pub slope_window: Option<usize>,
    pub seed: u64,
    pub points_per_background: usize,
    /// Metric jet order for background curvature packs.
    pub jet_order: usize,
    /// Random covector fields drawn per sample point.
    pub fields_per_point: usize,
    /// Random perturbations per background in slope tests.
    pub perturbations: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            epsilons: vec![1e-2, 3e-3, 1e-3, 3e-4, 1e-4],
            slope_window: None,
            seed: 42,
            points_per_background: 20,
            jet_order: 4,
            fields_per_point: 5,
            perturbations: 3,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.epsilons.len() < 2 {
            return bad("need at least two epsilons");
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return bad("epsilons must be positive and finite");
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return bad("epsilons must be strictly decreasing");
        }
        if let Some(w) = self.slope_window {
            if w < 2 || w > self.epsilons.len() {
                return bad("slope window must lie between 2 and the ladder length");
            }
        }
        if self.points_per_background < 2 {
            return bad("need at least two points per background");
        }
        if self.jet_order < 3 {
            return bad("jet order must be at least 3");
        }
        Ok(())
    }
}

/// Curvature of the perturbed metric together with the first-order inverse
/// check `max|g̃^ab − (g^ab − ε h^ab)|`.
#[derive(Debug, Clone)]
pub struct PerturbedPack {
    pub pack: CurvaturePack<f64>,
    pub inverse_residual: f64,
}

/// Builds `g + εh` at the expression level and runs the whole curvature
/// pipeline on it. `h` is a symmetric row-major table.
pub fn perturbed_metric_pack(
    spec: &MetricSpec,
    h: &[Expr],
    epsilon: f64,
    point: &[f64],
    order: usize,
) -> Result<PerturbedPack> {
    let n = spec.dim;
    let tilde = spec.perturbed(h, epsilon)?;
    let pack = curvature_pack::<f64>(&tilde, point, order)?;
    let m = evaluate_metric_jet::<f64>(spec, point, 0)?;
    let params = spec.param_values();
    let mut hv = vec![0.0; n * n];
    for (k, e) in h.iter().enumerate() {
        hv[k] = e.eval(point, &params)?;
    }
    let mut inverse_residual: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let mut h_up = 0.0;
            for c in 0..n {
                for d in 0..n {
                    h_up += m.g_inv[(a, c)] * m.g_inv[(b, d)] * hv[c * n + d];
                }
            }
            let want = m.g_inv[(a, b)] - epsilon * h_up;
            inverse_residual = inverse_residual.max((pack.m.g_inv[(a, b)] - want).abs());
        }
    }
    Ok(PerturbedPack {
        pack,
        inverse_residual,
    })
}

/// Largest allowed `ε‖g⁻¹h‖` (Frobenius) at the top of a capped ladder.
pub const MAX_RELATIVE_PERTURBATION: f64 = 0.05;

/// Halves the whole ladder until, for every ε, `g + εh` keeps the
/// background's signature and `εh` stays small next to `g`.
pub fn cap_epsilons(spec: &MetricSpec, h: &[Expr], point: &[f64], ladder: &[f64]) -> Result<Vec<f64>> {
    let n = spec.dim;
    let m = evaluate_metric_jet::<f64>(spec, point, 0)?;
    let params = spec.param_values();
    let hv = h.iter().map(|e| e.eval(point, &params)).collect::<Result<Vec<f64>>>()?;
    let mut size: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let v: f64 = (0..n).map(|c| m.g_inv[(a, c)] * hv[c * n + b]).sum();
            size += v * v;
        }
    }
    let size = size.sqrt();
    let top = ladder.iter().copied().fold(0.0, f64::max);
    let mut factor = 1.0;
    while top * factor * size > MAX_RELATIVE_PERTURBATION {
        factor *= 0.5;
    }
    let mut last_err = None;
    for _ in 0..40 {
        let scaled: Vec<f64> = ladder.iter().map(|e| e * factor).collect();
        let ok = scaled.iter().try_for_each(|&e| {
            let p = evaluate_metric_jet::<f64>(&spec.perturbed(h, e)?, point, 0)?;
            if p.signature != m.signature {
                return Err(Error::DegenerateMetric {
                    det: p.det,
                    floor: 0.0,
                });
            }
            Ok(())
        });
        match ok {
            Ok(()) => return Ok(scaled),
            Err(e @ Error::DegenerateMetric { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
        factor *= 0.5;
    }
    Err(last_err.unwrap_or(Error::DegenerateMetric { det: 0.0, floor: 0.0 }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeVerdict {
    Fitted,
    /// Every residual at roundoff level.
    SaturatedAtRoundoff,
    /// Fewer than two residuals above roundoff.
    Underdetermined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub epsilons: Vec<f64>,
    pub residuals: Vec<f64>,
    pub slope: Option<f64>,
    /// Points that entered the fit.
    pub window: usize,
    pub verdict: SlopeVerdict,
}

/// Least-squares slope of `log r` against `log ε` over the ladder.
pub fn first_order_convergence(
    residual_at: &mut dyn FnMut(f64) -> Result<f64>,
    epsilons: &[f64],
    window: Option<usize>,
) -> Result<SlopeFit> {
    let residuals = epsilons
        .iter()
        .map(|&e| residual_at(e))
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_slope(epsilons, &residuals, window))
}

pub fn fit_slope(epsilons: &[f64], residuals: &[f64], window: Option<usize>) -> SlopeFit {
    let skip = window.map_or(0, |w| epsilons.len().saturating_sub(w));
    let pts: Vec<(f64, f64)> = epsilons[skip..]
        .iter()
        .zip(&residuals[skip..])
        .filter(|(_, r)| **r > ROUNDOFF_FLOOR)
        .map(|(e, r)| (e.ln(), r.ln()))
        .collect();
    let verdict = if residuals[skip..].iter().all(|r| *r <= ROUNDOFF_FLOOR) {
        SlopeVerdict::SaturatedAtRoundoff
    } else if pts.len() < 2 {
        SlopeVerdict::Underdetermined
    } else {
        SlopeVerdict::Fitted
    };
    let slope = (verdict == SlopeVerdict::Fitted).then(|| {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        sxy / sxx
    });
    SlopeFit {
        epsilons: epsilons.to_vec(),
        residuals: residuals.to_vec(),
        slope,
        window: pts.len(),
        verdict,
    }
}
