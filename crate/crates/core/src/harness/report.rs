//! Report types and their json, csv and text renderings.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::oracle::{SlopeFit, SlopeVerdict};
use crate::error::{Error, Result};

/// Floor on the scale a residual is divided by.
pub const RELATIVE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        }
    }
}

/// Which side of the tolerance the relative residual must fall on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// An identity: the residual must vanish.
    Below,
    /// A witness: some sample must exceed the tolerance.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub pass: bool,
    pub bound: Bound,
    /// Largest `residual / max(scale, floor)` over the samples.
    pub relative: f64,
    /// Residual and scale at that sample.
    pub max_residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Accumulates samples of one check.
#[derive(Debug, Clone)]
pub struct CheckBuilder {
    name: String,
    bound: Bound,
    tolerance: f64,
    worst: Option<(f64, f64, f64)>,
    samples: usize,
    error: Option<String>,
}

impl CheckBuilder {
    pub fn below(name: &str, tolerance: f64) -> Self {
        Self::new(name, Bound::Below, tolerance)
    }

    pub fn above(name: &str, tolerance: f64) -> Self {
        Self::new(name, Bound::Above, tolerance)
    }

    fn new(name: &str, bound: Bound, tolerance: f64) -> Self {
        CheckBuilder {
            name: name.into(),
            bound,
            tolerance,
            worst: None,
            samples: 0,
            error: None,
        }
    }

    pub fn record(&mut self, residual: f64, scale: f64) {
        self.samples += 1;
        let rel = residual / scale.max(RELATIVE_FLOOR);
        let rel = if rel.is_nan() { f64::INFINITY } else { rel };
        if self.worst.map_or(true, |(w, _, _)| rel > w) {
            self.worst = Some((rel, residual, scale));
        }
    }

    /// Records a sample, or the first error, which aborts the check.
    pub fn record_result(&mut self, r: Result<(f64, f64)>) {
        if self.error.is_some() {
            return;
        }
        match r {
            Ok((res, scale)) => self.record(res, scale),
            Err(e) => self.error = Some(e.to_string()),
        }
    }

    pub fn fail_with(&mut self, e: &Error) {
        if self.error.is_none() {
            self.error = Some(e.to_string());
        }
    }

    pub fn finish(self) -> Check {
        let (relative, max_residual, scale) = self.worst.unwrap_or((0.0, 0.0, 0.0));
        let ok = match self.bound {
            Bound::Below => relative <= self.tolerance,
            Bound::Above => relative > self.tolerance,
        };
        let status = if self.error.is_some() {
            Status::Error
        } else if ok {
            Status::Pass
        } else {
            Status::Fail
        };
        Check {
            name: self.name,
            status,
            pass: status == Status::Pass,
            bound: self.bound,
            relative,
            max_residual,
            scale,
            tolerance: self.tolerance,
            samples: self.samples,
            error: self.error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeCheck {
    pub name: String,
    pub status: Status,
    pub pass: bool,
    pub fitted_slope: Option<f64>,
    pub window: usize,
    pub expected: [f64; 2],
    pub verdict: Option<SlopeVerdict>,
    /// Whether residuals at roundoff count as a pass.
    pub saturation_passes: bool,
    pub epsilons: Vec<f64>,
    pub residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SlopeCheck {
    pub fn from_fit(name: &str, fit: Result<SlopeFit>, expected: [f64; 2], saturation_passes: bool) -> Self {
        match fit {
            Ok(f) => {
                let ok = match f.verdict {
                    SlopeVerdict::Fitted => f
                        .slope
                        .is_some_and(|s| s >= expected[0] && s <= expected[1]),
                    SlopeVerdict::SaturatedAtRoundoff => saturation_passes,
                    SlopeVerdict::Underdetermined => false,
                };
                let status = if ok { Status::Pass } else { Status::Fail };
                SlopeCheck {
                    name: name.into(),
                    status,
                    pass: ok,
                    fitted_slope: f.slope,
                    window: f.window,
                    expected,
                    verdict: Some(f.verdict),
                    saturation_passes,
                    epsilons: f.epsilons,
                    residuals: f.residuals,
                    error: None,
                }
            }
            Err(e) => SlopeCheck {
                name: name.into(),
                status: Status::Error,
                pass: false,
                fitted_slope: None,
                window: 0,
                expected,
                verdict: None,
                saturation_passes,
                epsilons: vec![],
                residuals: vec![],
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub background: String,
    pub dim: usize,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub slopes: Vec<SlopeCheck>,
    /// Seconds; shown in text output only, so json stays byte-identical.
    #[serde(skip)]
    pub wall_time: f64,
}

impl VerificationReport {
    pub fn new(suite: &str, background: &str, dim: usize, seed: u64) -> Self {
        VerificationReport {
            suite: suite.into(),
            background: background.into(),
            dim,
            seed,
            pass: true,
            checks: vec![],
            slopes: vec![],
            wall_time: 0.0,
        }
    }

    pub fn push(&mut self, c: CheckBuilder) {
        self.checks.push(c.finish());
    }

    pub fn push_slope(&mut self, s: SlopeCheck) {
        self.slopes.push(s);
    }

    /// Recomputes the overall verdict.
    pub fn seal(&mut self) {
        self.pass = self.checks.iter().all(|c| c.pass) && self.slopes.iter().all(|s| s.pass);
    }

    pub fn status(&self) -> Status {
        let statuses = self
            .checks
            .iter()
            .map(|c| c.status)
            .chain(self.slopes.iter().map(|s| s.status));
        statuses.fold(Status::Pass, worse)
    }
}

fn worse(a: Status, b: Status) -> Status {
    match (a, b) {
        (Status::Error, _) | (_, Status::Error) => Status::Error,
        (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
        _ => Status::Pass,
    }
}

/// Every report of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    pub reports: Vec<VerificationReport>,
}

impl ReportBundle {
    pub fn new(suite: &str, seed: u64, reports: Vec<VerificationReport>) -> Self {
        ReportBundle {
            suite: suite.into(),
            seed,
            pass: reports.iter().all(|r| r.pass),
            reports,
        }
    }

    pub fn status(&self) -> Status {
        self.reports.iter().map(|r| r.status()).fold(Status::Pass, worse)
    }

    /// 0 when everything passes, 1 on any failure, 2 on any error.
    pub fn exit_code(&self) -> u8 {
        match self.status() {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    suite: &'a str,
    background: &'a str,
    dim: usize,
    seed: u64,
    kind: &'a str,
    name: &'a str,
    status: &'a str,
    value: Option<f64>,
    max_residual: Option<f64>,
    scale: Option<f64>,
    lower: f64,
    upper: Option<f64>,
    samples: usize,
    error: &'a str,
}

pub fn emit_report(bundle: &ReportBundle, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(bundle).expect("report serialises");
            s.push('\n');
            s
        }
        Format::Csv => emit_csv(bundle),
        Format::Text => emit_text(bundle),
    }
}

fn emit_csv(bundle: &ReportBundle) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &bundle.reports {
        for c in &r.checks {
            let (lower, upper) = match c.bound {
                Bound::Below => (0.0, Some(c.tolerance)),
                Bound::Above => (c.tolerance, None),
            };
            w.serialize(CsvRow {
                suite: &r.suite,
                background: &r.background,
                dim: r.dim,
                seed: r.seed,
                kind: "check",
                name: &c.name,
                status: c.status.label(),
                value: Some(c.relative),
                max_residual: Some(c.max_residual),
                scale: Some(c.scale),
                lower,
                upper,
                samples: c.samples,
                error: c.error.as_deref().unwrap_or(""),
            })
            .expect("csv row");
        }
        for s in &r.slopes {
            w.serialize(CsvRow {
                suite: &r.suite,
                background: &r.background,
                dim: r.dim,
                seed: r.seed,
                kind: "slope",
                name: &s.name,
                status: s.status.label(),
                value: s.fitted_slope,
                max_residual: s.residuals.iter().copied().reduce(f64::max),
                scale: None,
                lower: s.expected[0],
                upper: Some(s.expected[1]),
                samples: s.window,
                error: s.error.as_deref().unwrap_or(""),
            })
            .expect("csv row");
        }
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("utf-8")
}

fn emit_text(bundle: &ReportBundle) -> String {
    let mut out = String::new();
    for r in &bundle.reports {
        let _ = writeln!(
            out,
            "{} / {} (dim {}, seed {}) {} in {:.2}s",
            r.suite,
            r.background,
            r.dim,
            r.seed,
            r.status().label(),
            r.wall_time
        );
        for c in &r.checks {
            let op = if c.bound == Bound::Below { "<=" } else { ">" };
            let _ = write!(
                out,
                "  {:<5} {:<34} {:>10.3e} {op} {:.0e}  ({} samples)",
                c.status.label(),
                c.name,
                c.relative,
                c.tolerance,
                c.samples
            );
            if let Some(e) = &c.error {
                let _ = write!(out, "  {e}");
            }
            out.push('\n');
        }
        for s in &r.slopes {
            let slope = match (s.fitted_slope, s.verdict) {
                (Some(v), _) => format!("{v:.3}"),
                (None, Some(SlopeVerdict::SaturatedAtRoundoff)) => "saturated".into(),
                (None, Some(SlopeVerdict::Underdetermined)) => "underdetermined".into(),
                _ => "-".into(),
            };
            let _ = write!(
                out,
                "  {:<5} {:<34} {:>10} in [{}, {}]",
                s.status.label(),
                s.name,
                slope,
                s.expected[0],
                s.expected[1]
            );
            if let Some(e) = &s.error {
                let _ = write!(out, "  {e}");
            }
            out.push('\n');
        }
    }
    let _ = writeln!(
        out,
        "{}: {} report(s), {}",
        bundle.suite,
        bundle.reports.len(),
        bundle.status().label()
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_passes() {
        let mut r = VerificationReport::new("internal", "flat_euclidean", 2, 42);
        r.seal();
        let b = ReportBundle::new("internal", 42, vec![r]);
        let json = emit_report(&b, Format::Json);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["pass"], true);
        assert_eq!(v["reports"][0]["checks"], serde_json::json!([]));
        assert_eq!(b.exit_code(), 0);
    }

    #[test]
    fn failing_and_erroring_checks() {
        let mut r = VerificationReport::new("complex", "x", 2, 1);
        let mut c = CheckBuilder::below("identity", 1e-10);
        c.record(1e-3, 1.0);
        r.push(c);
        r.seal();
        assert!(!r.pass);
        let b = ReportBundle::new("complex", 1, vec![r.clone()]);
        assert_eq!(b.exit_code(), 1);
        let v: serde_json::Value = serde_json::from_str(&emit_report(&b, Format::Json)).unwrap();
        assert_eq!(v["pass"], false);

        let mut c = CheckBuilder::below("broken", 1e-10);
        c.record_result(Err(Error::EvaluationSingular("x".into())));
        r.push(c);
        r.seal();
        assert_eq!(ReportBundle::new("complex", 1, vec![r]).exit_code(), 2);
    }

    #[test]
    fn witness_checks_need_a_large_sample() {
        let mut c = CheckBuilder::above("witness", 1e-4);
        c.record(1e-9, 1.0);
        c.record(3e-2, 2.0);
        let c = c.finish();
        assert!(c.pass);
        assert_eq!(c.relative, 1.5e-2);
        assert_eq!((c.max_residual, c.scale), (3e-2, 2.0));
        let mut c = CheckBuilder::above("witness", 1e-4);
        c.record(1e-9, 1.0);
        assert!(!c.finish().pass);
    }

    #[test]
    fn nan_residual_fails() {
        let mut c = CheckBuilder::below("nan", 1.0);
        c.record(f64::NAN, 1.0);
        assert!(!c.finish().pass);
    }

    #[test]
    fn csv_and_text_have_one_line_per_item() {
        let mut r = VerificationReport::new("perturbation", "sphere", 2, 7);
        r.push(CheckBuilder::below("a", 1.0));
        r.push_slope(SlopeCheck::from_fit(
            "s",
            Ok(super::super::oracle::fit_slope(&[1e-2, 1e-3], &[1e-4, 1e-6], None)),
            [1.8, 2.2],
            true,
        ));
        r.seal();
        let b = ReportBundle::new("perturbation", 7, vec![r]);
        let csv = emit_report(&b, Format::Csv);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().contains(",slope,s,PASS,2"));
        let text = emit_report(&b, Format::Text);
        assert!(text.contains("PASS"));
        assert_eq!(text.lines().count(), 4);
    }
}
