//! Catalog of background metrics.
//!
//! | name               | dims | params   | components                                              |
//! |--------------------|------|----------|---------------------------------------------------------|
//! | `flat_euclidean`   | 2–5  |          | `δ_ab`                                                  |
//! | `flat_minkowski`   | 2–5  |          | `diag(−1, 1, …, 1)`                                     |
//! | `sphere`           | 2–5  | `r`      | `r²(dθ₁² + sin²θ₁ dθ₂² + sin²θ₁ sin²θ₂ dθ₃² + …)`        |
//! | `hyperbolic`       | 2–5  | `r`      | upper half-space `r² y⁻² (dx₁² + … + dy²)`              |
//! | `de_sitter_static` | 4    | `lambda` | `−f dt² + f⁻¹ dr² + r² dΩ²`, `f = 1 − lambda r²/3`       |
//! | `schwarzschild`    | 4    | `m`      | `−f dt² + f⁻¹ dr² + r² dΩ²`, `f = 1 − 2m/r`              |
//!
//! Sphere and hyperbolic space of radius `r` have sectional curvature `±1/r²`;
//! the static de Sitter patch has `1/ℓ²` with `ℓ² = 3/lambda`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::parse::parse_metric_file;
use super::spec::MetricSpec;
use crate::error::{Error, Result};

pub type Params = BTreeMap<String, f64>;

pub const BUILTIN_NAMES: [&str; 6] = [
    "flat_euclidean",
    "flat_minkowski",
    "sphere",
    "hyperbolic",
    "de_sitter_static",
    "schwarzschild",
];

/// Expected classification of a builtin background.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DocumentedStatus {
    pub einstein: bool,
    pub constant_curvature: bool,
}

pub fn documented_status(name: &str) -> Option<DocumentedStatus> {
    let cc = |c| DocumentedStatus {
        einstein: true,
        constant_curvature: c,
    };
    match name {
        "flat_euclidean" | "flat_minkowski" | "sphere" | "hyperbolic" | "de_sitter_static" => {
            Some(cc(true))
        }
        "schwarzschild" => Some(cc(false)),
        _ => None,
    }
}

/// Parameter values used when none are supplied.
pub fn default_params(name: &str) -> Params {
    let mut p = Params::new();
    match name {
        "sphere" | "hyperbolic" => {
            p.insert("r".into(), 1.0);
        }
        "de_sitter_static" => {
            p.insert("lambda".into(), 0.75);
        }
        "schwarzschild" => {
            p.insert("m".into(), 1.0);
        }
        _ => {}
    }
    p
}

/// Every `(name, dim)` pair exercised by `--background all`.
pub fn builtin_catalog() -> Vec<(&'static str, usize)> {
    let mut out = Vec::new();
    for name in ["flat_euclidean", "flat_minkowski", "sphere", "hyperbolic"] {
        for dim in 2..=4 {
            out.push((name, dim));
        }
    }
    out.push(("de_sitter_static", 4));
    out.push(("schwarzschild", 4));
    out
}

fn supported_dims(name: &str) -> std::ops::RangeInclusive<usize> {
    match name {
        "de_sitter_static" | "schwarzschild" => 4..=4,
        _ => 2..=5,
    }
}

fn required(name: &str, params: &Params, key: &str) -> Result<f64> {
    let v = params.get(key).copied().ok_or_else(|| Error::MissingParam {
        name: name.into(),
        param: key.into(),
    })?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Semantic {
            line: 0,
            message: format!("parameter `{key}` of `{name}` must be positive, got {v}"),
        });
    }
    Ok(v)
}

/// Builds a catalog background.
pub fn builtin_background(name: &str, dim: usize, params: &Params) -> Result<MetricSpec> {
    if !BUILTIN_NAMES.contains(&name) {
        return Err(Error::UnknownBackground(name.into()));
    }
    if !supported_dims(name).contains(&dim) {
        return Err(Error::BadDimension {
            name: name.into(),
            dim,
        });
    }
    let mut t = String::new();
    let mut line = |s: String| {
        t.push_str(&s);
        t.push('\n');
    };
    line(format!("name {name}"));
    line(format!("dim {dim}"));
    match name {
        "flat_euclidean" | "flat_minkowski" => {
            let lorentz = name == "flat_minkowski";
            let coords: Vec<&str> = if lorentz {
                ["t", "x", "y", "z", "w"][..dim].to_vec()
            } else {
                ["x", "y", "z", "w", "v"][..dim].to_vec()
            };
            line(format!("coords {}", coords.join(" ")));
            if lorentz {
                line(format!("signature {} 1", dim - 1));
            } else {
                line(format!("signature {dim} 0"));
            }
            for a in 0..dim {
                let v = if lorentz && a == 0 { "-1" } else { "1" };
                line(format!("g[{a}][{a}] = {v}"));
            }
            for c in &coords {
                line(format!("domain {c} in (-2, 2)"));
            }
        }
        "sphere" => {
            let r = required(name, params, "r")?;
            let coords: Vec<&str> = ["omega", "chi", "psi", "theta", "phi"][5 - dim..].to_vec();
            line(format!("coords {}", coords.join(" ")));
            line(format!("signature {dim} 0"));
            line(format!("param r = {r:?}"));
            let mut factor = String::from("r^2");
            for (a, c) in coords.iter().enumerate() {
                line(format!("g[{a}][{a}] = {factor}"));
                let _ = write!(factor, " * sin({c})^2");
            }
            for c in &coords[..dim - 1] {
                line(format!("domain {c} in (0.2, 2.94)"));
            }
            line("domain phi in (0, 6.28)".into());
        }
        "hyperbolic" => {
            let r = required(name, params, "r")?;
            let mut coords: Vec<String> = (1..dim).map(|i| format!("x{i}")).collect();
            coords.push("y".into());
            line(format!("coords {}", coords.join(" ")));
            line(format!("signature {dim} 0"));
            line(format!("param r = {r:?}"));
            for a in 0..dim {
                line(format!("g[{a}][{a}] = r^2 / y^2"));
            }
            for c in &coords[..dim - 1] {
                line(format!("domain {c} in (-1, 1)"));
            }
            line("domain y in (0.5, 2)".into());
        }
        "de_sitter_static" | "schwarzschild" => {
            let (f, lo, hi) = if name == "schwarzschild" {
                let m = required(name, params, "m")?;
                line(format!("param m = {m:?}"));
                ("(1 - 2*m/r)", 3.0 * m, 10.0 * m)
            } else {
                let lambda = required(name, params, "lambda")?;
                line(format!("param lambda = {lambda:?}"));
                let ell = (3.0 / lambda).sqrt();
                ("(1 - lambda*r^2/3)", 0.2 * ell, 0.8 * ell)
            };
            line("coords t r theta phi".into());
            line("signature 3 1".into());
            line(format!("g[0][0] = -{f}"));
            line(format!("g[1][1] = 1/{f}"));
            line("g[2][2] = r^2".into());
            line("g[3][3] = r^2 * sin(theta)^2".into());
            line("domain t in (-1, 1)".into());
            line(format!("domain r in ({lo:?}, {hi:?})"));
            line("domain theta in (0.2, 2.94)".into());
            line("domain phi in (0, 6.28)".into());
        }
        _ => unreachable!(),
    }
    parse_metric_file(&t)
}
