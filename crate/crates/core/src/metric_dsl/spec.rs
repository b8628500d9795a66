use std::fmt::Write as _;
use std::sync::Arc;

use super::expr::Expr;
use crate::error::{Error, Result};

/// Symbolic metric over one coordinate chart.
///
/// Entry `(a, b)` and `(b, a)` share one expression. Every expression refers
/// only to this chart's coordinates and parameters.
#[derive(Debug, Clone)]
pub struct MetricSpec {
    pub name: String,
    pub dim: usize,
    pub coord_names: Vec<String>,
    pub params: Vec<(String, f64)>,
    components: Vec<Arc<Expr>>,
    /// Open interval per coordinate; sampling never leaves it.
    pub safe_domain: Vec<(f64, f64)>,
    pub signature_hint: Option<(usize, usize)>,
}

impl MetricSpec {
    /// Builds a spec from the upper triangle `upper[(a, b)]`, `a <= b`, given
    /// row-major as a `dim × dim` table; lower entries are ignored and mirrored.
    pub fn new(
        name: &str,
        coord_names: Vec<String>,
        params: Vec<(String, f64)>,
        upper: Vec<Expr>,
        safe_domain: Vec<(f64, f64)>,
        signature_hint: Option<(usize, usize)>,
    ) -> Result<MetricSpec> {
        let dim = coord_names.len();
        let semantic = |message: String| Error::Semantic { line: 0, message };
        if dim == 0 {
            return Err(semantic("metric needs at least one coordinate".into()));
        }
        if upper.len() != dim * dim {
            return Err(semantic(format!("expected {} components", dim * dim)));
        }
        if safe_domain.len() != dim {
            return Err(semantic("one domain interval per coordinate".into()));
        }
        for (i, (lo, hi)) in safe_domain.iter().enumerate() {
            if !(lo < hi) {
                return Err(semantic(format!(
                    "empty domain ({lo}, {hi}) for `{}`",
                    coord_names[i]
                )));
            }
        }
        let mut components: Vec<Option<Arc<Expr>>> = vec![None; dim * dim];
        for a in 0..dim {
            for b in a..dim {
                let e = &upper[a * dim + b];
                let (c, p) = e.max_symbols();
                if c.is_some_and(|c| c >= dim) || p.is_some_and(|p| p >= params.len()) {
                    return Err(semantic(format!("g[{a}][{b}] references an unknown symbol")));
                }
                let shared = Arc::new(e.clone());
                components[a * dim + b] = Some(shared.clone());
                components[b * dim + a] = Some(shared);
            }
        }
        Ok(MetricSpec {
            name: name.to_string(),
            dim,
            coord_names,
            params,
            components: components.into_iter().map(Option::unwrap).collect(),
            safe_domain,
            signature_hint,
        })
    }

    pub fn component(&self, a: usize, b: usize) -> &Expr {
        &self.components[a * self.dim + b]
    }

    pub fn shares_component(&self, a: usize, b: usize) -> bool {
        Arc::ptr_eq(
            &self.components[a * self.dim + b],
            &self.components[b * self.dim + a],
        )
    }

    pub fn param_values(&self) -> Vec<f64> {
        self.params.iter().map(|(_, v)| *v).collect()
    }

    pub fn param_names(&self) -> Vec<String> {
        self.params.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Replaces parameter values by name. Unknown names are rejected.
    pub fn with_params(mut self, values: &std::collections::BTreeMap<String, f64>) -> Result<MetricSpec> {
        for (k, v) in values {
            match self.params.iter_mut().find(|(n, _)| n == k) {
                Some(slot) => slot.1 = *v,
                None => return Err(Error::UnknownSymbol(k.clone())),
            }
        }
        Ok(self)
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coord_names.iter().position(|c| c == name)
    }

    /// Fails with `OutsideDomain` unless every coordinate lies strictly
    /// inside its interval.
    pub fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::OutsideDomain {
                point: point.to_vec(),
                detail: format!("expected {} coordinates", self.dim),
            });
        }
        for (i, (&x, &(lo, hi))) in point.iter().zip(&self.safe_domain).enumerate() {
            if !(x > lo && x < hi) {
                return Err(Error::OutsideDomain {
                    point: point.to_vec(),
                    detail: format!("{} = {x} not in ({lo}, {hi})", self.coord_names[i]),
                });
            }
        }
        Ok(())
    }

    /// Spec for `g + ε h`, with `h` given row-major as a symmetric table.
    pub fn perturbed(&self, h: &[Expr], epsilon: f64) -> Result<MetricSpec> {
        assert_eq!(h.len(), self.dim * self.dim);
        let mut upper = Vec::with_capacity(self.dim * self.dim);
        for a in 0..self.dim {
            for b in 0..self.dim {
                let (i, j) = if a <= b { (a, b) } else { (b, a) };
                upper.push(Expr::add(
                    self.component(i, j).clone(),
                    Expr::mul(Expr::num(epsilon), h[i * self.dim + j].clone()),
                ));
            }
        }
        MetricSpec::new(
            &format!("{}_perturbed", self.name),
            self.coord_names.clone(),
            self.params.clone(),
            upper,
            self.safe_domain.clone(),
            self.signature_hint,
        )
    }

    /// Serialises to the metric-definition language.
    pub fn to_dsl(&self) -> String {
        let params = self.param_names();
        let mut out = String::new();
        let _ = writeln!(out, "name {}", self.name);
        let _ = writeln!(out, "dim {}", self.dim);
        let _ = writeln!(out, "coords {}", self.coord_names.join(" "));
        if let Some((p, q)) = self.signature_hint {
            let _ = writeln!(out, "signature {p} {q}");
        }
        for (n, v) in &self.params {
            let _ = writeln!(out, "param {n} = {v:?}");
        }
        for a in 0..self.dim {
            for b in a..self.dim {
                let e = self.component(a, b);
                if !e.is_zero() {
                    let _ = writeln!(
                        out,
                        "g[{a}][{b}] = {}",
                        e.display(&self.coord_names, &params)
                    );
                }
            }
        }
        for (c, (lo, hi)) in self.coord_names.iter().zip(&self.safe_domain) {
            let _ = writeln!(out, "domain {c} in ({lo:?}, {hi:?})");
        }
        out
    }
}
