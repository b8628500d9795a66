//! Line-oriented metric-definition files.
//!
//! ```text
//! # comment
//! name <ident>                      (optional)
//! dim <n>
//! coords <name> ... <name>
//! signature <p> <q>                 (optional)
//! param <name> = <real>             (zero or more, before first use)
//! g[<i>][<j>] = <expression>        (zero-based; mirrored)
//! domain <coord> in (<lo>, <hi>)    (one per coordinate)
//! ```

use super::expr::{Expr, Parser, Symbol};
use super::spec::MetricSpec;
use crate::error::{Error, Result};
use crate::jets::MAX_DIM;

struct Line<'a> {
    no: usize,
    text: &'a str,
}

impl<'a> Line<'a> {
    fn syntax(&self, column: usize, found: &str, expected: &[&str]) -> Error {
        Error::Syntax {
            line: self.no,
            column,
            found: found.to_string(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn semantic(&self, message: impl Into<String>) -> Error {
        Error::Semantic {
            line: self.no,
            message: message.into(),
        }
    }

    /// Byte offset to one-based column.
    fn col(&self, offset: usize) -> usize {
        self.text[..offset].chars().count() + 1
    }
}

/// Splits off the leading whitespace-delimited word, returning it with its
/// byte offset and the remainder offset.
fn word(text: &str, from: usize) -> Option<(&str, usize, usize)> {
    let rest = &text[from..];
    let start = from + (rest.len() - rest.trim_start().len());
    if start >= text.len() {
        return None;
    }
    let end = text[start..]
        .find(char::is_whitespace)
        .map_or(text.len(), |i| start + i);
    Some((&text[start..end], start, end))
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

const RESERVED: [&str; 6] = ["sin", "cos", "exp", "sqrt", "ln", "g"];

struct State {
    name: Option<String>,
    dim: Option<usize>,
    coords: Option<Vec<String>>,
    signature: Option<(usize, usize)>,
    params: Vec<(String, f64)>,
    entries: Vec<Option<(Expr, usize)>>,
    domain: Vec<Option<(f64, f64)>>,
}

impl State {
    fn resolver(&self) -> impl Fn(&str) -> Option<Symbol> + '_ {
        move |name: &str| {
            self.coords
                .as_ref()
                .and_then(|c| c.iter().position(|x| x == name))
                .map(Symbol::Coord)
                .or_else(|| {
                    self.params
                        .iter()
                        .position(|(p, _)| p == name)
                        .map(Symbol::Param)
                })
        }
    }

    fn expression(&self, line: &Line, offset: usize, text: &str) -> Result<Expr> {
        let resolve = self.resolver();
        Parser::new(text, line.no, line.col(offset), &resolve)?.parse_all()
    }

    fn constant(&self, line: &Line, offset: usize, text: &str) -> Result<f64> {
        let e = self.expression(line, offset, text)?;
        if e.max_symbols().0.is_some() {
            return Err(line.semantic("constant expression may not reference coordinates"));
        }
        e.eval(&[], &self.params.iter().map(|(_, v)| *v).collect::<Vec<_>>())
            .map_err(|e| line.semantic(e.to_string()))
    }
}

/// Parses metric-definition text into a validated [`MetricSpec`].
pub fn parse_metric_file(text: &str) -> Result<MetricSpec> {
    let mut st = State {
        name: None,
        dim: None,
        coords: None,
        signature: None,
        params: Vec::new(),
        entries: Vec::new(),
        domain: Vec::new(),
    };
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let text = raw.split('#').next().unwrap_or("");
        let line = Line { no: i + 1, text };
        last_line = line.no;
        let Some((kw, kw_at, kw_end)) = word(text, 0) else {
            continue;
        };
        let directive = if kw.starts_with("g[") { "g[" } else { kw };
        match directive {
            "name" => {
                let (n, at, end) = word(text, kw_end)
                    .ok_or_else(|| line.syntax(line.col(text.len()), "end of line", &["identifier"]))?;
                if !is_ident(n) {
                    return Err(line.syntax(line.col(at), n, &["identifier"]));
                }
                if let Some((extra, at, _)) = word(text, end) {
                    return Err(line.syntax(line.col(at), extra, &["end of line"]));
                }
                st.name = Some(n.to_string());
            }
            "dim" => {
                if st.dim.is_some() {
                    return Err(line.semantic("duplicate `dim`"));
                }
                let (n, at, end) = word(text, kw_end)
                    .ok_or_else(|| line.syntax(line.col(text.len()), "end of line", &["integer"]))?;
                let d: usize = n
                    .parse()
                    .map_err(|_| line.syntax(line.col(at), n, &["integer"]))?;
                if d == 0 || d > MAX_DIM {
                    return Err(line.semantic(format!("dimension {d} outside 1..={MAX_DIM}")));
                }
                if let Some((extra, at, _)) = word(text, end) {
                    return Err(line.syntax(line.col(at), extra, &["end of line"]));
                }
                st.dim = Some(d);
                st.entries = vec![None; d * d];
                st.domain = vec![None; d];
            }
            "coords" => {
                let dim = st.dim.ok_or_else(|| line.semantic("`coords` before `dim`"))?;
                if st.coords.is_some() {
                    return Err(line.semantic("duplicate `coords`"));
                }
                let mut names = Vec::new();
                let mut pos = kw_end;
                while let Some((n, at, end)) = word(text, pos) {
                    if !is_ident(n) || RESERVED.contains(&n) {
                        return Err(line.syntax(line.col(at), n, &["coordinate name"]));
                    }
                    if names.iter().any(|x| x == n) {
                        return Err(line.semantic(format!("coordinate `{n}` repeated")));
                    }
                    names.push(n.to_string());
                    pos = end;
                }
                if names.len() != dim {
                    return Err(line.semantic(format!(
                        "`dim {dim}` but {} coordinates given",
                        names.len()
                    )));
                }
                st.coords = Some(names);
            }
            "signature" => {
                let mut vals = Vec::new();
                let mut pos = kw_end;
                while let Some((n, at, end)) = word(text, pos) {
                    vals.push(
                        n.parse::<usize>()
                            .map_err(|_| line.syntax(line.col(at), n, &["integer"]))?,
                    );
                    pos = end;
                }
                if vals.len() != 2 {
                    return Err(line.semantic("`signature` takes two integers"));
                }
                st.signature = Some((vals[0], vals[1]));
            }
            "param" => {
                let eq = text[kw_end..]
                    .find('=')
                    .map(|i| kw_end + i)
                    .ok_or_else(|| line.syntax(line.col(text.len()), "end of line", &["`=`"]))?;
                let n = text[kw_end..eq].trim();
                let at = kw_end + text[kw_end..].find(|c: char| !c.is_whitespace()).unwrap_or(0);
                if !is_ident(n) || RESERVED.contains(&n) {
                    return Err(line.syntax(line.col(at), n, &["parameter name"]));
                }
                if st.params.iter().any(|(p, _)| p == n)
                    || st.coords.as_ref().is_some_and(|c| c.iter().any(|x| x == n))
                {
                    return Err(line.semantic(format!("`{n}` already defined")));
                }
                let v = st.constant(&line, eq + 1, &text[eq + 1..])?;
                st.params.push((n.to_string(), v));
            }
            "g[" => {
                let dim = st.dim.ok_or_else(|| line.semantic("component before `dim`"))?;
                if st.coords.is_none() {
                    return Err(line.semantic("component before `coords`"));
                }
                let (a, b, eq) = component_head(&line, kw_at)?;
                if a >= dim || b >= dim {
                    return Err(line.semantic(format!("index g[{a}][{b}] outside 0..{dim}")));
                }
                let e = st.expression(&line, eq + 1, &text[eq + 1..])?;
                if st.entries[a * dim + b].is_some() {
                    return Err(line.semantic(format!("g[{a}][{b}] assigned twice")));
                }
                if let Some((other, other_line)) = &st.entries[b * dim + a] {
                    if *other != e {
                        return Err(line.semantic(format!(
                            "asymmetric redefinition: g[{a}][{b}] differs from g[{b}][{a}] on line {other_line}"
                        )));
                    }
                }
                st.entries[a * dim + b] = Some((e, line.no));
            }
            "domain" => {
                let coords = st
                    .coords
                    .as_ref()
                    .ok_or_else(|| line.semantic("`domain` before `coords`"))?;
                let (c, at, end) = word(text, kw_end)
                    .ok_or_else(|| line.syntax(line.col(text.len()), "end of line", &["coordinate"]))?;
                let idx = coords
                    .iter()
                    .position(|x| x == c)
                    .ok_or_else(|| line.semantic(format!("unknown coordinate `{c}` at column {}", line.col(at))))?;
                match word(text, end) {
                    Some(("in", _, _)) => {}
                    Some((w, at, _)) => return Err(line.syntax(line.col(at), w, &["`in`"])),
                    None => return Err(line.syntax(line.col(text.len()), "end of line", &["`in`"])),
                }
                let after_in = text[end..].find("in").map(|i| end + i + 2).unwrap();
                let (lo, hi) = interval(&st, &line, after_in)?;
                if !(lo < hi) {
                    return Err(line.semantic(format!("empty domain ({lo}, {hi}) for `{c}`")));
                }
                if st.domain[idx].is_some() {
                    return Err(line.semantic(format!("domain for `{c}` given twice")));
                }
                st.domain[idx] = Some((lo, hi));
            }
            _ => {
                return Err(line.syntax(
                    line.col(kw_at),
                    kw,
                    &["name", "dim", "coords", "signature", "param", "g[i][j]", "domain"],
                ))
            }
        }
    }

    let end = Line {
        no: last_line + 1,
        text: "",
    };
    let dim = st.dim.ok_or_else(|| end.semantic("missing `dim`"))?;
    let coords = st.coords.clone().ok_or_else(|| end.semantic("missing `coords`"))?;
    let mut domain = Vec::with_capacity(dim);
    for (c, d) in coords.iter().zip(&st.domain) {
        domain.push(d.ok_or_else(|| end.semantic(format!("missing domain for `{c}`")))?);
    }
    let mut upper = vec![Expr::num(0.0); dim * dim];
    for a in 0..dim {
        for b in a..dim {
            let e = st.entries[a * dim + b]
                .as_ref()
                .or(st.entries[b * dim + a].as_ref());
            if let Some((e, _)) = e {
                upper[a * dim + b] = e.clone();
            }
        }
    }
    MetricSpec::new(
        st.name.as_deref().unwrap_or("user"),
        coords,
        st.params,
        upper,
        domain,
        st.signature,
    )
}

/// Parses `g[i][j] =` starting at byte `at`; returns the indices and the
/// byte offset of `=`.
fn component_head(line: &Line, at: usize) -> Result<(usize, usize, usize)> {
    let t = line.text;
    let mut pos = at + 1;
    let mut idx = [0usize; 2];
    for slot in &mut idx {
        if t[pos..].chars().next() != Some('[') {
            return Err(line.syntax(line.col(pos), &t[pos..], &["`[`"]));
        }
        pos += 1;
        let close = t[pos..]
            .find(']')
            .map(|i| pos + i)
            .ok_or_else(|| line.syntax(line.col(t.len()), "end of line", &["`]`"]))?;
        let n = t[pos..close].trim();
        *slot = n
            .parse()
            .map_err(|_| line.syntax(line.col(pos), n, &["index"]))?;
        pos = close + 1;
    }
    let rest = &t[pos..];
    let skip = rest.len() - rest.trim_start().len();
    pos += skip;
    if t[pos..].chars().next() != Some('=') {
        let found = if pos >= t.len() { "end of line" } else { &t[pos..] };
        return Err(line.syntax(line.col(pos), found, &["`=`"]));
    }
    Ok((idx[0], idx[1], pos))
}

/// Parses `(lo, hi)` from byte `from` to end of line.
fn interval(st: &State, line: &Line, from: usize) -> Result<(f64, f64)> {
    let t = line.text;
    let rest = &t[from..];
    let open = from + (rest.len() - rest.trim_start().len());
    if t[open..].chars().next() != Some('(') {
        return Err(line.syntax(line.col(open), &t[open..], &["`(`"]));
    }
    let close = t.rfind(')').filter(|&c| c > open).ok_or_else(|| {
        line.syntax(line.col(t.len()), "end of line", &["`)`"])
    })?;
    if !t[close + 1..].trim().is_empty() {
        return Err(line.syntax(line.col(close + 1), t[close + 1..].trim(), &["end of line"]));
    }
    let mut depth = 0;
    let mut comma = None;
    for (i, c) in t[open + 1..close].char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                comma = Some(open + 1 + i);
                break;
            }
            _ => {}
        }
    }
    let comma = comma.ok_or_else(|| line.syntax(line.col(close), "`)`", &["`,`"]))?;
    let lo = st.constant(line, open + 1, &t[open + 1..comma])?;
    let hi = st.constant(line, comma + 1, &t[comma + 1..close])?;
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPHERE: &str = "\
# round 2-sphere of radius r
dim 2
coords theta phi
param r = 1.0
g[0][0] = r^2
g[1][1] = r^2 * sin(theta)^2
domain theta in (0.2, 2.94)
domain phi in (0, 6.28)
";

    #[test]
    fn parses_sphere() {
        let s = parse_metric_file(SPHERE).unwrap();
        assert_eq!(s.dim, 2);
        assert_eq!(s.coord_names, vec!["theta", "phi"]);
        assert_eq!(s.params, vec![("r".to_string(), 1.0)]);
        let v = s.component(1, 1).eval(&[1.0, 0.0], &s.param_values()).unwrap();
        assert!((v - 1.0f64.sin().powi(2)).abs() < 1e-15);
        assert!(s.component(0, 1).is_zero());
        assert_eq!(s.safe_domain[1], (0.0, 6.28));
        assert!(s.shares_component(0, 1));
    }

    #[test]
    fn parses_flat_minimal() {
        let s = parse_metric_file("dim 2\ncoords x y\ng[0][0]=1\ng[1][1]=1\ndomain x in (-1,1)\ndomain y in (-1,1)").unwrap();
        assert_eq!(s.component(0, 0), &Expr::num(1.0));
        assert_eq!(s.name, "user");
    }

    #[test]
    fn asymmetric_redefinition() {
        let text = "dim 2\ncoords x y\ng[0][1]=x\ng[1][0]=y\n";
        match parse_metric_file(text) {
            Err(Error::Semantic { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("asymmetric"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        // restating the mirrored entry identically is allowed
        let ok = "dim 2\ncoords x y\ng[0][1]=x\ng[1][0]=x\ndomain x in (0,1)\ndomain y in (0,1)";
        assert!(parse_metric_file(ok).is_ok());
    }

    #[test]
    fn semantic_errors() {
        let cases = [
            ("dim 2\ncoords x y\ng[0][0]=z\n", "unknown symbol"),
            ("dim 2\ncoords x y\ng[0][0]=1\ng[0][0]=2\n", "twice"),
            ("dim 2\ncoords x y\ng[0][0]=1\ndomain x in (1, 0)\n", "empty domain"),
            ("dim 2\ncoords x y\ng[0][0]=1\ndomain q in (0, 1)\n", "unknown coordinate"),
            ("dim 2\ncoords x\n", "coordinates given"),
            ("dim 2\ncoords x y\ng[2][0]=1\n", "outside"),
            ("dim 1\ncoords x\ng[0][0]=1\n", "missing domain"),
            ("coords x\n", "before `dim`"),
        ];
        for (text, needle) in cases {
            match parse_metric_file(text) {
                Err(Error::Semantic { message, .. }) => {
                    assert!(message.contains(needle), "{text:?}: {message}")
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_metric_file("dim 2\ncoords x y\ng[0][1] = x +* y\n") {
            Err(Error::Syntax { line, column, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(column, 14);
            }
            other => panic!("{other:?}"),
        }
        match parse_metric_file("dim 2\nmetric x y\n") {
            Err(Error::Syntax { line, column, expected, .. }) => {
                assert_eq!((line, column), (2, 1));
                assert!(expected.contains(&"coords".to_string()));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_metric_file("dim two\n"),
            Err(Error::Syntax { line: 1, column: 5, .. })
        ));
        assert!(matches!(
            parse_metric_file("dim 1\ncoords x\ng[0][0] 1\n"),
            Err(Error::Syntax { line: 3, column: 9, .. })
        ));
        assert!(matches!(
            parse_metric_file("dim 1\ncoords x\ndomain x in (0 1)\n"),
            Err(Error::Syntax { line: 3, .. })
        ));
    }

    #[test]
    fn params_in_domain_bounds() {
        let text = "dim 1\ncoords r\nparam m = 2\ng[0][0] = 1/(1-2*m/r)\ndomain r in (3*m, 10*m)\n";
        let s = parse_metric_file(text).unwrap();
        assert_eq!(s.safe_domain[0], (6.0, 20.0));
    }
}
