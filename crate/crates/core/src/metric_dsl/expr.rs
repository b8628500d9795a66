//! Scalar expressions over chart coordinates and named parameters.
//!
//! Grammar (usual precedence, `^` right-associative and binding tighter than
//! unary minus):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := number | ident | func '(' expr ')' | '(' expr ')'
//! func  := sin | cos | exp | sqrt | ln
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::jets::{Jet, JetSpace};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Coord(usize),
    Param(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Ln,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "ln" => Func::Ln,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Ln => "ln",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Symbol),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

// Smart constructors fold the trivial cases so symbolic derivatives stay small.
impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn coord(i: usize) -> Expr {
        Expr::Var(Symbol::Coord(i))
    }

    pub fn param(i: usize) -> Expr {
        Expr::Var(Symbol::Param(i))
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Bin(BinOp::Add, Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Num(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), _) if x == 0.0 => Expr::Num(0.0),
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Bin(BinOp::Div, Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        match b.as_num() {
            Some(y) if y == 0.0 => Expr::Num(1.0),
            Some(y) if y == 1.0 => a,
            _ => Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(v) => Expr::Num(-v),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// Symbolic partial derivative with respect to coordinate `var`.
    pub fn diff(&self, var: usize) -> Expr {
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(Symbol::Coord(i)) => Expr::Num(if *i == var { 1.0 } else { 0.0 }),
            Expr::Var(Symbol::Param(_)) => Expr::Num(0.0),
            Expr::Neg(a) => Expr::neg(a.diff(var)),
            Expr::Bin(op, a, b) => {
                let (da, db) = (a.diff(var), b.diff(var));
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                match op {
                    BinOp::Add => Expr::add(da, db),
                    BinOp::Sub => Expr::sub(da, db),
                    BinOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                    BinOp::Div => Expr::div(
                        Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db)),
                        Expr::pow(b, Expr::Num(2.0)),
                    ),
                    BinOp::Pow => match b.as_num() {
                        Some(n) => Expr::mul(
                            Expr::mul(Expr::Num(n), Expr::pow(a, Expr::Num(n - 1.0))),
                            da,
                        ),
                        None => {
                            // d(a^b) = a^b (b' ln a + b a'/a)
                            let whole = Expr::pow(a.clone(), b.clone());
                            let inner = Expr::add(
                                Expr::mul(db, Expr::call(Func::Ln, a.clone())),
                                Expr::div(Expr::mul(b, da), a),
                            );
                            Expr::mul(whole, inner)
                        }
                    },
                }
            }
            Expr::Call(f, a) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Expr::Num(0.0);
                }
                let a = a.as_ref().clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, a)),
                    Func::Exp => Expr::call(Func::Exp, a),
                    Func::Sqrt => Expr::div(Expr::Num(0.5), Expr::call(Func::Sqrt, a)),
                    Func::Ln => Expr::div(Expr::Num(1.0), a),
                };
                Expr::mul(outer, da)
            }
        }
    }

    /// Replaces every parameter by its numeric value.
    pub fn substitute_params(&self, params: &[f64]) -> Expr {
        match self {
            Expr::Var(Symbol::Param(i)) => Expr::Num(params[*i]),
            Expr::Num(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute_params(params))),
            Expr::Bin(op, a, b) => Expr::Bin(
                *op,
                Box::new(a.substitute_params(params)),
                Box::new(b.substitute_params(params)),
            ),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute_params(params))),
        }
    }

    /// Largest coordinate and parameter index referenced, if any.
    pub fn max_symbols(&self) -> (Option<usize>, Option<usize>) {
        fn merge(a: Option<usize>, b: Option<usize>) -> Option<usize> {
            match (a, b) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, None) => x,
                (None, y) => y,
            }
        }
        match self {
            Expr::Num(_) => (None, None),
            Expr::Var(Symbol::Coord(i)) => (Some(*i), None),
            Expr::Var(Symbol::Param(i)) => (None, Some(*i)),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_symbols(),
            Expr::Bin(_, a, b) => {
                let (ca, pa) = a.max_symbols();
                let (cb, pb) = b.max_symbols();
                (merge(ca, cb), merge(pa, pb))
            }
        }
    }

    /// Real evaluation, independent of the jet machinery.
    pub fn eval(&self, coords: &[f64], params: &[f64]) -> Result<f64> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(Symbol::Coord(i)) => *coords
                .get(*i)
                .ok_or_else(|| Error::UnknownSymbol(format!("coordinate #{i}")))?,
            Expr::Var(Symbol::Param(i)) => *params
                .get(*i)
                .ok_or_else(|| Error::UnknownSymbol(format!("parameter #{i}")))?,
            Expr::Neg(a) => -a.eval(coords, params)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval(coords, params)?;
                let y = b.eval(coords, params)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(Error::EvaluationSingular("division by zero".into()));
                        }
                        x / y
                    }
                    BinOp::Pow => {
                        if y == y.round() && y.abs() <= 64.0 {
                            if x == 0.0 && y < 0.0 {
                                return Err(Error::EvaluationSingular("0 to a negative power".into()));
                            }
                            x.powi(y as i32)
                        } else {
                            if x <= 0.0 {
                                return Err(Error::EvaluationSingular(format!(
                                    "fractional power of non-positive value {x}"
                                )));
                            }
                            x.powf(y)
                        }
                    }
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(coords, params)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(Error::EvaluationSingular(format!("sqrt of {x}")));
                        }
                        x.sqrt()
                    }
                    Func::Ln => {
                        if x <= 0.0 {
                            return Err(Error::EvaluationSingular(format!("ln of {x}")));
                        }
                        x.ln()
                    }
                }
            }
        };
        if !v.is_finite() {
            return Err(Error::EvaluationSingular("non-finite value".into()));
        }
        Ok(v)
    }

    /// Jet of this expression about the base point of `space`.
    pub fn eval_jet<T: Scalar>(&self, space: &JetSpace<T>, params: &[f64]) -> Result<Jet<T>> {
        Ok(match self {
            Expr::Num(v) => space.constant(T::lit(*v)),
            Expr::Var(Symbol::Coord(i)) => {
                if *i >= space.dim() {
                    return Err(Error::UnknownSymbol(format!("coordinate #{i}")));
                }
                space.variable(*i)
            }
            Expr::Var(Symbol::Param(i)) => space.constant(T::lit(
                *params
                    .get(*i)
                    .ok_or_else(|| Error::UnknownSymbol(format!("parameter #{i}")))?,
            )),
            Expr::Neg(a) => -a.eval_jet(space, params)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval_jet(space, params)?;
                if let (BinOp::Pow, Some(p)) = (op, b.as_num()) {
                    return x.powf(T::lit(p));
                }
                let y = b.eval_jet(space, params)?;
                match op {
                    BinOp::Add => x.try_add(&y)?,
                    BinOp::Sub => x.try_sub(&y)?,
                    BinOp::Mul => x.try_mul(&y)?,
                    BinOp::Div => x.try_div(&y)?,
                    BinOp::Pow => x.try_pow(&y)?,
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval_jet(space, params)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => x.sqrt()?,
                    Func::Ln => x.ln()?,
                }
            }
        })
    }

    /// Displays the expression with the given coordinate and parameter names.
    pub fn display<'a>(&'a self, coords: &'a [String], params: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay {
            expr: self,
            coords,
            params,
        }
    }
}

/// Jet of `expr` at `point` to total degree `order`.
pub fn jet_of_expression<T: Scalar>(
    expr: &Expr,
    params: &[f64],
    point: &[T],
    order: usize,
) -> Result<Jet<T>> {
    expr.eval_jet(&JetSpace::new(point, order), params)
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    coords: &'a [String],
    params: &'a [String],
}

impl<'a> ExprDisplay<'a> {
    fn child(&self, e: &'a Expr) -> ExprDisplay<'a> {
        ExprDisplay {
            expr: e,
            coords: self.coords,
            params: self.params,
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |e| self.child(e);
        // fully parenthesised so the text reparses to the same tree
        match self.expr {
            Expr::Num(v) => {
                if *v < 0.0 {
                    write!(f, "({v:?})")
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::Var(Symbol::Coord(i)) => f.write_str(&self.coords[*i]),
            Expr::Var(Symbol::Param(i)) => f.write_str(&self.params[*i]),
            Expr::Neg(a) => write!(f, "(-{})", sub(a)),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({} {sym} {})", sub(a), sub(b))
            }
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), sub(a)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::End => "end of line".into(),
        }
    }
}

/// Recursive-descent parser over one line of text.
pub(crate) struct Parser<'a, R> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    resolve: &'a R,
}

fn syntax(line: usize, column: usize, found: String, expected: &[&str]) -> Error {
    Error::Syntax {
        line,
        column,
        found,
        expected: expected.iter().map(|s| s.to_string()).collect(),
    }
}

fn tokenize(text: &str, line: usize, col0: usize) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s
                .parse()
                .map_err(|_| syntax(line, col, format!("`{s}`"), &["number"]))?;
            out.push((Tok::Num(v), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(syntax(
                line,
                col,
                format!("`{c}`"),
                &["number", "identifier", "operator"],
            ));
        }
    }
    out.push((Tok::End, col0 + chars.len()));
    Ok(out)
}

impl<'a, R> Parser<'a, R>
where
    R: Fn(&str) -> Option<Symbol>,
{
    pub(crate) fn new(text: &str, line: usize, col0: usize, resolve: &'a R) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(text, line, col0)?,
            pos: 0,
            line,
            resolve,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn fail(&self, expected: &[&str]) -> Error {
        syntax(self.line, self.col(), self.peek().describe(), expected)
    }

    /// Parses a complete expression; trailing tokens are an error.
    pub(crate) fn parse_all(mut self) -> Result<Expr> {
        let e = self.expr()?;
        if *self.peek() != Tok::End {
            return Err(self.fail(&["operator", "end of line"]));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                let inner = self.unary()?;
                Ok(match inner {
                    Expr::Num(v) => Expr::Num(-v),
                    other => Expr::Neg(Box::new(other)),
                })
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    if *self.peek() == Tok::Op('(') {
                        self.bump();
                        let e = self.expr()?;
                        self.expect(')')?;
                        return Ok(Expr::Call(f, Box::new(e)));
                    }
                }
                match (self.resolve)(&name) {
                    Some(sym) => Ok(Expr::Var(sym)),
                    None => Err(Error::Semantic {
                        line: self.line,
                        message: format!("unknown symbol `{name}` at column {col}"),
                    }),
                }
            }
            other => {
                self.pos -= usize::from(other != Tok::End);
                Err(self.fail(&["number", "identifier", "`(`"]))
            }
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            let want = format!("`{c}`");
            Err(self.fail(&[want.as_str()]))
        }
    }
}

/// Parses a standalone expression over the named coordinates and parameters.
pub fn parse_expression(text: &str, coords: &[&str], params: &[&str]) -> Result<Expr> {
    let resolve = |name: &str| {
        coords
            .iter()
            .position(|c| *c == name)
            .map(Symbol::Coord)
            .or_else(|| params.iter().position(|p| *p == name).map(Symbol::Param))
    };
    Parser::new(text, 1, 1, &resolve)?
        .parse_all()
        .map_err(|e| match e {
            Error::Semantic { message, .. } if message.starts_with("unknown symbol") => {
                Error::UnknownSymbol(message)
            }
            other => other,
        })
}
