use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use super::layout::JetLayout;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Base point and truncation order shared by a family of jets.
#[derive(Clone)]
pub struct JetSpace<T> {
    layout: Arc<JetLayout>,
    point: Arc<[T]>,
}

impl<T: Scalar> JetSpace<T> {
    pub fn new(point: &[T], order: usize) -> Self {
        JetSpace {
            layout: JetLayout::get(point.len(), order),
            point: point.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn order(&self) -> usize {
        self.layout.order()
    }

    pub fn point(&self) -> &[T] {
        &self.point
    }

    pub fn constant(&self, v: T) -> Jet<T> {
        let mut coeffs = vec![T::zero(); self.layout.len()];
        coeffs[0] = v;
        Jet {
            layout: self.layout.clone(),
            point: self.point.clone(),
            coeffs,
        }
    }

    pub fn zero(&self) -> Jet<T> {
        self.constant(T::zero())
    }

    /// The coordinate function `x_var`, expanded about the base point.
    pub fn variable(&self, var: usize) -> Jet<T> {
        assert!(var < self.dim());
        let mut j = self.constant(self.point[var]);
        if self.order() > 0 {
            // degree-1 entries follow the constant in variable order
            j.coeffs[1 + var] = T::one();
        }
        j
    }

    pub fn from_coeffs(&self, coeffs: Vec<T>) -> Jet<T> {
        assert_eq!(coeffs.len(), self.layout.len());
        Jet {
            layout: self.layout.clone(),
            point: self.point.clone(),
            coeffs,
        }
    }
}

/// Truncated multivariate Taylor expansion of a scalar function about a
/// point.
///
/// The coefficient stored for the multi-index `α` is `∂^α f / α!`, so the
/// product of two jets is a truncated convolution of their coefficient tables.
///
/// Operator overloads combine jets of different orders by truncating to the
/// smaller one; the `try_*` methods instead reject any mismatch.
#[derive(Clone)]
pub struct Jet<T> {
    layout: Arc<JetLayout>,
    point: Arc<[T]>,
    coeffs: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryKind {
    Neg,
    Sin,
    Cos,
    Exp,
    Sqrt,
    Ln,
    Recip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryKind {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Right-hand operand of [`jet_arithmetic`].
#[derive(Clone)]
pub enum Operand<'a, T> {
    Jet(&'a Jet<T>),
    Scalar(T),
}

/// Applies `kind` to `a` and `b`, checking that jet operands are compatible.
pub fn jet_arithmetic<T: Scalar>(a: &Jet<T>, b: Operand<'_, T>, kind: BinaryKind) -> Result<Jet<T>> {
    match b {
        Operand::Jet(b) => match kind {
            BinaryKind::Add => a.try_add(b),
            BinaryKind::Sub => a.try_sub(b),
            BinaryKind::Mul => a.try_mul(b),
            BinaryKind::Div => a.try_div(b),
            BinaryKind::Pow => a.try_pow(b),
        },
        Operand::Scalar(s) => match kind {
            BinaryKind::Add => Ok(a.add_scalar(s)),
            BinaryKind::Sub => Ok(a.add_scalar(-s)),
            BinaryKind::Mul => Ok(a.scale(s)),
            BinaryKind::Div => {
                if s == T::zero() {
                    Err(Error::EvaluationSingular("division by zero".into()))
                } else {
                    Ok(a.scale(T::one() / s))
                }
            }
            BinaryKind::Pow => a.powf(s),
        },
    }
}

impl<T: Scalar> Jet<T> {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn order(&self) -> usize {
        self.layout.order()
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn point(&self) -> &[T] {
        &self.point
    }

    pub fn space(&self) -> JetSpace<T> {
        JetSpace {
            layout: self.layout.clone(),
            point: self.point.clone(),
        }
    }

    /// Function value at the base point.
    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Taylor coefficient `∂^α f / α!`; zero beyond the truncation order.
    pub fn coeff(&self, alpha: &[u8]) -> T {
        assert_eq!(alpha.len(), self.dim());
        self.layout
            .rank_of(alpha)
            .map_or(T::zero(), |r| self.coeffs[r])
    }

    /// Partial derivative `∂^α f` at the base point.
    pub fn derivative(&self, alpha: &[u8]) -> Result<T> {
        let degree: usize = alpha.iter().map(|&a| a as usize).sum();
        if degree > self.order() {
            return Err(Error::InsufficientJetOrder {
                needed: degree,
                have: self.order(),
            });
        }
        let r = self.layout.rank_of(alpha).expect("rank");
        Ok(self.coeffs[r] * T::lit(self.layout.factorial(r)))
    }

    /// Jet of `∂f/∂x_var`, one order lower.
    pub fn partial(&self, var: usize) -> Result<Jet<T>> {
        let lower = self.layout.lower().ok_or(Error::InsufficientJetOrder {
            needed: 1,
            have: 0,
        })?;
        let coeffs = self
            .layout
            .derivative_table(var)
            .iter()
            .map(|&(src, m)| self.coeffs[src as usize] * T::lit(m))
            .collect();
        Ok(Jet {
            layout: lower.clone(),
            point: self.point.clone(),
            coeffs,
        })
    }

    pub fn truncate(&self, order: usize) -> Jet<T> {
        if order >= self.order() {
            return self.clone();
        }
        let layout = self.layout.truncated(order);
        Jet {
            coeffs: self.coeffs[..layout.len()].to_vec(),
            layout,
            point: self.point.clone(),
        }
    }

    fn compatible(&self, other: &Jet<T>) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::MismatchedJets(format!(
                "dimension {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        if !Arc::ptr_eq(&self.point, &other.point) && self.point[..] != other.point[..] {
            return Err(Error::MismatchedJets("different base points".into()));
        }
        Ok(())
    }

    fn check_same(&self, other: &Jet<T>) -> Result<()> {
        self.compatible(other)?;
        if self.order() != other.order() {
            return Err(Error::MismatchedJets(format!(
                "order {} vs {}",
                self.order(),
                other.order()
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Jet<T>, f: impl Fn(T, T) -> T) -> Jet<T> {
        self.compatible(other).expect("incompatible jets");
        let (a, b) = if self.order() == other.order() {
            (self.clone(), other)
        } else if self.order() < other.order() {
            return self.zip_with(&other.truncate(self.order()), f);
        } else {
            (self.truncate(other.order()), other)
        };
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| f(x, y))
            .collect();
        Jet {
            layout: a.layout,
            point: a.point,
            coeffs,
        }
    }

    fn mul_same(&self, other: &Jet<T>) -> Jet<T> {
        let mut out = vec![T::zero(); self.coeffs.len()];
        for &(i, j, k) in self.layout.product_table() {
            out[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Jet {
            layout: self.layout.clone(),
            point: self.point.clone(),
            coeffs: out,
        }
    }

    fn mul_any(&self, other: &Jet<T>) -> Jet<T> {
        self.compatible(other).expect("incompatible jets");
        match self.order().cmp(&other.order()) {
            std::cmp::Ordering::Equal => self.mul_same(other),
            std::cmp::Ordering::Less => self.mul_same(&other.truncate(self.order())),
            std::cmp::Ordering::Greater => self.truncate(other.order()).mul_same(other),
        }
    }

    pub fn try_add(&self, other: &Jet<T>) -> Result<Jet<T>> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |x, y| x + y))
    }

    pub fn try_sub(&self, other: &Jet<T>) -> Result<Jet<T>> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |x, y| x - y))
    }

    pub fn try_mul(&self, other: &Jet<T>) -> Result<Jet<T>> {
        self.check_same(other)?;
        Ok(self.mul_same(other))
    }

    pub fn try_div(&self, other: &Jet<T>) -> Result<Jet<T>> {
        self.check_same(other)?;
        Ok(self.mul_same(&other.recip()?))
    }

    /// `self^other` for a jet exponent, via `exp(other · ln self)`.
    pub fn try_pow(&self, other: &Jet<T>) -> Result<Jet<T>> {
        self.check_same(other)?;
        if other.is_constant() {
            return self.powf(other.value());
        }
        Ok(self.ln()?.mul_same(other).exp())
    }

    pub fn apply(&self, kind: UnaryKind) -> Result<Jet<T>> {
        match kind {
            UnaryKind::Neg => Ok(-self),
            UnaryKind::Sin => Ok(self.sin()),
            UnaryKind::Cos => Ok(self.cos()),
            UnaryKind::Exp => Ok(self.exp()),
            UnaryKind::Sqrt => self.sqrt(),
            UnaryKind::Ln => self.ln(),
            UnaryKind::Recip => self.recip(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|c| *c == T::zero())
    }

    pub fn scale(&self, s: T) -> Jet<T> {
        Jet {
            layout: self.layout.clone(),
            point: self.point.clone(),
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: T) -> Jet<T> {
        let mut j = self.clone();
        j.coeffs[0] += s;
        j
    }

    /// `Σ_k taylor[k] · (self − value)^k`, i.e. `f ∘ self` given the Taylor
    /// coefficients of `f` about `self.value()`.
    pub fn compose(&self, taylor: &[T]) -> Jet<T> {
        let n = self.order();
        let mut delta = self.clone();
        delta.coeffs[0] = T::zero();
        let mut acc = self.space().constant(taylor[n]);
        for k in (0..n).rev() {
            acc = acc.mul_same(&delta);
            acc.coeffs[0] += taylor[k];
        }
        acc
    }

    fn factorial_inv(k: usize) -> T {
        T::one() / T::lit((1..=k as u64).product::<u64>() as f64)
    }

    pub fn exp(&self) -> Jet<T> {
        let e = self.value().exp();
        let t: Vec<T> = (0..=self.order()).map(|k| e * Self::factorial_inv(k)).collect();
        self.compose(&t)
    }

    pub fn sin(&self) -> Jet<T> {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let t: Vec<T> = (0..=self.order())
            .map(|k| cycle[k % 4] * Self::factorial_inv(k))
            .collect();
        self.compose(&t)
    }

    pub fn cos(&self) -> Jet<T> {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let t: Vec<T> = (0..=self.order())
            .map(|k| cycle[k % 4] * Self::factorial_inv(k))
            .collect();
        self.compose(&t)
    }

    pub fn ln(&self) -> Result<Jet<T>> {
        let v = self.value();
        if !(v > T::zero()) {
            return Err(Error::EvaluationSingular(format!("ln of non-positive value {v}")));
        }
        let mut t = vec![v.ln()];
        let mut p = T::one();
        for k in 1..=self.order() {
            p = p / v;
            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
            t.push(sign * p / T::lit(k as f64));
        }
        Ok(self.compose(&t))
    }

    /// Real power. Non-integer exponents require a positive value.
    pub fn powf(&self, p: T) -> Result<Jet<T>> {
        if p == p.round() && p.abs() <= T::lit(64.0) {
            return self.powi(p.to_i32().unwrap());
        }
        let v = self.value();
        if !(v > T::zero()) {
            return Err(Error::EvaluationSingular(format!(
                "fractional power {p} of non-positive value {v}"
            )));
        }
        // binom(p, k) · v^(p-k)
        let mut t = Vec::with_capacity(self.order() + 1);
        let mut c = v.powf(p);
        t.push(c);
        for k in 1..=self.order() {
            c = c * (p - T::lit((k - 1) as f64)) / (T::lit(k as f64) * v);
            t.push(c);
        }
        Ok(self.compose(&t))
    }

    pub fn powi(&self, n: i32) -> Result<Jet<T>> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut base = self.clone();
        let mut acc = self.space().constant(T::one());
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_same(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_same(&base);
            }
        }
        Ok(acc)
    }

    pub fn sqrt(&self) -> Result<Jet<T>> {
        let v = self.value();
        if !(v > T::zero()) {
            return Err(Error::EvaluationSingular(format!("sqrt of non-positive value {v}")));
        }
        self.powf(T::lit(0.5))
    }

    pub fn recip(&self) -> Result<Jet<T>> {
        let v = self.value();
        if v == T::zero() || !v.is_finite() {
            return Err(Error::EvaluationSingular(format!("division by {v}")));
        }
        let inv = T::one() / v;
        let mut t = Vec::with_capacity(self.order() + 1);
        let mut c = inv;
        for _ in 0..=self.order() {
            t.push(c);
            c = -c * inv;
        }
        Ok(self.compose(&t))
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

impl<T: Scalar> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (alpha, c) in self.layout.multi_indices().iter().zip(&self.coeffs) {
            if *c != T::zero() {
                m.entry(alpha, c);
            }
        }
        m.finish()
    }
}

impl<T: Scalar> PartialEq for Jet<T> {
    fn eq(&self, other: &Self) -> bool {
        self.check_same(other).is_ok() && self.coeffs == other.coeffs
    }
}

macro_rules! jet_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<'a, T: Scalar> $tr<&'a Jet<T>> for &'a Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: &'a Jet<T>) -> Jet<T> {
                let f: fn(&Jet<T>, &Jet<T>) -> Jet<T> = $body;
                f(self, rhs)
            }
        }
        impl<T: Scalar> $tr<Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: Jet<T>) -> Jet<T> {
                (&self).$method(&rhs)
            }
        }
        impl<'a, T: Scalar> $tr<&'a Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: &'a Jet<T>) -> Jet<T> {
                (&self).$method(rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| a.zip_with(b, |x, y| x + y));
jet_binop!(Sub, sub, |a, b| a.zip_with(b, |x, y| x - y));
jet_binop!(Mul, mul, |a, b| a.mul_any(b));
jet_binop!(Div, div, |a, b| {
    let r = b.recip().unwrap_or_else(|_| b.scale(T::nan()));
    a.mul_any(&r)
});

impl<T: Scalar> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Mul<T> for &Jet<T> {
    type Output = Jet<T>;
    fn mul(self, s: T) -> Jet<T> {
        self.scale(s)
    }
}

impl<T: Scalar> Mul<T> for Jet<T> {
    type Output = Jet<T>;
    fn mul(self, s: T) -> Jet<T> {
        self.scale(s)
    }
}

impl<T: Scalar> Add<T> for &Jet<T> {
    type Output = Jet<T>;
    fn add(self, s: T) -> Jet<T> {
        self.add_scalar(s)
    }
}

impl<T: Scalar> Add<T> for Jet<T> {
    type Output = Jet<T>;
    fn add(self, s: T) -> Jet<T> {
        self.add_scalar(s)
    }
}
