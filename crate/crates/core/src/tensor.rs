//! Dense component tensors in a fixed chart.
//!
//! Entries are stored row-major with the first slot most significant. A
//! tensor holds either plain scalars or jets, never a mixture; use
//! [`ComponentTensor::promote`] to lift real entries to constant jets.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::jets::{Jet, JetSpace};
use crate::metric_dsl::MetricAtPoint;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    Co,
    Contra,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymMode {
    Sym,
    Antisym,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexDirection {
    Raise,
    Lower,
}

/// Arithmetic needed from a tensor entry.
pub trait Entry<T: Scalar>: Clone + Debug + Send + Sync {
    fn value(&self) -> T;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, s: T) -> Self;
    /// `g_ab` (or `g^ab` when `inverse`) in the same representation as `like`.
    fn metric(m: &MetricAtPoint<T>, a: usize, b: usize, inverse: bool, like: &Self) -> Self;
}

impl<T: Scalar> Entry<T> for T {
    fn value(&self) -> T {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn sub(&self, o: &Self) -> Self {
        *self - *o
    }
    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }
    fn scale(&self, s: T) -> Self {
        *self * s
    }
    fn metric(m: &MetricAtPoint<T>, a: usize, b: usize, inverse: bool, _: &Self) -> Self {
        if inverse {
            m.g_inv[(a, b)]
        } else {
            m.g[(a, b)]
        }
    }
}

impl<T: Scalar> Entry<T> for Jet<T> {
    fn value(&self) -> T {
        Jet::value(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, s: T) -> Self {
        Jet::scale(self, s)
    }
    fn metric(m: &MetricAtPoint<T>, a: usize, b: usize, inverse: bool, like: &Self) -> Self {
        let g = if inverse { &m.g_inv_jet } else { &m.g_jet };
        g.get(&[a, b]).truncate(like.order())
    }
}

/// Iterates over all index tuples of a given rank in storage order.
pub struct IndexIter {
    dim: usize,
    cur: Vec<usize>,
    done: bool,
}

impl IndexIter {
    pub fn new(dim: usize, rank: usize) -> Self {
        IndexIter {
            dim,
            cur: vec![0; rank],
            done: dim == 0 && rank > 0,
        }
    }
}

impl Iterator for IndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut k = self.cur.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.cur[k] += 1;
            if self.cur[k] < self.dim {
                break;
            }
            self.cur[k] = 0;
        }
        Some(out)
    }
}

/// All permutations of `0..k` with their signs.
fn permutations(k: usize) -> Vec<(Vec<usize>, i32)> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut perms = Vec::new();
    rec(&mut Vec::new(), &mut (0..k).collect(), &mut perms);
    perms
        .into_iter()
        .map(|p| {
            let mut inversions = 0;
            for i in 0..k {
                for j in i + 1..k {
                    if p[i] > p[j] {
                        inversions += 1;
                    }
                }
            }
            let sign = if inversions % 2 == 0 { 1 } else { -1 };
            (p, sign)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentTensor<E> {
    dim: usize,
    valence: Vec<Variance>,
    entries: Vec<E>,
    pub label: Option<String>,
}

impl<E> ComponentTensor<E> {
    pub fn from_entries(dim: usize, valence: Vec<Variance>, entries: Vec<E>) -> Self {
        assert_eq!(entries.len(), dim.pow(valence.len() as u32));
        ComponentTensor {
            dim,
            valence,
            entries,
            label: None,
        }
    }

    pub fn from_fn(dim: usize, valence: Vec<Variance>, mut f: impl FnMut(&[usize]) -> E) -> Self {
        let entries = IndexIter::new(dim, valence.len()).map(|i| f(&i)).collect();
        ComponentTensor {
            dim,
            valence,
            entries,
            label: None,
        }
    }

    /// Fallible variant of [`ComponentTensor::from_fn`].
    pub fn try_from_fn(
        dim: usize,
        valence: Vec<Variance>,
        mut f: impl FnMut(&[usize]) -> Result<E>,
    ) -> Result<Self> {
        let entries = IndexIter::new(dim, valence.len())
            .map(|i| f(&i))
            .collect::<Result<Vec<_>>>()?;
        Ok(ComponentTensor {
            dim,
            valence,
            entries,
            label: None,
        })
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.valence.len()
    }

    pub fn valence(&self) -> &[Variance] {
        &self.valence
    }

    pub fn entries(&self) -> &[E] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<E> {
        self.entries
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &E {
        &self.entries[self.offset(idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut E {
        let o = self.offset(idx);
        &mut self.entries[o]
    }

    pub fn indices(&self) -> IndexIter {
        IndexIter::new(self.dim, self.rank())
    }

    pub fn map<F>(&self, f: impl FnMut(&E) -> F) -> ComponentTensor<F> {
        ComponentTensor {
            dim: self.dim,
            valence: self.valence.clone(),
            entries: self.entries.iter().map(f).collect(),
            label: self.label.clone(),
        }
    }
}

impl<E> std::ops::Index<(usize, usize)> for ComponentTensor<E> {
    type Output = E;
    fn index(&self, (a, b): (usize, usize)) -> &E {
        debug_assert_eq!(self.rank(), 2);
        &self.entries[a * self.dim + b]
    }
}

impl<T: Scalar> ComponentTensor<T> {
    pub fn zeros(dim: usize, valence: Vec<Variance>) -> Self {
        let n = dim.pow(valence.len() as u32);
        Self::from_entries(dim, valence, vec![T::zero(); n])
    }

    /// Lifts every entry to a constant jet in `space`.
    pub fn promote(&self, space: &JetSpace<T>) -> ComponentTensor<Jet<T>> {
        self.map(|&v| space.constant(v))
    }
}

impl<T: Scalar> ComponentTensor<Jet<T>> {
    /// Values at the base point.
    pub fn values(&self) -> ComponentTensor<T> {
        self.map(|j| j.value())
    }

    /// Smallest jet order among the entries.
    pub fn order(&self) -> usize {
        self.entries.iter().map(|j| j.order()).min().unwrap_or(0)
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.map(|j| j.truncate(order))
    }
}

impl<E> ComponentTensor<E> {
    pub fn max_abs<T: Scalar>(&self) -> T
    where
        E: Entry<T>,
    {
        self.entries
            .iter()
            .fold(T::zero(), |m, e| m.max(e.value().abs()))
    }

    /// Largest entrywise difference of values.
    pub fn max_abs_diff<T: Scalar>(&self, other: &Self) -> T
    where
        E: Entry<T>,
    {
        assert_eq!(self.entries.len(), other.entries.len());
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(T::zero(), |m, (a, b)| m.max((a.value() - b.value()).abs()))
    }

    pub fn add<T: Scalar>(&self, other: &Self) -> Self
    where
        E: Entry<T>,
    {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub<T: Scalar>(&self, other: &Self) -> Self
    where
        E: Entry<T>,
    {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn scale<T: Scalar>(&self, s: T) -> Self
    where
        E: Entry<T>,
    {
        self.map(|e| e.scale(s))
    }

    fn zip(&self, other: &Self, f: impl Fn(&E, &E) -> E) -> Self {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.valence, other.valence, "valence mismatch");
        ComponentTensor {
            dim: self.dim,
            valence: self.valence.clone(),
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
            label: None,
        }
    }

    /// Averages over all permutations of `slots` (signed for `Antisym`),
    /// with weight `1/k!`.
    pub fn symmetrize_slots<T: Scalar>(&self, slots: &[usize], mode: SymMode) -> Result<Self>
    where
        E: Entry<T>,
    {
        if slots.is_empty() {
            return Err(Error::BadSlots("no slots selected".into()));
        }
        for (i, &s) in slots.iter().enumerate() {
            if s >= self.rank() {
                return Err(Error::BadSlots(format!("slot {s} out of range")));
            }
            if slots[..i].contains(&s) {
                return Err(Error::BadSlots(format!("slot {s} repeated")));
            }
            if self.valence[s] != self.valence[slots[0]] {
                return Err(Error::BadSlots("slots have mixed variance".into()));
            }
        }
        let perms = permutations(slots.len());
        let weight = T::one() / T::lit(perms.len() as f64);
        let mut src = vec![0; self.rank()];
        Ok(ComponentTensor::from_fn(self.dim, self.valence.clone(), |idx| {
            let mut acc: Option<E> = None;
            for (p, sign) in &perms {
                src.copy_from_slice(idx);
                for (k, &pk) in p.iter().enumerate() {
                    src[slots[k]] = idx[slots[pk]];
                }
                let term = self.get(&src);
                let term = if mode == SymMode::Antisym && *sign < 0 {
                    term.scale(-T::one())
                } else {
                    term.clone()
                };
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term),
                });
            }
            acc.expect("non-empty permutation set").scale(weight)
        }))
    }

    /// Sums over a paired contravariant and covariant slot.
    pub fn contract_slots<T: Scalar>(&self, slot_up: usize, slot_down: usize) -> Result<Self>
    where
        E: Entry<T>,
    {
        if slot_up >= self.rank() || slot_down >= self.rank() || slot_up == slot_down {
            return Err(Error::BadSlots(format!("cannot contract ({slot_up}, {slot_down})")));
        }
        if self.valence[slot_up] != Variance::Contra || self.valence[slot_down] != Variance::Co {
            return Err(Error::BadSlots(
                "contraction pairs a contravariant with a covariant slot".into(),
            ));
        }
        let valence: Vec<Variance> = self
            .valence
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != slot_up && *i != slot_down)
            .map(|(_, v)| *v)
            .collect();
        let mut src = vec![0; self.rank()];
        Ok(ComponentTensor::from_fn(self.dim, valence, |idx| {
            let mut it = idx.iter();
            for (s, slot) in src.iter_mut().enumerate() {
                if s != slot_up && s != slot_down {
                    *slot = *it.next().unwrap();
                }
            }
            let mut acc: Option<E> = None;
            for k in 0..self.dim {
                src[slot_up] = k;
                src[slot_down] = k;
                let term = self.get(&src);
                acc = Some(match acc {
                    None => term.clone(),
                    Some(a) => a.add(term),
                });
            }
            acc.expect("dimension is positive")
        }))
    }

    /// Raises or lowers one slot with the background metric.
    pub fn adjust_index<T: Scalar>(
        &self,
        slot: usize,
        direction: IndexDirection,
        m: &MetricAtPoint<T>,
    ) -> Result<Self>
    where
        E: Entry<T>,
    {
        if slot >= self.rank() {
            return Err(Error::BadSlots(format!("slot {slot} out of range")));
        }
        let (need, to, inverse) = match direction {
            IndexDirection::Raise => (Variance::Co, Variance::Contra, true),
            IndexDirection::Lower => (Variance::Contra, Variance::Co, false),
        };
        if self.valence[slot] != need {
            return Err(Error::BadSlots(format!("slot {slot} is already {to:?}")));
        }
        if m.g.dim() != self.dim {
            return Err(Error::BadSlots("metric dimension differs".into()));
        }
        let mut valence = self.valence.clone();
        valence[slot] = to;
        let mut src = vec![0; self.rank()];
        Ok(ComponentTensor::from_fn(self.dim, valence, |idx| {
            src.copy_from_slice(idx);
            let mut acc: Option<E> = None;
            for k in 0..self.dim {
                src[slot] = k;
                let t = self.get(&src);
                let term = E::metric(m, idx[slot], k, inverse, t).mul(t);
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term),
                });
            }
            acc.expect("dimension is positive")
        }))
    }

    /// Residuals against the two Riemann-type conditions
    /// `T_abcd = T_[ab][cd]` and `T_[abc]d = 0`.
    pub fn check_riemann_symmetries<T: Scalar>(&self) -> Result<RiemannSymmetryReport<T>>
    where
        E: Entry<T>,
    {
        if self.rank() != 4 || self.valence.iter().any(|v| *v != Variance::Co) {
            return Err(Error::BadSlots("expected four covariant slots".into()));
        }
        let skew = self
            .symmetrize_slots(&[0, 1], SymMode::Antisym)?
            .symmetrize_slots(&[2, 3], SymMode::Antisym)?;
        let cyclic = self.symmetrize_slots(&[0, 1, 2], SymMode::Antisym)?;
        Ok(RiemannSymmetryReport {
            pair_residual: self.max_abs_diff(&skew),
            bianchi_residual: cyclic.max_abs(),
            magnitude: self.max_abs(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannSymmetryReport<T> {
    /// `max |T − T_[ab][cd]|`
    pub pair_residual: T,
    /// `max |T_[abc]d|`
    pub bianchi_residual: T,
    pub magnitude: T,
}

impl<T: Scalar> RiemannSymmetryReport<T> {
    pub fn max_residual(&self) -> T {
        self.pair_residual.max(self.bianchi_residual)
    }
}
