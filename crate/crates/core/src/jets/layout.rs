//! Multi-index bookkeeping for dense truncated Taylor tables.
//!
//! Multi-indices are ranked graded-lexicographically: all indices of total
//! degree 0, then degree 1, and so on, lexicographically descending within a
//! degree. Because the ordering inside a degree does not depend on the
//! truncation order, the table for order `k` is a prefix of the table for any
//! order above `k`, so truncation is a slice.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Largest chart dimension a layout is built for.
pub const MAX_DIM: usize = 8;

#[derive(Debug)]
pub struct JetLayout {
    dim: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    rank: HashMap<Vec<u8>, usize>,
    factorial: Vec<f64>,
    // (i, j, k) with exps[i] + exps[j] == exps[k]
    product: Vec<(u32, u32, u32)>,
    // per variable, per entry of the next-lower layout: (source rank, multiplier)
    derivative: Vec<Vec<(u32, f64)>>,
    lower: Option<Arc<JetLayout>>,
}

fn enumerate_degree(dim: usize, degree: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(prefix: &mut Vec<u8>, dim: usize, remaining: usize, out: &mut Vec<Vec<u8>>) {
        if prefix.len() + 1 == dim {
            prefix.push(remaining as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=remaining).rev() {
            prefix.push(k as u8);
            rec(prefix, dim, remaining - k, out);
            prefix.pop();
        }
    }
    if dim == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return;
    }
    rec(&mut Vec::with_capacity(dim), dim, degree, out);
}

fn multi_factorial(alpha: &[u8]) -> f64 {
    alpha
        .iter()
        .map(|&a| (1..=a as u64).product::<u64>() as f64)
        .product()
}

impl JetLayout {
    fn build(dim: usize, order: usize, lower: Option<Arc<JetLayout>>) -> JetLayout {
        let mut exps = Vec::new();
        for d in 0..=order {
            enumerate_degree(dim, d, &mut exps);
        }
        let rank: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let factorial = exps.iter().map(|e| multi_factorial(e)).collect();

        let mut product = Vec::new();
        let mut sum = vec![0u8; dim];
        for (i, a) in exps.iter().enumerate() {
            let da: usize = a.iter().map(|&x| x as usize).sum();
            for (j, b) in exps.iter().enumerate() {
                let db: usize = b.iter().map(|&x| x as usize).sum();
                if da + db > order {
                    // graded order: every later b has degree >= db
                    break;
                }
                for v in 0..dim {
                    sum[v] = a[v] + b[v];
                }
                let k = rank[&sum];
                product.push((i as u32, j as u32, k as u32));
            }
        }

        let derivative = match &lower {
            Some(low) => (0..dim)
                .map(|v| {
                    low.exps
                        .iter()
                        .map(|beta| {
                            let mut up = beta.clone();
                            up[v] += 1;
                            (rank[&up] as u32, up[v] as f64)
                        })
                        .collect()
                })
                .collect(),
            None => Vec::new(),
        };

        JetLayout {
            dim,
            order,
            exps,
            rank,
            factorial,
            product,
            derivative,
            lower,
        }
    }

    /// Shared layout for `dim` variables truncated at total degree `order`.
    pub fn get(dim: usize, order: usize) -> Arc<JetLayout> {
        assert!(dim <= MAX_DIM, "jet dimension {dim} exceeds {MAX_DIM}");
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(l) = cache.lock().unwrap().get(&(dim, order)) {
            return l.clone();
        }
        let lower = if order == 0 {
            None
        } else {
            Some(JetLayout::get(dim, order - 1))
        };
        let built = Arc::new(JetLayout::build(dim, order, lower));
        cache
            .lock()
            .unwrap()
            .entry((dim, order))
            .or_insert(built)
            .clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of stored coefficients, `C(dim + order, order)`.
    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn multi_indices(&self) -> &[Vec<u8>] {
        &self.exps
    }

    pub fn rank_of(&self, alpha: &[u8]) -> Option<usize> {
        self.rank.get(alpha).copied()
    }

    /// `alpha!` for the multi-index at `rank`.
    pub fn factorial(&self, rank: usize) -> f64 {
        self.factorial[rank]
    }

    pub(crate) fn product_table(&self) -> &[(u32, u32, u32)] {
        &self.product
    }

    pub(crate) fn derivative_table(&self, var: usize) -> &[(u32, f64)] {
        &self.derivative[var]
    }

    /// Layout of order `order` (must not exceed this layout's order).
    pub fn truncated(self: &Arc<Self>, order: usize) -> Arc<JetLayout> {
        assert!(order <= self.order);
        let mut cur = self.clone();
        while cur.order > order {
            cur = cur.lower.clone().expect("layout chain");
        }
        cur
    }

    pub fn lower(&self) -> Option<&Arc<JetLayout>> {
        self.lower.as_ref()
    }
}
