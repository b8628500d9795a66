//! Seeded sample points and random polynomial fields.
//!
//! Every random stream is derived from `(seed, background, purpose)`, so a
//! background's results do not depend on which other backgrounds run or in
//! what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::jets::JetLayout;
use crate::metric_dsl::{Expr, MetricSpec};

/// Fraction of each domain interval kept clear at both ends.
pub const DOMAIN_MARGIN: f64 = 0.05;

/// FNV-1a, stable across platforms and releases.
fn fnv1a(bytes: impl IntoIterator<Item = u8>, mut h: u64) -> u64 {
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

pub fn stream(seed: u64, background: &str, purpose: &str) -> ChaCha8Rng {
    let mut h = fnv1a(seed.to_le_bytes(), 0xcbf2_9ce4_8422_2325);
    h = fnv1a(background.bytes().chain([0u8]), h);
    h = fnv1a(purpose.bytes(), h);
    ChaCha8Rng::seed_from_u64(h)
}

/// Uniform points in the safe domain, kept `DOMAIN_MARGIN` away from its edges.
pub fn sample_points(spec: &MetricSpec, rng: &mut impl Rng, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            spec.safe_domain
                .iter()
                .map(|&(lo, hi)| {
                    let pad = DOMAIN_MARGIN * (hi - lo);
                    rng.gen_range(lo + pad..hi - pad)
                })
                .collect()
        })
        .collect()
}

/// Coordinate rescaled to `[−1, 1]` over its safe interval.
fn normalised(spec: &MetricSpec, i: usize) -> Expr {
    let (lo, hi) = spec.safe_domain[i];
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    Expr::mul(Expr::num(1.0 / half), Expr::sub(Expr::coord(i), Expr::num(mid)))
}

/// Polynomial of total degree `≤ degree` in the normalised coordinates, with
/// coefficients uniform on `[−1, 1]`.
pub fn random_polynomial(spec: &MetricSpec, rng: &mut impl Rng, degree: usize) -> Expr {
    let layout = JetLayout::get(spec.dim, degree);
    let us: Vec<Expr> = (0..spec.dim).map(|i| normalised(spec, i)).collect();
    let mut acc = Expr::num(0.0);
    for alpha in layout.multi_indices() {
        let c: f64 = rng.gen_range(-1.0..=1.0);
        let mut term = Expr::num(c);
        for (u, &k) in us.iter().zip(alpha.iter()) {
            if k > 0 {
                term = Expr::mul(term, Expr::pow(u.clone(), Expr::num(k as f64)));
            }
        }
        acc = Expr::add(acc, term);
    }
    acc
}

/// One random polynomial per coordinate.
pub fn random_covector(spec: &MetricSpec, rng: &mut impl Rng, degree: usize) -> Vec<Expr> {
    (0..spec.dim).map(|_| random_polynomial(spec, rng, degree)).collect()
}

/// Symmetric table of random polynomials, row-major.
pub fn random_symmetric(spec: &MetricSpec, rng: &mut impl Rng, degree: usize) -> Vec<Expr> {
    let n = spec.dim;
    let mut out = vec![Expr::num(0.0); n * n];
    for a in 0..n {
        for b in a..n {
            let p = random_polynomial(spec, rng, degree);
            out[a * n + b] = p.clone();
            out[b * n + a] = p;
        }
    }
    out
}
