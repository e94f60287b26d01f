//! Pairwise similarity and inclusion measures over sparse context vectors.
//!
//! Directional measures read `u` as the candidate narrower term and `v` as
//! the broader one. Empty vectors make every similarity zero, so the
//! functions are total.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::space::TopContexts;

/// Sparse vector with strictly positive, finite weights, sorted by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVec {
    entries: Vec<(u32, f64)>,
}

impl SparseVec {
    pub(crate) const EMPTY: SparseVec = SparseVec {
        entries: Vec::new(),
    };

    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from `(id, weight)` pairs in any order.
    ///
    /// Fails on duplicate ids or weights that are not finite and positive.
    pub fn from_entries(mut entries: Vec<(u32, f64)>) -> Result<Self> {
        entries.sort_unstable_by_key(|&(id, _)| id);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::contract("duplicate context id in sparse vector"));
        }
        if let Some(&(id, w)) = entries.iter().find(|(_, w)| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::contract(format!(
                "context {id} has weight {w}; sparse weights must be finite and positive"
            )));
        }
        Ok(SparseVec { entries })
    }

    /// Caller guarantees sorted unique ids and positive finite weights.
    pub(crate) fn from_sorted_unchecked(entries: Vec<(u32, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|(_, w)| w.is_finite() && *w > 0.0));
        SparseVec { entries }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<f64> {
        self.entries
            .binary_search_by_key(&id, |&(c, _)| c)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w).sum()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }

    /// Calls `f(u[c], v[c])` for every context in both supports, in id order.
    fn for_shared(&self, other: &SparseVec, mut f: impl FnMut(f64, f64)) {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    f(a[i].1, b[j].1);
                    i += 1;
                    j += 1;
                }
            }
        }
    }
}

pub fn cosine(u: &SparseVec, v: &SparseVec) -> f64 {
    if u.is_empty() || v.is_empty() {
        return 0.0;
    }
    let mut dot = 0.0;
    u.for_shared(v, |a, b| dot += a * b);
    (dot / (u.norm() * v.norm())).clamp(0.0, 1.0)
}

/// Lin's measure: weight of the shared contexts in both vectors over the
/// total weight of both.
pub fn lin(u: &SparseVec, v: &SparseVec) -> f64 {
    let denom = u.sum() + v.sum();
    if denom == 0.0 {
        return 0.0;
    }
    let mut shared = 0.0;
    u.for_shared(v, |a, b| shared += a + b);
    (shared / denom).min(1.0)
}

/// Share of `u`'s weight that falls on contexts `v` also has.
pub fn weeds_prec(u: &SparseVec, v: &SparseVec) -> f64 {
    let denom = u.sum();
    if denom == 0.0 {
        return 0.0;
    }
    let mut shared = 0.0;
    u.for_shared(v, |a, _| shared += a);
    (shared / denom).min(1.0)
}

/// Degree to which `u` is included in `v`, crediting each context with the
/// smaller of the two weights.
pub fn clarke_de(u: &SparseVec, v: &SparseVec) -> f64 {
    let denom = u.sum();
    if denom == 0.0 {
        return 0.0;
    }
    let mut shared = 0.0;
    u.for_shared(v, |a, b| shared += a.min(b));
    (shared / denom).min(1.0)
}

/// Geometric mean of cosine and WeedsPrec.
pub fn cos_weeds(u: &SparseVec, v: &SparseVec) -> f64 {
    (cosine(u, v) * weeds_prec(u, v)).sqrt()
}

/// Inclusion of `u` in `v` combined with non-inclusion of `v` in `u`.
pub fn inv_cl(u: &SparseVec, v: &SparseVec) -> f64 {
    (clarke_de(u, v) * (1.0 - clarke_de(v, u))).max(0.0).sqrt()
}

/// Rank-weighted overlap of two top-N context lists: every shared context
/// adds the reciprocal of its mean 1-based rank.
pub fn apsyn(t1: &TopContexts, t2: &TopContexts) -> Result<f64> {
    if t1.n != t2.n {
        return Err(Error::contract(format!(
            "apsyn needs equal list sizes, got {} and {}",
            t1.n, t2.n
        )));
    }
    let (small, large) = if t1.ranked.len() <= t2.ranked.len() {
        (t1, t2)
    } else {
        (t2, t1)
    };
    let ranks: HashMap<u32, usize> = small
        .ranked
        .iter()
        .enumerate()
        .map(|(k, &(c, _))| (c, k + 1))
        .collect();
    // Sum in the large list's rank order so the result is independent of
    // hash iteration.
    let mut total = 0.0;
    for (k, &(c, _)) in large.ranked.iter().enumerate() {
        if let Some(&r) = ranks.get(&c) {
            total += 1.0 / ((r + k + 1) as f64 / 2.0);
        }
    }
    Ok(total)
}

/// Inverse of APSyn regularised as `1 / (1 + apsyn)`, finite when the top
/// lists do not intersect.
pub fn apant(apsyn_value: f64) -> f64 {
    debug_assert!(apsyn_value >= 0.0);
    1.0 / (1.0 + apsyn_value)
}
