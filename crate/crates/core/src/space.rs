//! The PPMI-weighted space and per-word statistics derived from raw counts.

use std::io::Write;
use std::path::Path;

use crate::corpus::RawCounts;
use crate::error::{Error, Result};
use crate::io::{self as fsio, Metadata};
use crate::measures::SparseVec;

/// PPMI rows indexed by target id. Only strictly positive weights are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSpace {
    rows: Vec<SparseVec>,
    window: usize,
}

static EMPTY: SparseVec = SparseVec::EMPTY;

impl WeightedSpace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// The word's weighted row; empty for ids outside the space.
    pub fn row(&self, word: u32) -> &SparseVec {
        self.rows.get(word as usize).unwrap_or(&EMPTY)
    }

    pub fn rows(&self) -> &[SparseVec] {
        &self.rows
    }

    /// `target_id<TAB>context_id<TAB>weight` with six decimals, plus a sidecar
    /// that extends `meta` with `weighting=ppmi`.
    pub fn write_tsv(&self, path: &Path, meta: &Metadata) -> Result<()> {
        fsio::write_atomic(path, |w| {
            for (t, row) in self.rows.iter().enumerate() {
                for &(c, weight) in row.entries() {
                    writeln!(w, "{t}\t{c}\t{weight:.6}")?;
                }
            }
            Ok(())
        })?;
        let mut meta = meta.clone();
        meta.set("weighting", "ppmi");
        meta.write(&fsio::sidecar_path(path))
    }
}

#[inline]
fn ppmi_row(raw: &RawCounts, target: u32) -> SparseVec {
    let total = raw.total() as f64;
    let row_marginal = raw.row_marginal(target) as f64;
    let entries = raw
        .row(target)
        .iter()
        .filter_map(|&(c, n)| {
            let pmi = ((n as f64 * total) / (row_marginal * raw.col_marginal(c) as f64)).log2();
            (pmi > 0.0).then_some((c, pmi))
        })
        .collect();
    SparseVec::from_sorted_unchecked(entries)
}

fn check_total(raw: &RawCounts) -> Result<()> {
    if raw.total() == 0 {
        return Err(Error::contract("cannot weight an empty count matrix"));
    }
    Ok(())
}

pub fn ppmi_weight_seq(raw: &RawCounts) -> Result<WeightedSpace> {
    check_total(raw)?;
    let rows = (0..raw.vocab_size() as u32)
        .map(|t| ppmi_row(raw, t))
        .collect();
    Ok(WeightedSpace {
        rows,
        window: raw.window(),
    })
}

#[cfg(feature = "parallel")]
pub fn ppmi_weight_par(raw: &RawCounts) -> Result<WeightedSpace> {
    use rayon::prelude::*;

    check_total(raw)?;
    let rows = (0..raw.vocab_size() as u32)
        .into_par_iter()
        .map(|t| ppmi_row(raw, t))
        .collect();
    Ok(WeightedSpace {
        rows,
        window: raw.window(),
    })
}

/// Weights every cell by `max(0, log2(n(w,c) N / (n(w) n(c))))` and drops
/// the non-positive ones.
pub fn ppmi_weight(raw: &RawCounts) -> Result<WeightedSpace> {
    #[cfg(feature = "parallel")]
    {
        ppmi_weight_par(raw)
    }
    #[cfg(not(feature = "parallel"))]
    {
        ppmi_weight_seq(raw)
    }
}

/// Shannon entropy in bits of the word's raw context distribution.
/// Words with an empty row get 0.
pub fn row_entropy(raw: &RawCounts, word: u32) -> f64 {
    let marginal = raw.row_marginal(word);
    if marginal == 0 {
        return 0.0;
    }
    let marginal = marginal as f64;
    let h: f64 = raw
        .row(word)
        .iter()
        .map(|&(_, n)| {
            let p = n as f64 / marginal;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// A word's `n` highest-weighted contexts, best first.
///
/// Entry `k` has rank `k + 1`; equal weights are ordered by context id.
#[derive(Debug, Clone, PartialEq)]
pub struct TopContexts {
    pub word: u32,
    pub n: usize,
    pub ranked: Vec<(u32, f64)>,
}

pub fn top_n_contexts(space: &WeightedSpace, word: u32, n: usize) -> Result<TopContexts> {
    if n == 0 {
        return Err(Error::contract("top-N size must be at least 1"));
    }
    let mut ranked = space.row(word).entries().to_vec();
    let by_weight = |a: &(u32, f64), b: &(u32, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    if ranked.len() > n {
        ranked.select_nth_unstable_by(n - 1, by_weight);
        ranked.truncate(n);
    }
    ranked.sort_unstable_by(by_weight);
    Ok(TopContexts { word, n, ranked })
}

/// Co-occurrence count of `w1` with `w2` in `raw`.
pub fn pair_cooc(raw: &RawCounts, w1: u32, w2: u32) -> u64 {
    raw.get(w1, w2)
}
