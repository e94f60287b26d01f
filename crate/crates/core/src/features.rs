//! The 18-dimensional feature vector of a word pair.
//!
//! Pair order fixes the direction of the inclusion measures: `w1` supplies
//! `u` and `w2` supplies `v`. Out-of-vocabulary words get zero frequency,
//! entropy and similarities, an `apant` of 1 and `same_pos = 0`, and the
//! matching `oov` flag is set.

use std::io::Write;
use std::path::Path;

use crate::corpus::{RawCounts, Vocabulary};
use crate::error::{Error, Result};
use crate::io as fsio;
use crate::measures::{self, SparseVec};
use crate::relation::Label;
use crate::space::{self, WeightedSpace};

pub const N_FEATURES: usize = 18;

/// Canonical feature order. Models, importances and TSV headers all use it.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "freq1",
    "freq2",
    "diff_freq",
    "cooc",
    "entr1",
    "entr2",
    "diff_entr",
    "cos",
    "lin",
    "weeds_prec",
    "cos_weeds",
    "clarke_de",
    "inv_cl",
    "apsyn_100",
    "apsyn_1000",
    "apant_100",
    "apant_1000",
    "same_pos",
];

/// Index of a feature by canonical name.
pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|&n| n == name)
}

/// Default list sizes behind the `apsyn_100`/`apsyn_1000` slots.
pub const DEFAULT_TOP_N: [usize; 2] = [100, 1000];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WordPair {
    pub w1: String,
    pub w2: String,
    pub label: Option<Label>,
}

impl WordPair {
    pub fn new(w1: impl Into<String>, w2: impl Into<String>, label: Option<Label>) -> Self {
        WordPair {
            w1: w1.into(),
            w2: w2.into(),
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairFeatures {
    pub values: [f64; N_FEATURES],
    pub oov1: bool,
    pub oov2: bool,
}

impl PairFeatures {
    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).map(|i| self.values[i])
    }
}

/// Everything feature extraction reads, bundled once per space.
#[derive(Debug, Clone, Copy)]
pub struct FeatureExtractor<'a> {
    vocab: &'a Vocabulary,
    raw: &'a RawCounts,
    space: &'a WeightedSpace,
    cooc: &'a RawCounts,
    top_n: [usize; 2],
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(vocab: &'a Vocabulary, raw: &'a RawCounts, space: &'a WeightedSpace) -> Self {
        FeatureExtractor {
            vocab,
            raw,
            space,
            cooc: raw,
            top_n: DEFAULT_TOP_N,
        }
    }

    /// List sizes for the two APSyn/APAnt slots.
    pub fn with_top_n(mut self, top_n: [usize; 2]) -> Result<Self> {
        if top_n.contains(&0) {
            return Err(Error::contract("top-N sizes must be at least 1"));
        }
        self.top_n = top_n;
        Ok(self)
    }

    /// Counts to read `cooc` from, e.g. sentence-scoped counts.
    pub fn with_cooc(mut self, cooc: &'a RawCounts) -> Self {
        self.cooc = cooc;
        self
    }

    pub fn extract(&self, pair: &WordPair) -> PairFeatures {
        let id1 = self.vocab.id(&pair.w1);
        let id2 = self.vocab.id(&pair.w2);

        let freq = |id: Option<u32>| id.map_or(0.0, |i| self.vocab.entry(i).total_count as f64);
        let entropy = |id: Option<u32>| id.map_or(0.0, |i| space::row_entropy(self.raw, i));
        let (freq1, freq2) = (freq(id1), freq(id2));
        let (entr1, entr2) = (entropy(id1), entropy(id2));

        let mut values = [0.0; N_FEATURES];
        values[0] = freq1;
        values[1] = freq2;
        values[2] = freq1 - freq2;
        values[4] = entr1;
        values[5] = entr2;
        values[6] = entr1 - entr2;

        let mut apsyn = [0.0; 2];
        if let (Some(a), Some(b)) = (id1, id2) {
            values[3] = space::pair_cooc(self.cooc, a, b) as f64;

            let u: &SparseVec = self.space.row(a);
            let v: &SparseVec = self.space.row(b);
            values[7] = measures::cosine(u, v);
            values[8] = measures::lin(u, v);
            values[9] = measures::weeds_prec(u, v);
            values[10] = measures::cos_weeds(u, v);
            values[11] = measures::clarke_de(u, v);
            values[12] = measures::inv_cl(u, v);

            for (slot, &n) in self.top_n.iter().enumerate() {
                let t1 =
                    space::top_n_contexts(self.space, a, n).expect("n checked at construction");
                let t2 =
                    space::top_n_contexts(self.space, b, n).expect("n checked at construction");
                apsyn[slot] = measures::apsyn(&t1, &t2).expect("lists share n");
            }

            let pos1 = self.vocab.entry(a).majority_pos();
            let pos2 = self.vocab.entry(b).majority_pos();
            values[17] = if pos1.is_some() && pos1 == pos2 {
                1.0
            } else {
                0.0
            };
        }
        values[13] = apsyn[0];
        values[14] = apsyn[1];
        values[15] = measures::apant(apsyn[0]);
        values[16] = measures::apant(apsyn[1]);

        PairFeatures {
            values,
            oov1: id1.is_none(),
            oov2: id2.is_none(),
        }
    }

    pub fn extract_all_seq(&self, pairs: &[WordPair]) -> Vec<PairFeatures> {
        pairs.iter().map(|p| self.extract(p)).collect()
    }

    #[cfg(feature = "parallel")]
    pub fn extract_all_par(&self, pairs: &[WordPair]) -> Vec<PairFeatures> {
        use rayon::prelude::*;
        pairs.par_iter().map(|p| self.extract(p)).collect()
    }

    /// Features for every pair, in input order.
    pub fn extract_all(&self, pairs: &[WordPair]) -> Vec<PairFeatures> {
        #[cfg(feature = "parallel")]
        {
            self.extract_all_par(pairs)
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.extract_all_seq(pairs)
        }
    }
}

/// Features of one pair with the default top-N sizes and window-scoped
/// co-occurrence.
pub fn extract_features(
    pair: &WordPair,
    vocab: &Vocabulary,
    raw: &RawCounts,
    space: &WeightedSpace,
) -> PairFeatures {
    FeatureExtractor::new(vocab, raw, space).extract(pair)
}

fn header() -> String {
    let mut cols = vec!["w1", "w2", "label"];
    cols.extend(FEATURE_NAMES);
    cols.extend(["oov1", "oov2"]);
    cols.join("\t")
}

const N_COLUMNS: usize = 3 + N_FEATURES + 2;

/// Writes the feature TSV: a header row, then one row per pair with reals at
/// six decimals. Unlabeled pairs carry `?` in the label column.
pub fn write_features(rows: &[(WordPair, PairFeatures)], path: &Path) -> Result<()> {
    fsio::write_atomic(path, |w| write_features_to(rows, w))
}

pub fn write_features_to<W: Write>(
    rows: &[(WordPair, PairFeatures)],
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(w, "{}", header())?;
    for (pair, f) in rows {
        let label = pair.label.map_or("?", Label::as_str);
        write!(w, "{}\t{}\t{}", pair.w1, pair.w2, label)?;
        for v in &f.values {
            write!(w, "\t{v:.6}")?;
        }
        writeln!(w, "\t{}\t{}", u8::from(f.oov1), u8::from(f.oov2))?;
    }
    Ok(())
}

pub fn read_features(path: &Path) -> Result<Vec<(WordPair, PairFeatures)>> {
    let lines = fsio::read_lines(path)?;
    let mut lines = lines.into_iter();
    match lines.next() {
        Some((_, h)) if h == header() => {}
        Some((n, _)) => return Err(Error::format(path, n, "unknown feature header")),
        None => return Err(Error::format(path, 1, "missing feature header")),
    }
    let mut out = Vec::new();
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::format(path, lineno, msg);
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != N_COLUMNS {
            return Err(bad(format!(
                "expected {N_COLUMNS} columns, found {}",
                cols.len()
            )));
        }
        let label = match cols[2] {
            "?" => None,
            tag => Some(tag.parse::<Label>().map_err(bad)?),
        };
        let mut values = [0.0; N_FEATURES];
        for (i, v) in values.iter_mut().enumerate() {
            let raw = cols[3 + i];
            *v = raw
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("bad value `{raw}` for {}", FEATURE_NAMES[i])))?;
        }
        let flag = |s: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(bad(format!("bad oov flag `{other}`"))),
        };
        out.push((
            WordPair::new(cols[0], cols[1], label),
            PairFeatures {
                values,
                oov1: flag(cols[N_COLUMNS - 2])?,
                oov2: flag(cols[N_COLUMNS - 1])?,
            },
        ));
    }
    Ok(out)
}
