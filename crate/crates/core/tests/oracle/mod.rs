//! Independent reference implementations and the randomized checks built on
//! them. Shared by the integration tests and the acceptance runner.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use distrel::corpus::{
    build_vocabulary, count_cooccurrences_seq, parse_corpus_str, RawCounts, SENTENCE_WINDOW,
};
use distrel::forest::{
    best_split, to_json, train_forest_seq, Criterion, Forest, ForestParams, TrainingData, TreeNode,
};
use distrel::measures::{self, SparseVec};
use distrel::rng::SplitMix64;
use distrel::space::{ppmi_weight_seq, top_n_contexts, TopContexts};

pub type Check = Result<String, String>;

/// `a` and `b` agree to within `rel` of the larger magnitude.
pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

/// Dense copy of a sparse vector over `0..dim`.
pub fn dense(v: &[(u32, f64)], dim: usize) -> Vec<f64> {
    let mut d = vec![0.0; dim];
    for &(c, w) in v {
        d[c as usize] = w;
    }
    d
}

pub fn ref_cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        dot / (nu * nv)
    }
}

pub fn ref_lin(u: &[f64], v: &[f64]) -> f64 {
    let mut shared = 0.0;
    for (a, b) in u.iter().zip(v) {
        if *a > 0.0 && *b > 0.0 {
            shared += a + b;
        }
    }
    let total: f64 = u.iter().sum::<f64>() + v.iter().sum::<f64>();
    if total == 0.0 {
        0.0
    } else {
        shared / total
    }
}

pub fn ref_weeds_prec(u: &[f64], v: &[f64]) -> f64 {
    let mut shared = 0.0;
    for (a, b) in u.iter().zip(v) {
        if *a > 0.0 && *b > 0.0 {
            shared += a;
        }
    }
    let total: f64 = u.iter().sum();
    if total == 0.0 {
        0.0
    } else {
        shared / total
    }
}

pub fn ref_clarke_de(u: &[f64], v: &[f64]) -> f64 {
    let mut shared = 0.0;
    for (a, b) in u.iter().zip(v) {
        if *a > 0.0 && *b > 0.0 {
            shared += a.min(*b);
        }
    }
    let total: f64 = u.iter().sum();
    if total == 0.0 {
        0.0
    } else {
        shared / total
    }
}

pub fn ref_cos_weeds(u: &[f64], v: &[f64]) -> f64 {
    (ref_cosine(u, v) * ref_weeds_prec(u, v)).sqrt()
}

pub fn ref_inv_cl(u: &[f64], v: &[f64]) -> f64 {
    (ref_clarke_de(u, v) * (1.0 - ref_clarke_de(v, u))).sqrt()
}

/// Top `n` of a vector by weight, ties by id: the ranking used for APSyn.
pub fn ref_top(v: &[(u32, f64)], n: usize) -> Vec<(u32, f64)> {
    let mut r = v.to_vec();
    r.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    r.truncate(n);
    r
}

pub fn ref_apsyn(t1: &[(u32, f64)], t2: &[(u32, f64)]) -> f64 {
    let mut total = 0.0;
    for (i, (c1, _)) in t1.iter().enumerate() {
        for (j, (c2, _)) in t2.iter().enumerate() {
            if c1 == c2 {
                let r1 = (i + 1) as f64;
                let r2 = (j + 1) as f64;
                total += 1.0 / ((r1 + r2) / 2.0);
            }
        }
    }
    total
}

pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|r| 1.0 / r as f64).sum()
}

/// Random sparse vector with at most `max_nnz` entries over `0..dim`.
pub fn random_sparse(rng: &mut SplitMix64, max_nnz: usize, dim: usize) -> Vec<(u32, f64)> {
    let nnz = rng.below(max_nnz as u64 + 1) as usize;
    let ids = rng.sample_indices(dim, nnz.min(dim));
    ids.into_iter()
        .map(|c| {
            // A few repeated weights exercise the ranking tie rule.
            let w = if rng.below(4) == 0 {
                1.0 + rng.below(3) as f64
            } else {
                0.01 + 10.0 * rng.next_f64()
            };
            (c as u32, w)
        })
        .collect()
}

fn sv(v: &[(u32, f64)]) -> SparseVec {
    SparseVec::from_entries(v.to_vec()).expect("generated vectors are valid")
}

fn top(v: &[(u32, f64)], n: usize) -> TopContexts {
    TopContexts {
        word: 0,
        n,
        ranked: ref_top(v, n),
    }
}

/// Every measure against its dense reference on `pairs` random pairs,
/// plus the range, symmetry, scaling and inclusion invariants.
pub fn check_measures(seed: u64, pairs: usize) -> Check {
    const DIM: usize = 40;
    const TOL: f64 = 1e-12;
    let mut rng = SplitMix64::new(seed);
    let mut compared = 0usize;
    for k in 0..pairs {
        let a = random_sparse(&mut rng, 20, DIM);
        let b = random_sparse(&mut rng, 20, DIM);
        let (u, v) = (sv(&a), sv(&b));
        let (du, dv) = (dense(&a, DIM), dense(&b, DIM));

        let cases: [(&str, f64, f64); 12] = [
            ("cosine", measures::cosine(&u, &v), ref_cosine(&du, &dv)),
            ("lin", measures::lin(&u, &v), ref_lin(&du, &dv)),
            (
                "weeds_prec",
                measures::weeds_prec(&u, &v),
                ref_weeds_prec(&du, &dv),
            ),
            (
                "weeds_prec'",
                measures::weeds_prec(&v, &u),
                ref_weeds_prec(&dv, &du),
            ),
            (
                "clarke_de",
                measures::clarke_de(&u, &v),
                ref_clarke_de(&du, &dv),
            ),
            (
                "clarke_de'",
                measures::clarke_de(&v, &u),
                ref_clarke_de(&dv, &du),
            ),
            (
                "cos_weeds",
                measures::cos_weeds(&u, &v),
                ref_cos_weeds(&du, &dv),
            ),
            (
                "cos_weeds'",
                measures::cos_weeds(&v, &u),
                ref_cos_weeds(&dv, &du),
            ),
            ("inv_cl", measures::inv_cl(&u, &v), ref_inv_cl(&du, &dv)),
            ("inv_cl'", measures::inv_cl(&v, &u), ref_inv_cl(&dv, &du)),
            ("cosine sym", measures::cosine(&v, &u), ref_cosine(&du, &dv)),
            ("lin sym", measures::lin(&v, &u), ref_lin(&du, &dv)),
        ];
        for (name, got, want) in cases {
            ensure!(
                rel_close(got, want, TOL),
                "pair {k}: {name} = {got:e}, reference {want:e}"
            );
            ensure!(
                (0.0..=1.0).contains(&got),
                "pair {k}: {name} = {got} outside [0, 1]"
            );
            compared += 1;
        }

        for n in [1, 3, 5, 20] {
            let (t1, t2) = (top(&a, n), top(&b, n));
            let got = measures::apsyn(&t1, &t2).map_err(|e| e.to_string())?;
            let back = measures::apsyn(&t2, &t1).map_err(|e| e.to_string())?;
            let want = ref_apsyn(&t1.ranked, &t2.ranked);
            ensure!(
                rel_close(got, want, TOL),
                "pair {k}: apsyn@{n} = {got:e}, reference {want:e}"
            );
            ensure!(
                rel_close(got, back, TOL),
                "pair {k}: apsyn@{n} not symmetric"
            );
            ensure!(
                got >= 0.0 && got <= harmonic(n) * (1.0 + TOL),
                "pair {k}: apsyn@{n} = {got} outside [0, H_n]"
            );
            let ant = measures::apant(got);
            ensure!(
                rel_close(ant, 1.0 / (1.0 + want), TOL) && ant > 0.0 && ant <= 1.0,
                "pair {k}: apant@{n} = {ant}"
            );
            compared += 2;
        }

        // Scaling u leaves cosine and weeds_prec unchanged.
        let alpha = 0.1 + 5.0 * rng.next_f64();
        let scaled: Vec<(u32, f64)> = a.iter().map(|&(c, w)| (c, w * alpha)).collect();
        let us = sv(&scaled);
        ensure!(
            rel_close(measures::cosine(&us, &v), measures::cosine(&u, &v), 1e-12),
            "pair {k}: cosine changed under scaling"
        );
        ensure!(
            rel_close(
                measures::weeds_prec(&us, &v),
                measures::weeds_prec(&u, &v),
                1e-12
            ),
            "pair {k}: weeds_prec changed under scaling"
        );

        // Restricting u to v's support gives full inclusion.
        let inside: Vec<(u32, f64)> = a
            .iter()
            .copied()
            .filter(|&(c, _)| dv[c as usize] > 0.0)
            .collect();
        if !inside.is_empty() {
            let ui = sv(&inside);
            ensure!(
                measures::weeds_prec(&ui, &v) == 1.0,
                "pair {k}: included vector has weeds_prec < 1"
            );
            let dominated = inside.iter().all(|&(c, w)| w <= dv[c as usize]);
            ensure!(
                (measures::clarke_de(&ui, &v) == 1.0) == dominated,
                "pair {k}: clarke_de = 1 does not match domination"
            );
            let capped: Vec<(u32, f64)> = inside
                .iter()
                .map(|&(c, w)| (c, w.min(dv[c as usize])))
                .collect();
            ensure!(
                measures::clarke_de(&sv(&capped), &v) == 1.0,
                "pair {k}: capped vector has clarke_de < 1"
            );
        }
    }

    // Directionality witness and apant monotonicity.
    let u = sv(&[(0, 2.0), (1, 1.0)]);
    let v = sv(&[(1, 5.0)]);
    ensure!(
        measures::weeds_prec(&u, &v) != measures::weeds_prec(&v, &u),
        "weeds_prec is symmetric on the witness pair"
    );
    let mut prev = f64::INFINITY;
    for i in 0..200 {
        let a = measures::apant(i as f64 * 0.05);
        ensure!(
            a < prev,
            "apant is not strictly decreasing at {}",
            i as f64 * 0.05
        );
        prev = a;
    }
    Ok(format!(
        "{pairs} random pairs, {compared} values within {TOL:e}"
    ))
}

// ---------------------------------------------------------------------------
// Counting and weighting
// ---------------------------------------------------------------------------

/// Random corpus text over a small alphabet, with repeated lemmas, mixed
/// POS tags, blank lines and varying sentence lengths.
pub fn random_corpus(rng: &mut SplitMix64, max_sentences: usize) -> String {
    const LEMMAS: [&str; 9] = [
        "cat", "dog", "run", "the", "big", "eat", "fish", "a|b", "zz",
    ];
    const TAGS: [&str; 3] = ["NN", "VV", "JJ"];
    let n = rng.below(max_sentences as u64 + 1) as usize;
    let mut text = String::new();
    for _ in 0..n {
        let len = rng.below(13) as usize;
        let toks: Vec<String> = (0..len)
            .map(|_| {
                // Skewed lemma choice so some fall under min_count.
                let i = (rng.below(9) as usize).min(rng.below(9) as usize);
                format!("{}|{}", LEMMAS[i], TAGS[rng.below(3) as usize])
            })
            .collect();
        let _ = writeln!(text, "{}", toks.join(" "));
    }
    text
}

/// Vocabulary by first principles: counts, threshold, frequency-descending
/// ids with lexicographic ties.
pub fn ref_vocab(text: &str, min_count: u64) -> Vec<(String, u64)> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for line in text.lines() {
        for tok in line.split_whitespace() {
            let (lemma, _) = tok.rsplit_once('|').unwrap();
            *counts.entry(lemma.to_string()).or_default() += 1;
        }
    }
    let mut v: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

/// All ordered token pairs at distance `1..=window` within a sentence,
/// both in the vocabulary.
pub fn ref_counts(text: &str, vocab: &[(String, u64)], window: usize) -> BTreeMap<(u32, u32), u64> {
    let ids: HashMap<&str, u32> = vocab
        .iter()
        .enumerate()
        .map(|(i, (l, _))| (l.as_str(), i as u32))
        .collect();
    let mut cells = BTreeMap::new();
    for line in text.lines() {
        let toks: Vec<Option<u32>> = line
            .split_whitespace()
            .map(|t| ids.get(t.rsplit_once('|').unwrap().0).copied())
            .collect();
        for i in 0..toks.len() {
            for j in 0..toks.len() {
                if i == j || i.abs_diff(j) > window {
                    continue;
                }
                if let (Some(a), Some(b)) = (toks[i], toks[j]) {
                    *cells.entry((a, b)).or_insert(0) += 1;
                }
            }
        }
    }
    cells
}

pub fn ref_ppmi(cells: &BTreeMap<(u32, u32), u64>) -> BTreeMap<(u32, u32), f64> {
    let total: u64 = cells.values().sum();
    let mut row: HashMap<u32, u64> = HashMap::new();
    let mut col: HashMap<u32, u64> = HashMap::new();
    for (&(t, c), &n) in cells {
        *row.entry(t).or_default() += n;
        *col.entry(c).or_default() += n;
    }
    cells
        .iter()
        .filter_map(|(&(t, c), &n)| {
            let pmi = (n as f64 * total as f64 / (row[&t] as f64 * col[&c] as f64)).log2();
            (pmi > 0.0).then_some(((t, c), pmi))
        })
        .collect()
}

/// Vocabulary, counts, PPMI and top-N on random corpora of at most 50
/// sentences against the references above.
pub fn check_space(seed: u64, corpora: usize) -> Check {
    let mut rng = SplitMix64::new(seed);
    let mut cells_checked = 0usize;
    let mut weights_checked = 0usize;
    for k in 0..corpora {
        let text = random_corpus(&mut rng, 50);
        let min_count = 1 + rng.below(4);
        let window = match rng.below(5) {
            4 => SENTENCE_WINDOW,
            w => 1 + w as usize,
        };
        let vocab =
            build_vocabulary(parse_corpus_str(&text), min_count).map_err(|e| e.to_string())?;
        let want_vocab = ref_vocab(&text, min_count);
        let got_vocab: Vec<(String, u64)> = vocab
            .entries()
            .iter()
            .map(|e| (e.lemma.clone(), e.total_count))
            .collect();
        ensure!(
            got_vocab == want_vocab,
            "corpus {k}: vocabulary {got_vocab:?} != {want_vocab:?}"
        );

        let raw = count_cooccurrences_seq(parse_corpus_str(&text), &vocab, window)
            .map_err(|e| e.to_string())?;
        let want = ref_counts(&text, &want_vocab, window);
        let got: BTreeMap<(u32, u32), u64> = raw.triples().map(|(t, c, n)| ((t, c), n)).collect();
        ensure!(
            got == want,
            "corpus {k} (window {window}): counts differ from the reference"
        );
        cells_checked += want.len();

        #[cfg(feature = "parallel")]
        {
            let par =
                distrel::corpus::count_cooccurrences_par(parse_corpus_str(&text), &vocab, window)
                    .map_err(|e| e.to_string())?;
            ensure!(par == raw, "corpus {k}: parallel counts differ");
        }

        if raw.total() == 0 {
            ensure!(
                ppmi_weight_seq(&raw).is_err(),
                "corpus {k}: empty counts were weighted"
            );
            continue;
        }
        let space = ppmi_weight_seq(&raw).map_err(|e| e.to_string())?;
        let want_w = ref_ppmi(&want);
        let mut seen = 0;
        for (t, row) in space.rows().iter().enumerate() {
            for &(c, w) in row.entries() {
                ensure!(
                    w > 0.0,
                    "corpus {k}: weight {w} at ({t}, {c}) is not positive"
                );
                let r = want_w.get(&(t as u32, c)).copied();
                ensure!(
                    r.is_some_and(|r| rel_close(w, r, 1e-12)),
                    "corpus {k}: ppmi({t}, {c}) = {w}, reference {r:?}"
                );
                seen += 1;
            }
        }
        ensure!(
            seen == want_w.len(),
            "corpus {k}: {seen} weights, reference has {}",
            want_w.len()
        );
        weights_checked += seen;

        for t in 0..space.len() as u32 {
            for n in [1, 2, 5] {
                let got = top_n_contexts(&space, t, n).map_err(|e| e.to_string())?;
                ensure!(
                    got.ranked == ref_top(space.row(t).entries(), n),
                    "corpus {k}: top-{n} of {t} differs"
                );
            }
        }
    }

    let worked = RawCounts::from_triples(4, 2, [(0, 1, 10), (0, 2, 10), (3, 1, 15), (3, 3, 65)])
        .map_err(|e| e.to_string())?;
    let w = ppmi_weight_seq(&worked)
        .map_err(|e| e.to_string())?
        .row(0)
        .get(1);
    ensure!(
        w == Some(1.0),
        "worked example gives {w:?}, expected exactly 1.0"
    );
    Ok(format!(
        "{corpora} corpora, {cells_checked} count cells and {weights_checked} weights match; worked example = 1.0"
    ))
}

// ---------------------------------------------------------------------------
// Trees
// ---------------------------------------------------------------------------

fn ref_impurity(counts: &[f64], criterion: Criterion) -> f64 {
    let total: f64 = counts.iter().sum();
    match criterion {
        Criterion::Gini => {
            1.0 - counts
                .iter()
                .map(|c| (c / total) * (c / total))
                .sum::<f64>()
        }
        Criterion::Entropy => counts
            .iter()
            .filter(|&&c| c > 0.0)
            .map(|c| -(c / total) * (c / total).log2())
            .sum(),
    }
}

/// Exhaustive split search: every feature in the subset and every midpoint
/// between distinct values, scored from scratch.
pub fn ref_best_split(
    rows: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    indices: &[usize],
    subset: &[usize],
    criterion: Criterion,
) -> Option<(usize, f64, f64)> {
    let tally = |idx: &mut dyn Iterator<Item = usize>| {
        let mut c = vec![0.0; n_classes];
        for i in idx {
            c[labels[i]] += 1.0;
        }
        c
    };
    let parent = tally(&mut indices.iter().copied());
    let n = indices.len() as f64;
    let parent_imp = ref_impurity(&parent, criterion);
    let mut features: Vec<usize> = subset.to_vec();
    features.sort();
    features.dedup();
    let mut candidates = Vec::new();
    for &f in &features {
        let mut values: Vec<f64> = indices.iter().map(|&i| rows[i][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let left = tally(&mut indices.iter().copied().filter(|&i| rows[i][f] <= t));
            let right = tally(&mut indices.iter().copied().filter(|&i| rows[i][f] > t));
            let (nl, nr) = (left.iter().sum::<f64>(), right.iter().sum::<f64>());
            let gain = parent_imp
                - nl / n * ref_impurity(&left, criterion)
                - nr / n * ref_impurity(&right, criterion);
            candidates.push((f, t, gain));
        }
    }
    let best = candidates
        .iter()
        .map(|c| c.2)
        .fold(f64::NEG_INFINITY, f64::max);
    if best <= 1e-12 {
        return None;
    }
    candidates.into_iter().find(|c| c.2 >= best - 1e-12)
}

/// Random fixture: up to 8 samples, 3 features with small integer values
/// (plenty of ties), 2 or 3 classes.
pub fn random_fixture(rng: &mut SplitMix64) -> (Vec<Vec<f64>>, Vec<usize>, usize) {
    let n = 2 + rng.below(7) as usize;
    let k = 2 + rng.below(2) as usize;
    let rows = (0..n)
        .map(|_| (0..3).map(|_| rng.below(5) as f64 - 1.0).collect())
        .collect();
    let labels = (0..n).map(|_| rng.below(k as u64) as usize).collect();
    (rows, labels, k)
}

fn class_names(k: usize) -> Vec<String> {
    (0..k).map(|c| format!("c{c}")).collect()
}

pub fn check_best_split(seed: u64, fixtures: usize) -> Check {
    let mut rng = SplitMix64::new(seed);
    let mut found = 0;
    for k in 0..fixtures {
        let (rows, labels, n_classes) = random_fixture(&mut rng);
        let names = class_names(n_classes);
        let label_names: Vec<&str> = labels.iter().map(|&l| names[l].as_str()).collect();
        let data = TrainingData::new(&rows, &label_names).map_err(|e| e.to_string())?;
        // Absent classes shift indices; map through the sorted class list.
        let remap: Vec<usize> = labels
            .iter()
            .map(|&l| data.classes().iter().position(|c| *c == names[l]).unwrap())
            .collect();
        let n = rows.len();
        let indices: Vec<usize> = if rng.below(2) == 0 {
            (0..n).collect()
        } else {
            (0..n).map(|_| rng.below(n as u64) as usize).collect()
        };
        let mut subset: Vec<usize> = (0..3).filter(|_| rng.below(3) > 0).collect();
        if subset.is_empty() {
            subset.push(rng.below(3) as usize);
        }
        for criterion in [Criterion::Gini, Criterion::Entropy] {
            let got = best_split(&data, &indices, &subset, criterion)
                .map(|s| (s.feature, s.threshold, s.gain));
            let want = ref_best_split(
                &rows,
                &remap,
                data.classes().len(),
                &indices,
                &subset,
                criterion,
            );
            let same = match (got, want) {
                (None, None) => true,
                (Some(g), Some(w)) => g.0 == w.0 && g.1 == w.1 && (g.2 - w.2).abs() <= 1e-12,
                _ => false,
            };
            ensure!(
                same,
                "fixture {k} ({criterion}): best_split {got:?}, exhaustive {want:?}\nrows {rows:?}\nlabels {labels:?}\nindices {indices:?} subset {subset:?}"
            );
            found += usize::from(got.is_some());
        }
    }
    Ok(format!(
        "{fixtures} fixtures x 2 criteria agree ({found} with a split)"
    ))
}

/// Depth measured by walking the node structure.
pub fn structural_depth(node: &TreeNode) -> usize {
    match node {
        TreeNode::Leaf { .. } => 0,
        TreeNode::Split { left, right, .. } => {
            1 + structural_depth(left).max(structural_depth(right))
        }
    }
}

/// Every split routes its samples by `x <= t` and children hold fewer samples.
fn check_node(node: &TreeNode) -> Result<(), String> {
    if let TreeNode::Split {
        left,
        right,
        n_samples,
        threshold,
        ..
    } = node
    {
        ensure!(threshold.is_finite(), "non-finite threshold");
        ensure!(
            left.n_samples() + right.n_samples() == *n_samples
                && left.n_samples() > 0
                && right.n_samples() > 0,
            "split of {n_samples} samples into {} + {}",
            left.n_samples(),
            right.n_samples()
        );
        check_node(left)?;
        check_node(right)?;
    }
    Ok(())
}

/// Noisy data with many classes: deep trees unless capped.
pub fn noisy_data(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<String>) {
    let mut rng = SplitMix64::new(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.next_f64()).collect())
        .collect();
    let labels = rows
        .iter()
        .map(|r| {
            let signal = if r[0] + r[1] > 1.0 { 1 } else { 0 };
            let noisy = if rng.below(4) == 0 {
                rng.below(3)
            } else {
                signal
            };
            format!("k{noisy}")
        })
        .collect();
    (rows, labels)
}

pub fn names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("f{i}")).collect()
}

fn predictions(forest: &Forest, rows: &[Vec<f64>]) -> Result<Vec<String>, String> {
    rows.iter()
        .map(|r| {
            forest
                .predict(r)
                .map(|p| p.label)
                .map_err(|e| e.to_string())
        })
        .collect()
}

/// Depth bound, byte-identical retraining and invariance under a monotone
/// transform of one column.
pub fn check_forest_structure() -> Check {
    let (rows, labels) = noisy_data(3, 400, 6);
    let data = TrainingData::new(&rows, &labels).map_err(|e| e.to_string())?;
    let mut report = Vec::new();
    for max_depth in [1, 3, 10] {
        let params = ForestParams {
            n_estimators: 20,
            max_depth,
            max_features: 3,
            seed: 5,
            ..ForestParams::default()
        };
        let forest = train_forest_seq(&data, &params, &names(6)).map_err(|e| e.to_string())?;
        let deepest = forest.trees.iter().map(structural_depth).max().unwrap_or(0);
        ensure!(
            deepest <= max_depth,
            "max_depth {max_depth} but a tree reaches depth {deepest}"
        );
        ensure!(
            deepest == max_depth,
            "noisy data should reach depth {max_depth}, got {deepest}"
        );
        for tree in &forest.trees {
            check_node(tree)?;
        }
        report.push(format!("depth<={max_depth} ok"));
    }

    let params = ForestParams {
        n_estimators: 30,
        seed: 42,
        max_features: 3,
        ..ForestParams::default()
    };
    let a = to_json(&train_forest_seq(&data, &params, &names(6)).map_err(|e| e.to_string())?);
    let b = to_json(&train_forest_seq(&data, &params, &names(6)).map_err(|e| e.to_string())?);
    ensure!(a == b, "same-seed retraining changed the model JSON");
    #[cfg(feature = "parallel")]
    {
        let c = to_json(
            &distrel::forest::train_forest_par(&data, &params, &names(6))
                .map_err(|e| e.to_string())?,
        );
        ensure!(a == c, "parallel training differs from sequential training");
    }
    report.push(format!("retraining byte-identical ({} bytes)", a.len()));

    // 200-sample fixture; column 2 is cubed, with negative values included.
    let mut rng = SplitMix64::new(17);
    let fixture: Vec<Vec<f64>> = (0..200)
        .map(|_| (0..4).map(|_| 4.0 * rng.next_f64() - 2.0).collect())
        .collect();
    let fixture_labels: Vec<String> = fixture
        .iter()
        .map(|r| {
            let s = r[2] + 0.5 * r[0];
            (if s > 0.3 {
                "hi"
            } else if s < -0.6 {
                "lo"
            } else {
                "mid"
            })
            .to_string()
        })
        .collect();
    let cubed: Vec<Vec<f64>> = fixture
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r[2] = r[2].powi(3);
            r
        })
        .collect();
    let params = ForestParams {
        n_estimators: 50,
        max_features: 2,
        seed: 9,
        ..ForestParams::default()
    };
    let f1 = train_forest_seq(
        &TrainingData::new(&fixture, &fixture_labels).map_err(|e| e.to_string())?,
        &params,
        &names(4),
    )
    .map_err(|e| e.to_string())?;
    let f2 = train_forest_seq(
        &TrainingData::new(&cubed, &fixture_labels).map_err(|e| e.to_string())?,
        &params,
        &names(4),
    )
    .map_err(|e| e.to_string())?;
    let p1 = predictions(&f1, &fixture)?;
    let p2 = predictions(&f2, &cubed)?;
    let differing = p1.iter().zip(&p2).filter(|(a, b)| a != b).count();
    ensure!(
        differing == 0,
        "{differing} of 200 predictions changed after cubing a column"
    );
    report.push("cubing a column leaves all 200 predictions unchanged".into());
    Ok(report.join("; "))
}
