//! Deterministic synthetic corpora with planted relation pairs.
//!
//! Every pair gets two fresh target lemmas, so train and test vocabularies
//! never overlap. Targets are written into short sentences whose contexts
//! are drawn from per-word context profiles shaped by the pair's relation:
//!
//! * `SYN`: both words draw from the same profile over one topic.
//! * `ANT`: adjectives on one topic with different dominant contexts,
//!   frequently adjacent (`x or y`).
//! * `HYPER`: the hyponym uses a narrow slice of a topic; the hypernym is
//!   three times as frequent and spreads over that topic and two others.
//! * `PART_OF`: the part and the whole live on different topics, share a
//!   few contexts, and co-occur as `x of y`.
//! * `RANDOM`: unrelated topics, independently chosen parts of speech.

use std::fmt::Write as _;

use crate::features::WordPair;
use crate::relation::Label;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub train_pairs: usize,
    pub test_pairs: usize,
    pub topics: usize,
    pub contexts_per_topic: usize,
    /// Sentences per ordinary target word (drawn uniformly from this range).
    pub sentences_per_word: (usize, usize),
    /// Relative share of SYN, ANT, HYPER, PART_OF and RANDOM pairs.
    pub mix: [f64; 5],
    /// Probability that any context slot is filled from the shared
    /// background pool instead of the word's profile.
    pub background: f64,
    /// Share of the second word's context mass moved to an unrelated topic
    /// in related pairs.
    pub noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            train_pairs: 600,
            test_pairs: 250,
            topics: 48,
            contexts_per_topic: 24,
            sentences_per_word: (24, 40),
            mix: [0.15, 0.15, 0.15, 0.15, 0.40],
            background: 0.15,
            noise: 0.15,
        }
    }
}

/// Generated corpus text (`lemma|POS` lines) and the two pair lists.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub corpus: String,
    pub train: Vec<WordPair>,
    pub test: Vec<WordPair>,
}

impl SynthData {
    /// Pair TSV text (`w1<TAB>w2<TAB>label`) with task-2 tags.
    pub fn pairs_tsv(pairs: &[WordPair]) -> String {
        let mut out = String::new();
        for p in pairs {
            let tag = p.label.map_or("?", Label::as_str);
            let _ = writeln!(out, "{}\t{}\t{}", p.w1, p.w2, tag);
        }
        out
    }

    /// The same pairs collapsed to TRUE/FALSE.
    pub fn to_task1(pairs: &[WordPair]) -> Vec<WordPair> {
        pairs
            .iter()
            .map(|p| WordPair {
                label: p.label.map(Label::relatedness),
                ..p.clone()
            })
            .collect()
    }
}

const RELATIONS: [Label; 5] = [
    Label::Syn,
    Label::Ant,
    Label::Hyper,
    Label::PartOf,
    Label::Random,
];

const BACKGROUND: [&str; 12] = [
    "the|DT", "a|DT", "be|VB", "have|VH", "in|IN", "of|IN", "to|TO", "and|CC", "that|IN",
    "with|IN", "for|IN", "on|IN",
];

/// Weighted draw list over context tokens.
#[derive(Debug, Clone, Default)]
struct Profile {
    items: Vec<(String, f64)>,
}

impl Profile {
    fn add(&mut self, token: &str, weight: f64) {
        self.items.push((token.to_string(), weight));
    }

    fn draw<'a>(&'a self, rng: &mut SplitMix64) -> &'a str {
        let total: f64 = self.items.iter().map(|(_, w)| w).sum();
        let mut x = rng.next_f64() * total;
        for (token, w) in &self.items {
            if x < *w {
                return token;
            }
            x -= w;
        }
        &self.items.last().expect("profiles are never empty").0
    }
}

struct Generator<'c> {
    cfg: &'c SynthConfig,
    rng: SplitMix64,
    lines: Vec<String>,
}

impl Generator<'_> {
    fn context(&self, topic: usize, j: usize) -> String {
        let pos = match j % 3 {
            0 | 1 => "NN",
            _ => "VV",
        };
        format!("t{topic}c{j}|{pos}")
    }

    /// Contexts `range` of `topic`, with Zipf-like weights by position.
    fn topic_slice(
        &self,
        profile: &mut Profile,
        topic: usize,
        range: std::ops::Range<usize>,
        scale: f64,
    ) {
        for (rank, j) in range.enumerate() {
            profile.add(&self.context(topic, j), scale / (1.0 + rank as f64).sqrt());
        }
    }

    fn topic_profile(&self, topic: usize, scale: f64) -> Profile {
        let mut p = Profile::default();
        self.topic_slice(&mut p, topic, 0..self.cfg.contexts_per_topic, scale);
        p
    }

    fn other_topic(&mut self, not: &[usize]) -> usize {
        loop {
            let t = self.rng.below(self.cfg.topics as u64) as usize;
            if !not.contains(&t) {
                return t;
            }
        }
    }

    fn n_sentences(&mut self, factor: f64) -> usize {
        let (lo, hi) = self.cfg.sentences_per_word;
        let base = lo + self.rng.below((hi - lo + 1) as u64) as usize;
        ((base as f64) * factor).round().max(1.0) as usize
    }

    fn slot(&mut self, profile: &Profile) -> String {
        if self.rng.next_f64() < self.cfg.background {
            BACKGROUND[self.rng.below(BACKGROUND.len() as u64) as usize].to_string()
        } else {
            profile.draw(&mut self.rng).to_string()
        }
    }

    /// Writes `count` sentences `c c w c c` for `word`.
    fn emit(&mut self, word: &str, profile: &Profile, count: usize) {
        for _ in 0..count {
            let toks = [
                self.slot(profile),
                self.slot(profile),
                word.to_string(),
                self.slot(profile),
                self.slot(profile),
            ];
            self.lines.push(toks.join(" "));
        }
    }

    /// Writes `count` sentences `c w1 link w2 c`.
    fn emit_joined(&mut self, w1: &str, link: &str, w2: &str, profile: &Profile, count: usize) {
        for _ in 0..count {
            let a = self.slot(profile);
            let b = self.slot(profile);
            self.lines.push(format!("{a} {w1} {link} {w2} {b}"));
        }
    }

    fn with_noise(&mut self, profile: Profile, topic_avoid: &[usize]) -> Profile {
        if self.cfg.noise <= 0.0 {
            return profile;
        }
        let t = self.other_topic(topic_avoid);
        let own: f64 = profile.items.iter().map(|(_, w)| w).sum();
        let noise = self.topic_profile(t, 1.0);
        let noise_total: f64 = noise.items.iter().map(|(_, w)| w).sum();
        let scale = own * self.cfg.noise / ((1.0 - self.cfg.noise) * noise_total);
        let mut p = profile;
        for (tok, w) in noise.items {
            p.items.push((tok, w * scale));
        }
        p
    }

    fn pair(&mut self, relation: Label, w1_name: &str, w2_name: &str) {
        let k = self.cfg.contexts_per_topic;
        let topic = self.rng.below(self.cfg.topics as u64) as usize;
        match relation {
            Label::Syn => {
                let pos = if self.rng.below(2) == 0 { "NN" } else { "VV" };
                let (w1, w2) = (format!("{w1_name}|{pos}"), format!("{w2_name}|{pos}"));
                let base = self.topic_profile(topic, 1.0);
                let p2 = self.with_noise(base.clone(), &[topic]);
                let n = self.n_sentences(1.0);
                self.emit(&w1, &base, n);
                let n = self.n_sentences(1.0);
                self.emit(&w2, &p2, n);
            }
            Label::Ant => {
                let (w1, w2) = (format!("{w1_name}|JJ"), format!("{w2_name}|JJ"));
                let half = k / 2;
                let mut p1 = Profile::default();
                self.topic_slice(&mut p1, topic, 0..half, 3.0);
                self.topic_slice(&mut p1, topic, half..k, 0.5);
                let mut p2 = Profile::default();
                self.topic_slice(&mut p2, topic, half..k, 3.0);
                self.topic_slice(&mut p2, topic, 0..half, 0.5);
                let p2 = self.with_noise(p2, &[topic]);
                let n = self.n_sentences(1.0);
                self.emit(&w1, &p1, n);
                let n = self.n_sentences(1.0);
                self.emit(&w2, &p2, n);
                let shared = self.topic_profile(topic, 1.0);
                let n = self.n_sentences(0.3);
                self.emit_joined(&w1, "or|CC", &w2, &shared, n);
            }
            Label::Hyper => {
                let (w1, w2) = (format!("{w1_name}|NN"), format!("{w2_name}|NN"));
                let start = self.rng.below((k - k / 3 + 1) as u64) as usize;
                let mut narrow = Profile::default();
                self.topic_slice(&mut narrow, topic, start..start + k / 3, 1.0);
                let t2 = self.other_topic(&[topic]);
                let t3 = self.other_topic(&[topic, t2]);
                let mut broad = self.topic_profile(topic, 1.0);
                self.topic_slice(&mut broad, t2, 0..k, 0.6);
                self.topic_slice(&mut broad, t3, 0..k, 0.6);
                let broad = self.with_noise(broad, &[topic, t2, t3]);
                let n = self.n_sentences(0.8);
                self.emit(&w1, &narrow, n);
                let n = self.n_sentences(3.0);
                self.emit(&w2, &broad, n);
            }
            Label::PartOf => {
                let (w1, w2) = (format!("{w1_name}|NN"), format!("{w2_name}|NN"));
                let t2 = self.other_topic(&[topic]);
                let mut part = self.topic_profile(topic, 1.0);
                self.topic_slice(&mut part, t2, k - k / 4..k, 1.0);
                let mut whole = self.topic_profile(t2, 1.0);
                self.topic_slice(&mut whole, topic, k - k / 4..k, 1.0);
                let whole = self.with_noise(whole, &[topic, t2]);
                let n = self.n_sentences(0.7);
                self.emit(&w1, &part, n);
                let n = self.n_sentences(1.5);
                self.emit(&w2, &whole, n);
                let n = self.n_sentences(0.15);
                self.emit_joined(&w1, "of|IN", &w2, &part, n);
            }
            _ => {
                const TAGS: [&str; 3] = ["NN", "VV", "JJ"];
                let p1 = TAGS[self.rng.below(3) as usize];
                let p2 = TAGS[self.rng.below(3) as usize];
                let (w1, w2) = (format!("{w1_name}|{p1}"), format!("{w2_name}|{p2}"));
                let t2 = self.other_topic(&[topic]);
                let prof1 = self.topic_profile(topic, 1.0);
                let prof2 = self.topic_profile(t2, 1.0);
                let f1 = self.rng.next_f64() * 2.0 + 0.5;
                let n = self.n_sentences(f1);
                self.emit(&w1, &prof1, n);
                let f2 = self.rng.next_f64() * 2.0 + 0.5;
                let n = self.n_sentences(f2);
                self.emit(&w2, &prof2, n);
            }
        }
    }

    fn relation(&mut self) -> Label {
        let total: f64 = self.cfg.mix.iter().sum();
        let mut x = self.rng.next_f64() * total;
        for (i, &w) in self.cfg.mix.iter().enumerate() {
            if x < w {
                return RELATIONS[i];
            }
            x -= w;
        }
        Label::Random
    }

    fn pairs(&mut self, prefix: &str, n: usize) -> Vec<WordPair> {
        (0..n)
            .map(|i| {
                let relation = self.relation();
                let w1 = format!("{prefix}{i}a");
                let w2 = format!("{prefix}{i}b");
                self.pair(relation, &w1, &w2);
                WordPair::new(w1, w2, Some(relation))
            })
            .collect()
    }
}

/// Generates a corpus and lexically disjoint train/test pair lists.
pub fn generate(cfg: &SynthConfig) -> SynthData {
    assert!(cfg.topics >= 3, "need at least three topics");
    assert!(
        cfg.contexts_per_topic >= 4,
        "need at least four contexts per topic"
    );
    assert!(cfg.sentences_per_word.0 >= 1 && cfg.sentences_per_word.0 <= cfg.sentences_per_word.1);
    let mut g = Generator {
        cfg,
        rng: SplitMix64::new(cfg.seed),
        lines: Vec::new(),
    };
    let train = g.pairs("tr", cfg.train_pairs);
    let test = g.pairs("te", cfg.test_pairs);
    g.finish(train, test)
}

impl Generator<'_> {
    fn finish(mut self, train: Vec<WordPair>, test: Vec<WordPair>) -> SynthData {
        let g = &mut self;
        // Interleave sentences so no word's occurrences form one block.
        let mut lines = std::mem::take(&mut g.lines);
        for i in (1..lines.len()).rev() {
            let j = g.rng.below(i as u64 + 1) as usize;
            lines.swap(i, j);
        }
        let mut corpus = lines.join("\n");
        corpus.push('\n');
        SynthData {
            corpus,
            train,
            test,
        }
    }
}

/// Settings for [`generate_shared_top`].
#[derive(Debug, Clone, PartialEq)]
pub struct SharedTopConfig {
    pub seed: u64,
    pub train_pairs: usize,
    pub test_pairs: usize,
    pub topics: usize,
    pub contexts_per_topic: usize,
    /// Size of the pool that signature contexts are drawn from.
    pub signature_pool: usize,
    /// Signature contexts per word.
    pub signature_size: usize,
    /// Weight of each signature context relative to a word's strongest
    /// topic context.
    pub signature_weight: f64,
    /// Share of related pairs whose words have the same signature.
    pub via_signature: f64,
    /// Upper bound on the share of the second word's mass taken from the
    /// weaker contexts of another topic: the first word's topic in
    /// unrelated pairs, a third topic in related ones.
    pub unrelated_overlap: f64,
    pub sentences_per_word: (usize, usize),
    pub background: f64,
}

impl Default for SharedTopConfig {
    fn default() -> Self {
        SharedTopConfig {
            seed: 1,
            train_pairs: 600,
            test_pairs: 200,
            topics: 48,
            contexts_per_topic: 24,
            signature_pool: 2000,
            signature_size: 6,
            signature_weight: 2.5,
            via_signature: 0.6,
            unrelated_overlap: 0.2,
            sentences_per_word: (24, 40),
            background: 0.15,
        }
    }
}

/// A TRUE/FALSE dataset in which relatedness shows up in the words'
/// strongest contexts.
///
/// Every word mixes a topic profile with a small signature set drawn from a
/// shared pool. Most related pairs share their signature set while their
/// topics differ; the rest share a topic and keep separate signatures.
/// Unrelated pairs share neither, but their second word borrows a random
/// amount of the first topic's weaker contexts, which raises the
/// similarity of whole vectors without touching the strongest contexts.
/// Second words of related pairs borrow as much from a third topic.
pub fn generate_shared_top(cfg: &SharedTopConfig) -> SynthData {
    assert!(cfg.topics >= 2 && cfg.signature_pool >= cfg.signature_size && cfg.signature_size >= 1);
    let base = SynthConfig {
        seed: cfg.seed,
        topics: cfg.topics,
        contexts_per_topic: cfg.contexts_per_topic,
        sentences_per_word: cfg.sentences_per_word,
        background: cfg.background,
        noise: 0.0,
        ..SynthConfig::default()
    };
    let mut g = Generator {
        cfg: &base,
        rng: SplitMix64::new(cfg.seed),
        lines: Vec::new(),
    };
    let make = |g: &mut Generator<'_>, prefix: &str, n: usize| -> Vec<WordPair> {
        (0..n)
            .map(|i| {
                let related = g.rng.below(2) == 0;
                let t1 = g.rng.below(cfg.topics as u64) as usize;
                let (same_topic, same_signature) = if related {
                    let sig = g.rng.next_f64() < cfg.via_signature;
                    (!sig, sig)
                } else {
                    (false, false)
                };
                let t2 = if same_topic { t1 } else { g.other_topic(&[t1]) };
                let (lend1, lend2) = if related {
                    let a = g.other_topic(&[t1, t2]);
                    (a, g.other_topic(&[t1, t2, a]))
                } else {
                    (t2, t1)
                };
                let b1 = g.rng.next_f64() * cfg.unrelated_overlap;
                let b2 = g.rng.next_f64() * cfg.unrelated_overlap;
                let sig1 = g.rng.sample_indices(cfg.signature_pool, cfg.signature_size);
                let sig2 = if same_signature {
                    sig1.clone()
                } else {
                    g.rng.sample_indices(cfg.signature_pool, cfg.signature_size)
                };
                let w1 = format!("{prefix}{i}a");
                let w2 = format!("{prefix}{i}b");
                for (word, topic, sig, lender, borrow) in
                    [(&w1, t1, &sig1, lend1, b1), (&w2, t2, &sig2, lend2, b2)]
                {
                    let mut profile = g.topic_profile(topic, 1.0);
                    let own: f64 = profile.items.iter().map(|(_, w)| w).sum();
                    let lent = g.topic_profile(lender, own * borrow / (1.0 - borrow) / own);
                    profile.items.extend(lent.items);
                    for &s in sig {
                        profile.add(&format!("s{s}|NN"), cfg.signature_weight);
                    }
                    let n = g.n_sentences(1.0);
                    g.emit(&format!("{word}|NN"), &profile, n);
                }
                let label = if related { Label::True } else { Label::False };
                WordPair::new(w1, w2, Some(label))
            })
            .collect()
    };
    let train = make(&mut g, "tr", cfg.train_pairs);
    let test = make(&mut g, "te", cfg.test_pairs);
    g.finish(train, test)
}
