//! Corpus ingestion: `lemma|POS` sentences, the vocabulary, and windowed
//! co-occurrence counting.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{self as fsio, Metadata};

/// A window wide enough to pair every two tokens of a sentence.
pub const SENTENCE_WINDOW: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub lemma: String,
    pub pos: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Parses one corpus line. Blank lines yield `None`.
///
/// Each whitespace-separated token is split on its last `|`, so lemmas may
/// themselves contain pipes.
pub fn parse_line(line: &str) -> std::result::Result<Option<Sentence>, String> {
    let mut tokens = Vec::new();
    for raw in line.split_whitespace() {
        let (lemma, pos) = raw
            .rsplit_once('|')
            .ok_or_else(|| format!("token `{raw}` has no `|` separator"))?;
        if lemma.is_empty() || pos.is_empty() {
            return Err(format!("token `{raw}` has an empty lemma or POS"));
        }
        tokens.push(Token {
            lemma: lemma.to_string(),
            pos: pos.to_string(),
        });
    }
    Ok((!tokens.is_empty()).then_some(Sentence { tokens }))
}

/// Streams sentences from a line-oriented reader in file order.
pub struct SentenceReader<R> {
    lines: std::io::Lines<R>,
    path: PathBuf,
    lineno: usize,
}

impl<R: BufRead> SentenceReader<R> {
    /// `path` is only used to label errors.
    pub fn new(reader: R, path: impl Into<PathBuf>) -> Self {
        SentenceReader {
            lines: reader.lines(),
            path: path.into(),
            lineno: 0,
        }
    }
}

impl<R: BufRead> Iterator for SentenceReader<R> {
    type Item = Result<Sentence>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => return Some(Err(Error::io(&self.path, e))),
            };
            self.lineno += 1;
            match parse_line(&line) {
                Ok(Some(sentence)) => return Some(Ok(sentence)),
                Ok(None) => continue,
                Err(msg) => return Some(Err(Error::format(&self.path, self.lineno, msg))),
            }
        }
    }
}

/// Opens a corpus file for streaming.
pub fn parse_corpus(path: &Path) -> Result<SentenceReader<BufReader<File>>> {
    Ok(SentenceReader::new(fsio::open(path)?, path))
}

/// Streams sentences from in-memory text.
pub fn parse_corpus_str(text: &str) -> SentenceReader<&[u8]> {
    SentenceReader::new(text.as_bytes(), "<memory>")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabEntry {
    pub lemma: String,
    pub id: u32,
    pub total_count: u64,
    pub pos_counts: BTreeMap<String, u64>,
}

impl VocabEntry {
    /// Most frequent POS tag; ties go to the lexicographically smallest tag.
    pub fn majority_pos(&self) -> Option<&str> {
        let mut best: Option<(&str, u64)> = None;
        for (tag, &count) in &self.pos_counts {
            // BTreeMap iterates tags in ascending order, so strict `>` keeps
            // the smallest tag on ties.
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((tag, count));
            }
        }
        best.map(|(tag, _)| tag)
    }
}

/// Lemma inventory with dense ids, ordered by descending frequency and then
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    index: HashMap<String, u32>,
    min_count: u64,
}

impl Vocabulary {
    fn from_entries(mut entries: Vec<VocabEntry>, min_count: u64) -> Self {
        entries.sort_by(|a, b| {
            b.total_count
                .cmp(&a.total_count)
                .then_with(|| a.lemma.cmp(&b.lemma))
        });
        for (i, e) in entries.iter_mut().enumerate() {
            e.id = i as u32;
        }
        let index = entries.iter().map(|e| (e.lemma.clone(), e.id)).collect();
        Vocabulary {
            entries,
            index,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn id(&self, lemma: &str) -> Option<u32> {
        self.index.get(lemma).copied()
    }

    pub fn entry(&self, id: u32) -> &VocabEntry {
        &self.entries[id as usize]
    }

    pub fn get(&self, lemma: &str) -> Option<&VocabEntry> {
        self.id(lemma).map(|id| self.entry(id))
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    /// `lemma<TAB>id<TAB>total_count<TAB>pos:count,...`, one row per id.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        fsio::write_atomic(path, |w| {
            for e in &self.entries {
                let pos: Vec<String> = e
                    .pos_counts
                    .iter()
                    .map(|(tag, n)| format!("{tag}:{n}"))
                    .collect();
                writeln!(
                    w,
                    "{}\t{}\t{}\t{}",
                    e.lemma,
                    e.id,
                    e.total_count,
                    pos.join(",")
                )?;
            }
            Ok(())
        })
    }

    pub fn read_tsv(path: &Path, min_count: u64) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in fsio::read_lines(path)? {
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::format(path, lineno, msg);
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(bad("expected 4 tab-separated columns"));
            }
            let id: u32 = cols[1].parse().map_err(|_| bad("bad id"))?;
            if id as usize != entries.len() {
                return Err(bad("ids must be consecutive from 0"));
            }
            let total_count: u64 = cols[2].parse().map_err(|_| bad("bad count"))?;
            let mut pos_counts = BTreeMap::new();
            for item in cols[3].split(',').filter(|s| !s.is_empty()) {
                let (tag, n) = item.rsplit_once(':').ok_or_else(|| bad("bad pos:count"))?;
                let n: u64 = n.parse().map_err(|_| bad("bad pos count"))?;
                pos_counts.insert(tag.to_string(), n);
            }
            if pos_counts.values().sum::<u64>() != total_count {
                return Err(bad("POS counts do not sum to the total"));
            }
            entries.push(VocabEntry {
                lemma: cols[0].to_string(),
                id,
                total_count,
                pos_counts,
            });
        }
        let vocab = Vocabulary::from_entries(entries.clone(), min_count);
        if vocab.entries != entries {
            return Err(Error::format(path, 0, "rows are not in frequency order"));
        }
        Ok(vocab)
    }
}

/// Counts lemma and POS occurrences, keeping lemmas seen at least
/// `min_count` times.
pub fn build_vocabulary<I>(sentences: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = Result<Sentence>>,
{
    if min_count == 0 {
        return Err(Error::contract("min_count must be at least 1"));
    }
    let mut counts: HashMap<String, BTreeMap<String, u64>> = HashMap::new();
    for sentence in sentences {
        for token in sentence?.tokens {
            *counts
                .entry(token.lemma)
                .or_default()
                .entry(token.pos)
                .or_insert(0) += 1;
        }
    }
    let entries = counts
        .into_iter()
        .filter_map(|(lemma, pos_counts)| {
            let total_count: u64 = pos_counts.values().sum();
            (total_count >= min_count).then_some(VocabEntry {
                lemma,
                id: 0,
                total_count,
                pos_counts,
            })
        })
        .collect();
    Ok(Vocabulary::from_entries(entries, min_count))
}

/// Sparse target x context counts with marginals.
///
/// Rows are indexed by target id and hold `(context id, count)` pairs sorted
/// by context id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCounts {
    rows: Vec<Vec<(u32, u64)>>,
    row_marginals: Vec<u64>,
    col_marginals: Vec<u64>,
    total: u64,
    window: usize,
}

impl RawCounts {
    /// Assembles counts from unordered triples. Duplicate cells are summed.
    pub fn from_triples<I>(vocab_size: usize, window: usize, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, u64)>,
    {
        let mut rows: Vec<Vec<(u32, u64)>> = vec![Vec::new(); vocab_size];
        for (t, c, n) in triples {
            if t as usize >= vocab_size || c as usize >= vocab_size {
                return Err(Error::contract(format!(
                    "cell ({t}, {c}) outside a vocabulary of {vocab_size}"
                )));
            }
            if n > 0 {
                rows[t as usize].push((c, n));
            }
        }
        for row in &mut rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            row.dedup_by(|later, kept| {
                if later.0 == kept.0 {
                    kept.1 += later.1;
                    true
                } else {
                    false
                }
            });
        }
        Ok(Self::from_rows(rows, window))
    }

    fn from_rows(rows: Vec<Vec<(u32, u64)>>, window: usize) -> Self {
        let mut row_marginals = vec![0u64; rows.len()];
        let mut col_marginals = vec![0u64; rows.len()];
        for (t, row) in rows.iter().enumerate() {
            for &(c, n) in row {
                row_marginals[t] += n;
                col_marginals[c as usize] += n;
            }
        }
        let total = row_marginals.iter().sum();
        RawCounts {
            rows,
            row_marginals,
            col_marginals,
            total,
            window,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.rows.len()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn row(&self, target: u32) -> &[(u32, u64)] {
        self.rows.get(target as usize).map_or(&[], |r| r.as_slice())
    }

    pub fn rows(&self) -> &[Vec<(u32, u64)>] {
        &self.rows
    }

    pub fn row_marginal(&self, target: u32) -> u64 {
        self.row_marginals
            .get(target as usize)
            .copied()
            .unwrap_or(0)
    }

    pub fn col_marginal(&self, context: u32) -> u64 {
        self.col_marginals
            .get(context as usize)
            .copied()
            .unwrap_or(0)
    }

    /// Count of `(target, context)`; zero for absent cells.
    pub fn get(&self, target: u32, context: u32) -> u64 {
        let row = self.row(target);
        row.binary_search_by_key(&context, |&(c, _)| c)
            .map_or(0, |i| row[i].1)
    }

    /// Number of stored non-zero cells.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn triples(&self) -> impl Iterator<Item = (u32, u32, u64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(t, row)| row.iter().map(move |&(c, n)| (t as u32, c, n)))
    }

    /// Sidecar keys shared by every artifact derived from these counts.
    pub fn metadata(&self, vocab: &Vocabulary) -> Metadata {
        let mut meta = Metadata::new();
        if self.window == SENTENCE_WINDOW {
            meta.set("window", "sentence");
        } else {
            meta.set("window", self.window);
        }
        meta.set("total", self.total);
        meta.set("vocab_size", self.rows.len());
        meta.set("min_count", vocab.min_count());
        meta.set("targets", "lemma");
        meta.set("contexts", "lemma");
        meta
    }

    /// `target_id<TAB>context_id<TAB>count` rows plus a `.meta` sidecar.
    pub fn write_tsv(&self, path: &Path, meta: &Metadata) -> Result<()> {
        fsio::write_atomic(path, |w| {
            for (t, c, n) in self.triples() {
                writeln!(w, "{t}\t{c}\t{n}")?;
            }
            Ok(())
        })?;
        meta.write(&fsio::sidecar_path(path))
    }

    pub fn read_tsv(path: &Path) -> Result<(Self, Metadata)> {
        let meta_path = fsio::sidecar_path(path);
        let meta = Metadata::read(&meta_path)?;
        let vocab_size: usize = meta.parse("vocab_size", &meta_path)?;
        let window = match meta.get("window") {
            Some("sentence") => SENTENCE_WINDOW,
            _ => meta.parse("window", &meta_path)?,
        };
        let mut triples = Vec::new();
        for (lineno, line) in fsio::read_lines(path)? {
            if line.is_empty() {
                continue;
            }
            let bad = || Error::format(path, lineno, "expected target<TAB>context<TAB>count");
            let mut cols = line.split('\t');
            let mut next = || cols.next().ok_or_else(bad);
            let t: u32 = next()?.parse().map_err(|_| bad())?;
            let c: u32 = next()?.parse().map_err(|_| bad())?;
            let n: u64 = next()?.parse().map_err(|_| bad())?;
            if cols.next().is_some() {
                return Err(bad());
            }
            triples.push((t, c, n));
        }
        let counts = RawCounts::from_triples(vocab_size, window, triples)
            .map_err(|e| Error::format(path, 0, e.to_string()))?;
        let total: u64 = meta.parse("total", &meta_path)?;
        if counts.total != total {
            return Err(Error::format(
                &meta_path,
                0,
                format!(
                    "total {total} does not match the {} counted cells",
                    counts.total
                ),
            ));
        }
        Ok((counts, meta))
    }
}

/// Sentences mapped to vocabulary ids; out-of-vocabulary tokens keep their
/// position as `None`.
fn encode(sentence: &Sentence, vocab: &Vocabulary) -> Vec<Option<u32>> {
    sentence.tokens.iter().map(|t| vocab.id(&t.lemma)).collect()
}

type CellMap = HashMap<u64, u64>;

#[inline]
fn cell_key(target: u32, context: u32) -> u64 {
    (u64::from(target) << 32) | u64::from(context)
}

fn count_sentence(ids: &[Option<u32>], window: usize, cells: &mut CellMap) {
    for (i, target) in ids.iter().enumerate() {
        let Some(target) = *target else { continue };
        let lo = i.saturating_sub(window);
        let hi = i.saturating_add(window).min(ids.len() - 1);
        for (j, context) in ids.iter().enumerate().take(hi + 1).skip(lo) {
            if j == i {
                continue;
            }
            if let Some(context) = *context {
                *cells.entry(cell_key(target, context)).or_insert(0) += 1;
            }
        }
    }
}

#[cfg(feature = "parallel")]
fn merge_cells(mut into: CellMap, from: CellMap) -> CellMap {
    let (mut big, small) = if into.len() >= from.len() {
        (std::mem::take(&mut into), from)
    } else {
        (from, into)
    };
    for (k, n) in small {
        *big.entry(k).or_insert(0) += n;
    }
    big
}

fn finish(cells: CellMap, vocab: &Vocabulary, window: usize) -> RawCounts {
    let triples = cells
        .into_iter()
        .map(|(k, n)| ((k >> 32) as u32, k as u32, n));
    RawCounts::from_triples(vocab.len(), window, triples)
        .expect("encoded ids always lie inside the vocabulary")
}

fn check_window(window: usize) -> Result<()> {
    if window == 0 {
        return Err(Error::contract("window must be at least 1"));
    }
    Ok(())
}

/// Single-threaded reference path for [`count_cooccurrences`].
pub fn count_cooccurrences_seq<I>(
    sentences: I,
    vocab: &Vocabulary,
    window: usize,
) -> Result<RawCounts>
where
    I: IntoIterator<Item = Result<Sentence>>,
{
    check_window(window)?;
    let mut cells = CellMap::new();
    for sentence in sentences {
        count_sentence(&encode(&sentence?, vocab), window, &mut cells);
    }
    Ok(finish(cells, vocab, window))
}

/// Sentences per parallel shard.
#[cfg(feature = "parallel")]
const SHARD_SENTENCES: usize = 4096;

/// Sharded counting: batches of sentences are counted on the rayon pool and
/// merged by addition, so the result does not depend on scheduling.
#[cfg(feature = "parallel")]
pub fn count_cooccurrences_par<I>(
    sentences: I,
    vocab: &Vocabulary,
    window: usize,
) -> Result<RawCounts>
where
    I: IntoIterator<Item = Result<Sentence>>,
{
    use rayon::prelude::*;

    check_window(window)?;
    let mut cells = CellMap::new();
    let mut batch: Vec<Sentence> = Vec::with_capacity(SHARD_SENTENCES * 8);
    let flush = |batch: &mut Vec<Sentence>, cells: &mut CellMap| {
        let shard = batch
            .par_chunks(SHARD_SENTENCES)
            .map(|chunk| {
                let mut local = CellMap::new();
                for s in chunk {
                    count_sentence(&encode(s, vocab), window, &mut local);
                }
                local
            })
            .reduce(CellMap::new, merge_cells);
        *cells = merge_cells(std::mem::take(cells), shard);
        batch.clear();
    };
    for sentence in sentences {
        batch.push(sentence?);
        if batch.len() == batch.capacity() {
            flush(&mut batch, &mut cells);
        }
    }
    flush(&mut batch, &mut cells);
    Ok(finish(cells, vocab, window))
}

/// Counts windowed co-occurrences of in-vocabulary tokens.
///
/// Every in-vocabulary token at distance `1..=window` from an in-vocabulary
/// target inside the same sentence adds one to `(target, context)`.
/// Out-of-vocabulary tokens still occupy their positions.
pub fn count_cooccurrences<I>(sentences: I, vocab: &Vocabulary, window: usize) -> Result<RawCounts>
where
    I: IntoIterator<Item = Result<Sentence>>,
{
    #[cfg(feature = "parallel")]
    {
        count_cooccurrences_par(sentences, vocab, window)
    }
    #[cfg(not(feature = "parallel"))]
    {
        count_cooccurrences_seq(sentences, vocab, window)
    }
}
