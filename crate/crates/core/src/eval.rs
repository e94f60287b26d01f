//! Pair datasets, scoring, and report rendering.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::WordPair;
use crate::io as fsio;
use crate::relation::{Label, Task};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub task: Task,
    pub pairs: Vec<WordPair>,
    /// Non-fatal problems found while loading, e.g. repeated pairs.
    pub warnings: Vec<String>,
}

impl Dataset {
    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.pairs.iter().filter_map(|p| p.label)
    }
}

/// Parses `w1<TAB>w2<TAB>label` rows (no header). Tags outside the task's
/// set are errors; repeated pairs are kept and reported as warnings.
pub fn load_pairs(path: &Path, task: Task) -> Result<Dataset> {
    let mut pairs = Vec::new();
    let mut warnings = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (lineno, line) in fsio::read_lines(path)? {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::format(
                path,
                lineno,
                format!("expected w1<TAB>w2<TAB>label, found {} columns", cols.len()),
            ));
        }
        let (w1, w2) = (cols[0].trim(), cols[1].trim());
        if w1.is_empty() || w2.is_empty() {
            return Err(Error::format(path, lineno, "empty word"));
        }
        let label: Label = cols[2]
            .trim()
            .parse()
            .map_err(|e: String| Error::format(path, lineno, e))?;
        if !task.accepts(label) {
            return Err(Error::format(
                path,
                lineno,
                format!("tag {label} is not a {task} label"),
            ));
        }
        if !seen.insert((w1.to_string(), w2.to_string())) {
            warnings.push(format!(
                "{}:{lineno}: duplicate pair {w1}/{w2}",
                path.display()
            ));
        }
        pairs.push(WordPair::new(w1, w2, Some(label)));
    }
    Ok(Dataset {
        task,
        pairs,
        warnings,
    })
}

/// Reads a pair file whose label column may be `?` or missing.
pub fn load_unlabeled_pairs(path: &Path) -> Result<Vec<WordPair>> {
    let mut pairs = Vec::new();
    for (lineno, line) in fsio::read_lines(path)? {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&cols.len()) || cols[0].is_empty() || cols[1].is_empty() {
            return Err(Error::format(
                path,
                lineno,
                "expected w1<TAB>w2[<TAB>label]",
            ));
        }
        let label = match cols.get(2).map(|s| s.trim()) {
            None | Some("?") | Some("") => None,
            Some(tag) => Some(
                tag.parse()
                    .map_err(|e: String| Error::format(path, lineno, e))?,
            ),
        };
        pairs.push(WordPair::new(cols[0].trim(), cols[1].trim(), label));
    }
    Ok(pairs)
}

/// Pairs (as `w1/w2`) present in both datasets, in `test` order.
pub fn shared_pairs(train: &[WordPair], test: &[WordPair]) -> Vec<(String, String)> {
    let train: HashSet<(&str, &str)> = train
        .iter()
        .map(|p| (p.w1.as_str(), p.w2.as_str()))
        .collect();
    let mut seen = HashSet::new();
    test.iter()
        .filter(|p| train.contains(&(p.w1.as_str(), p.w2.as_str())))
        .filter(|p| seen.insert((p.w1.as_str(), p.w2.as_str())))
        .map(|p| (p.w1.clone(), p.w2.clone()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Prf {
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassScore {
    pub label: Label,
    pub scores: Prf,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub task: Task,
    /// One entry per task label, in `Task::labels` order.
    pub per_class: Vec<ClassScore>,
    /// Canonical headline: the TRUE class for task 1, the support-weighted
    /// mean over the four relations for task 2.
    pub overall: Prf,
    /// Every aggregation reported, by name; includes `overall`.
    pub aggregates: Vec<(String, Prf)>,
    pub accuracy: f64,
    /// Rows are gold labels, columns predictions, both in `Task::labels` order.
    pub confusion: Vec<Vec<u64>>,
}

fn weighted_mean(scores: &[&ClassScore]) -> Prf {
    let support: u64 = scores.iter().map(|c| c.support).sum();
    if support == 0 {
        return Prf::default();
    }
    let mean = |get: fn(&Prf) -> f64| {
        scores
            .iter()
            .map(|c| get(&c.scores) * c.support as f64)
            .sum::<f64>()
            / support as f64
    };
    Prf {
        precision: mean(|p| p.precision),
        recall: mean(|p| p.recall),
        f1: mean(|p| p.f1),
    }
}

fn macro_mean(scores: &[&ClassScore]) -> Prf {
    if scores.is_empty() {
        return Prf::default();
    }
    let n = scores.len() as f64;
    let mean = |get: fn(&Prf) -> f64| scores.iter().map(|c| get(&c.scores)).sum::<f64>() / n;
    Prf {
        precision: mean(|p| p.precision),
        recall: mean(|p| p.recall),
        f1: mean(|p| p.f1),
    }
}

/// Builds a report from a gold-row x predicted-column confusion matrix over
/// `task.labels()`.
pub fn report_from_confusion(task: Task, confusion: Vec<Vec<u64>>) -> Result<EvaluationReport> {
    let labels = task.labels();
    let k = labels.len();
    if confusion.len() != k || confusion.iter().any(|r| r.len() != k) {
        return Err(Error::contract(format!("confusion matrix must be {k}x{k}")));
    }
    let per_class: Vec<ClassScore> = labels
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            let tp = confusion[i][i];
            let support: u64 = confusion[i].iter().sum();
            let predicted: u64 = confusion.iter().map(|r| r[i]).sum();
            ClassScore {
                label,
                scores: Prf::from_counts(tp, predicted - tp, support - tp),
                support,
            }
        })
        .collect();
    let total: u64 = confusion.iter().flatten().sum();
    let correct: u64 = (0..k).map(|i| confusion[i][i]).sum();
    let accuracy = if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    };

    let all: Vec<&ClassScore> = per_class.iter().collect();
    let aggregates = match task {
        Task::Task1 => vec![
            ("positive".to_string(), per_class[0].scores),
            ("macro".to_string(), macro_mean(&all)),
        ],
        Task::Task2 => {
            let relations: Vec<&ClassScore> = per_class
                .iter()
                .filter(|c| c.label != Label::Random)
                .collect();
            vec![
                ("weighted".to_string(), weighted_mean(&relations)),
                ("macro".to_string(), macro_mean(&relations)),
                ("weighted_all".to_string(), weighted_mean(&all)),
                ("macro_all".to_string(), macro_mean(&all)),
            ]
        }
    };
    Ok(EvaluationReport {
        task,
        overall: aggregates[0].1,
        per_class,
        aggregates,
        accuracy,
        confusion,
    })
}

/// Scores predictions against gold labels, row by row.
pub fn score(predictions: &[Label], gold: &Dataset) -> Result<EvaluationReport> {
    if predictions.len() != gold.pairs.len() {
        return Err(Error::contract(format!(
            "{} predictions for {} gold pairs",
            predictions.len(),
            gold.pairs.len()
        )));
    }
    let labels = gold.task.labels();
    let index = |l: Label, what: &str| {
        labels.iter().position(|&x| x == l).ok_or_else(|| {
            Error::contract(format!("{what} label {l} is not a {} label", gold.task))
        })
    };
    let mut confusion = vec![vec![0u64; labels.len()]; labels.len()];
    for (pred, pair) in predictions.iter().zip(&gold.pairs) {
        let g = pair.label.ok_or_else(|| {
            Error::contract(format!("gold pair {}/{} has no label", pair.w1, pair.w2))
        })?;
        confusion[index(g, "gold")?][index(*pred, "predicted")?] += 1;
    }
    report_from_confusion(gold.task, confusion)
}

impl EvaluationReport {
    /// Plain-text tables: headline P/R/F, per-class scores, every
    /// aggregation, then the confusion matrix.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} evaluation", self.task);
        let _ = writeln!(
            out,
            "overall  P {:.3}  R {:.3}  F {:.3}  accuracy {:.3}",
            self.overall.precision, self.overall.recall, self.overall.f1, self.accuracy
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<10}{:>10}{:>10}{:>10}{:>10}",
            "relation", "precision", "recall", "f1", "support"
        );
        for c in &self.per_class {
            let _ = writeln!(
                out,
                "{:<10}{:>10.3}{:>10.3}{:>10.3}{:>10}",
                c.label.as_str(),
                c.scores.precision,
                c.scores.recall,
                c.scores.f1,
                c.support
            );
        }
        let _ = writeln!(out);
        for (name, p) in &self.aggregates {
            let _ = writeln!(
                out,
                "{:<10}{:>10.3}{:>10.3}{:>10.3}",
                name, p.precision, p.recall, p.f1
            );
        }
        let _ = writeln!(out);
        out.push_str(&self.render_confusion());
        out
    }

    /// Gold labels down the side, predictions across the top.
    pub fn render_confusion(&self) -> String {
        let labels = self.task.labels();
        let width = self
            .confusion
            .iter()
            .flatten()
            .map(|n| n.to_string().len())
            .chain(labels.iter().map(|l| l.as_str().len()))
            .max()
            .unwrap_or(1)
            + 2;
        let mut out = String::new();
        let _ = write!(out, "{:<10}", "gold\\pred");
        for l in labels {
            let _ = write!(out, "{:>width$}", l.as_str());
        }
        out.push('\n');
        for (label, row) in labels.iter().zip(&self.confusion) {
            let _ = write!(out, "{:<10}", label.as_str());
            for n in row {
                let _ = write!(out, "{n:>width$}");
            }
            out.push('\n');
        }
        out
    }

    /// Machine-readable report: `section<TAB>name<TAB>...` rows.
    pub fn render_tsv(&self) -> String {
        let mut out = String::from("section\tname\tprecision\trecall\tf1\tsupport\n");
        for c in &self.per_class {
            let _ = writeln!(
                out,
                "class\t{}\t{:.6}\t{:.6}\t{:.6}\t{}",
                c.label, c.scores.precision, c.scores.recall, c.scores.f1, c.support
            );
        }
        let total: u64 = self.per_class.iter().map(|c| c.support).sum();
        for (name, p) in &self.aggregates {
            let _ = writeln!(
                out,
                "aggregate\t{name}\t{:.6}\t{:.6}\t{:.6}\t{total}",
                p.precision, p.recall, p.f1
            );
        }
        let _ = writeln!(out, "accuracy\taccuracy\t{:.6}\t\t\t{total}", self.accuracy);
        let labels = self.task.labels();
        for (g, row) in labels.iter().zip(&self.confusion) {
            for (p, n) in labels.iter().zip(row) {
                let _ = writeln!(out, "confusion\t{g}>{p}\t\t\t\t{n}");
            }
        }
        out
    }
}
