//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data or format errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use distrel::corpus::{self, RawCounts, Vocabulary, SENTENCE_WINDOW};
use distrel::eval;
use distrel::features::{self, FeatureExtractor, PairFeatures, WordPair, FEATURE_NAMES};
use distrel::forest::{self, ClassWeight, Criterion, ForestParams, TrainingData};
use distrel::io::{write_atomic, Metadata};
use distrel::space;
use distrel::synth::{self, SynthConfig, SynthData};
use distrel::{Error, Label, Task};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

pub const VOCAB_FILE: &str = "vocab.tsv";
pub const COUNTS_FILE: &str = "counts.tsv";
pub const SPACE_FILE: &str = "space.tsv";
pub const COOC_FILE: &str = "cooc.tsv";

#[derive(Debug, Parser)]
#[command(
    name = "distrel",
    version,
    about = "Distributional lexical-relation classifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corpus -> vocabulary, co-occurrence counts and PPMI space.
    Build(BuildArgs),
    /// Space + pair file -> feature TSV.
    Features(FeaturesArgs),
    /// Feature TSV -> random forest model.
    Train(TrainArgs),
    /// Model + feature TSV -> predicted labels.
    Predict(PredictArgs),
    /// Predictions + gold pairs -> evaluation report.
    Eval(EvalArgs),
    /// Model -> ranked feature importances.
    Importances(ImportancesArgs),
    /// Write a synthetic corpus with planted relation pairs.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum CoocScope {
    Window,
    Sentence,
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// Tokenised corpus, one sentence per line, `lemma|POS` tokens.
    #[arg(long)]
    corpus: PathBuf,
    /// Output directory for vocab.tsv, counts.tsv and space.tsv.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    window: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    min_count: u64,
    /// Where the `cooc` feature is counted.
    #[arg(long, value_enum, default_value_t = CoocScope::Window)]
    cooc_scope: CoocScope,
}

#[derive(Debug, Args)]
struct FeaturesArgs {
    /// Directory written by `build`.
    #[arg(long)]
    space: PathBuf,
    /// Pair TSV: w1<TAB>w2[<TAB>label].
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Context list sizes for the two APSyn/APAnt slots.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [100usize, 1000])]
    top_n: Vec<usize>,
    /// Validate labels against this task (inferred when omitted).
    #[arg(long)]
    task: Option<Task>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    trees: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    depth: u64,
    #[arg(long, default_value = "gini")]
    criterion: Criterion,
    #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(u64).range(1..=18))]
    max_features: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..))]
    min_split: u64,
    #[arg(long, default_value = "none")]
    class_weight: ClassWeight,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    /// Output pair TSV with the predicted label in the third column.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Predicted pair TSV.
    #[arg(long)]
    pred: PathBuf,
    /// Gold pair TSV.
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    task: Option<Task>,
    /// Also write the machine-readable report here.
    #[arg(long)]
    out_tsv: Option<PathBuf>,
    /// Training pair file; warn about pairs it shares with the gold file.
    #[arg(long)]
    check_split: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ImportancesArgs {
    #[arg(long)]
    model: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output directory for corpus.txt, train.tsv and test.tsv.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 600)]
    train_pairs: usize,
    #[arg(long, default_value_t = 250)]
    test_pairs: usize,
    /// Write TRUE/FALSE labels instead of relation tags.
    #[arg(long)]
    task1: bool,
}

/// Failure of a command, already classified by exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_contract() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Runs the CLI with `argv` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Build(a) => build(a, out),
        Command::Features(a) => features_cmd(a, out, err),
        Command::Train(a) => train(a, out),
        Command::Predict(a) => predict(a, out),
        Command::Eval(a) => evaluate(a, out, err),
        Command::Importances(a) => importances(a, out),
        Command::Synth(a) => synth_cmd(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DATA
        }
    }
}

fn data_err(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

fn build(a: BuildArgs, out: &mut dyn Write) -> CmdResult {
    let window = usize::try_from(a.window).unwrap_or(usize::MAX);
    fs::create_dir_all(&a.out).map_err(|e| data_err(format!("{}: {e}", a.out.display())))?;

    let vocab = corpus::build_vocabulary(corpus::parse_corpus(&a.corpus)?, a.min_count)?;
    let counts = corpus::count_cooccurrences(corpus::parse_corpus(&a.corpus)?, &vocab, window)?;
    let mut meta = counts.metadata(&vocab);
    meta.set(
        "cooc_scope",
        match a.cooc_scope {
            CoocScope::Window => "window",
            CoocScope::Sentence => "sentence",
        },
    );

    vocab.write_tsv(&a.out.join(VOCAB_FILE))?;
    counts.write_tsv(&a.out.join(COUNTS_FILE), &meta)?;
    if a.cooc_scope == CoocScope::Sentence {
        let cooc =
            corpus::count_cooccurrences(corpus::parse_corpus(&a.corpus)?, &vocab, SENTENCE_WINDOW)?;
        cooc.write_tsv(&a.out.join(COOC_FILE), &cooc.metadata(&vocab))?;
    }
    if counts.total() > 0 {
        let space = space::ppmi_weight(&counts)?;
        space.write_tsv(&a.out.join(SPACE_FILE), &meta)?;
    }
    let _ = writeln!(
        out,
        "vocabulary {} lemmas, {} non-zero cells, {} co-occurrences (window {})",
        vocab.len(),
        counts.nnz(),
        counts.total(),
        a.window
    );
    Ok(())
}

/// A loaded `build` directory.
pub struct SpaceDir {
    pub vocab: Vocabulary,
    pub counts: RawCounts,
    pub cooc: Option<RawCounts>,
    pub meta: Metadata,
}

impl SpaceDir {
    /// Reads vocabulary and counts; the PPMI space is recomputed from the
    /// exact counts rather than the rounded `space.tsv` export.
    pub fn load(dir: &Path) -> distrel::Result<Self> {
        let (counts, meta) = RawCounts::read_tsv(&dir.join(COUNTS_FILE))?;
        let min_count = meta
            .get("min_count")
            .and_then(|v| v.parse().ok())
            .unwrap_or(1);
        let vocab = Vocabulary::read_tsv(&dir.join(VOCAB_FILE), min_count)?;
        if vocab.len() != counts.vocab_size() {
            return Err(Error::Format {
                path: dir.join(COUNTS_FILE),
                line: 0,
                message: format!(
                    "counts cover {} ids but the vocabulary has {}",
                    counts.vocab_size(),
                    vocab.len()
                ),
            });
        }
        let cooc = match meta.get("cooc_scope") {
            Some("sentence") => Some(RawCounts::read_tsv(&dir.join(COOC_FILE))?.0),
            _ => None,
        };
        Ok(SpaceDir {
            vocab,
            counts,
            cooc,
            meta,
        })
    }
}

fn check_task(pairs: &[WordPair], task: Option<Task>) -> Result<Option<Task>, Failure> {
    let labels: Vec<Label> = pairs.iter().filter_map(|p| p.label).collect();
    match task {
        Some(task) => {
            if let Some(bad) = labels.iter().find(|l| !task.accepts(**l)) {
                return Err(data_err(format!("label {bad} is not a {task} label")));
            }
            Ok(Some(task))
        }
        None if labels.is_empty() => Ok(None),
        None => Task::infer(&labels)
            .map(Some)
            .ok_or_else(|| data_err("pair labels mix task-1 and task-2 tags")),
    }
}

fn features_cmd(a: FeaturesArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let top_n: [usize; 2] = a
        .top_n
        .as_slice()
        .try_into()
        .map_err(|_| Failure::Usage("--top-n takes exactly two sizes, e.g. 100,1000".into()))?;
    let dir = SpaceDir::load(&a.space)?;
    let pairs = eval::load_unlabeled_pairs(&a.pairs)?;
    check_task(&pairs, a.task)?;

    let space = space::ppmi_weight(&dir.counts)?;
    let mut extractor = FeatureExtractor::new(&dir.vocab, &dir.counts, &space).with_top_n(top_n)?;
    if let Some(cooc) = &dir.cooc {
        extractor = extractor.with_cooc(cooc);
    }
    let values = extractor.extract_all(&pairs);
    let oov = values.iter().filter(|f| f.oov1 || f.oov2).count();
    if oov > 0 {
        let _ = writeln!(
            err,
            "warning: {oov} of {} pairs contain out-of-vocabulary words",
            pairs.len()
        );
    }
    let rows: Vec<(WordPair, PairFeatures)> = pairs.into_iter().zip(values).collect();
    features::write_features(&rows, &a.out)?;
    let _ = writeln!(
        out,
        "wrote {} feature rows to {}",
        rows.len(),
        a.out.display()
    );
    Ok(())
}

fn feature_names() -> Vec<String> {
    FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
}

fn train(a: TrainArgs, out: &mut dyn Write) -> CmdResult {
    let rows = features::read_features(&a.features)?;
    let mut labels = Vec::with_capacity(rows.len());
    for (pair, _) in &rows {
        let label = pair
            .label
            .ok_or_else(|| data_err(format!("pair {}/{} has no label", pair.w1, pair.w2)))?;
        labels.push(label.as_str());
    }
    if Task::infer(&rows.iter().filter_map(|(p, _)| p.label).collect::<Vec<_>>()).is_none()
        && !rows.is_empty()
    {
        return Err(data_err("training labels mix task-1 and task-2 tags"));
    }
    let matrix: Vec<&[f64]> = rows.iter().map(|(_, f)| f.values.as_slice()).collect();
    let data = TrainingData::new(&matrix, &labels)?;
    let params = ForestParams {
        n_estimators: a.trees as usize,
        max_depth: a.depth as usize,
        criterion: a.criterion,
        max_features: a.max_features as usize,
        seed: a.seed,
        min_split: a.min_split as usize,
        class_weight: a.class_weight,
    };
    params.validate(FEATURE_NAMES.len())?;
    let forest = forest::train_forest(&data, &params, &feature_names())?;
    forest::save_model(&forest, &a.out)?;
    let _ = writeln!(
        out,
        "trained {} trees (max depth reached {}) on {} pairs, classes {}",
        forest.trees.len(),
        forest.max_depth(),
        data.len(),
        forest.classes.join(",")
    );
    Ok(())
}

fn predict(a: PredictArgs, out: &mut dyn Write) -> CmdResult {
    let model = forest::load_model(&a.model)?;
    if model.feature_names != feature_names() {
        return Err(data_err(
            "model was not trained on the canonical pair features",
        ));
    }
    let rows = features::read_features(&a.features)?;
    let matrix: Vec<&[f64]> = rows.iter().map(|(_, f)| f.values.as_slice()).collect();
    let predictions = model.predict_all(&matrix)?;
    write_atomic(&a.out, |w| {
        for ((pair, _), p) in rows.iter().zip(&predictions) {
            writeln!(w, "{}\t{}\t{}", pair.w1, pair.w2, p.label)?;
        }
        Ok(())
    })?;
    let _ = writeln!(
        out,
        "wrote {} predictions to {}",
        predictions.len(),
        a.out.display()
    );
    Ok(())
}

fn evaluate(a: EvalArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let task = match a.task {
        Some(t) => t,
        None => {
            let pairs = eval::load_unlabeled_pairs(&a.gold)?;
            check_task(&pairs, None)?
                .ok_or_else(|| data_err("cannot infer the task from an unlabeled gold file"))?
        }
    };
    let gold = eval::load_pairs(&a.gold, task)?;
    let pred = eval::load_pairs(&a.pred, task)?;
    for w in gold.warnings.iter().chain(&pred.warnings) {
        let _ = writeln!(err, "warning: {w}");
    }
    if pred.pairs.len() != gold.pairs.len() {
        return Err(data_err(format!(
            "{} predictions for {} gold pairs",
            pred.pairs.len(),
            gold.pairs.len()
        )));
    }
    for (i, (p, g)) in pred.pairs.iter().zip(&gold.pairs).enumerate() {
        if p.w1 != g.w1 || p.w2 != g.w2 {
            return Err(data_err(format!(
                "row {}: prediction for {}/{} but gold pair is {}/{}",
                i + 1,
                p.w1,
                p.w2,
                g.w1,
                g.w2
            )));
        }
    }
    if let Some(train_path) = &a.check_split {
        let train = eval::load_unlabeled_pairs(train_path)?;
        let shared = eval::shared_pairs(&train, &gold.pairs);
        if !shared.is_empty() {
            let list: Vec<String> = shared.iter().map(|(a, b)| format!("{a}/{b}")).collect();
            let _ = writeln!(
                err,
                "warning: {} pairs occur in both training and test data: {}",
                shared.len(),
                list.join(", ")
            );
        }
    }
    let predictions: Vec<Label> = pred.labels().collect();
    let report = eval::score(&predictions, &gold)?;
    let _ = write!(out, "{}", report.render_text());
    if let Some(path) = &a.out_tsv {
        let tsv = report.render_tsv();
        write_atomic(path, |w| w.write_all(tsv.as_bytes()))?;
    }
    Ok(())
}

fn importances(a: ImportancesArgs, out: &mut dyn Write) -> CmdResult {
    let model = forest::load_model(&a.model)?;
    let mut ranked = model.feature_importances();
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    let _ = writeln!(out, "rank\tfeature\timportance");
    for (i, (name, v)) in ranked.iter().enumerate() {
        let _ = writeln!(out, "{}\t{name}\t{v:.6}", i + 1);
    }
    Ok(())
}

fn synth_cmd(a: SynthArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = SynthConfig {
        seed: a.seed,
        train_pairs: a.train_pairs,
        test_pairs: a.test_pairs,
        ..SynthConfig::default()
    };
    let data = synth::generate(&cfg);
    fs::create_dir_all(&a.out).map_err(|e| data_err(format!("{}: {e}", a.out.display())))?;
    let (train, test) = if a.task1 {
        (
            SynthData::to_task1(&data.train),
            SynthData::to_task1(&data.test),
        )
    } else {
        (data.train.clone(), data.test.clone())
    };
    let write =
        |name: &str, text: &str| write_atomic(&a.out.join(name), |w| w.write_all(text.as_bytes()));
    write("corpus.txt", &data.corpus)?;
    write("train.tsv", &SynthData::pairs_tsv(&train))?;
    write("test.tsv", &SynthData::pairs_tsv(&test))?;
    let _ = writeln!(
        out,
        "wrote {} sentences, {} train and {} test pairs to {}",
        data.corpus.lines().count(),
        train.len(),
        test.len(),
        a.out.display()
    );
    Ok(())
}
