//! Command-line front end.
//!
//! ```text
//! headtree [--jobs N] [--manifest PATH] <subcommand> ...
//! ```
//!
//! Subcommands: `align`, `project`, `train`, `parse`, `ensemble`, `eval`,
//! `stats`, `extract`, `diff-extract`. Every subcommand writes its
//! machine-readable result to `--out` (for `eval` also spelled `--json`)
//! and a short human summary to standard error.
//!
//! Exit codes: 0 success, 1 invalid input or failed precondition, 2 bad
//! command line.
//!
//! # Input formats
//!
//! * Treebanks are CoNLL-U, read strictly.
//! * Pairs files are UTF-8 TSV with two columns, `headline<TAB>lead`,
//!   both pre-tokenized with single spaces. With `--sentences`, line `i`
//!   of the pairs file belongs to sentence `i` of the CoNLL-U file and its
//!   lead column must spell that sentence's forms exactly.
//! * `--headlines` files hold one token per line with blank lines between
//!   headlines; a 10-column CoNLL-U line contributes its FORM.
//!
//! # Output formats
//!
//! JSON reports carry a top-level `schema_version`.
//!
//! * `align`: JSON lines, one per pair:
//!   `{"index", "sent_id", "aligned", "pairs": [[headline_id, sentence_id], ...]}`.
//! * `project`: silver CoNLL-U at `--out`; a JSON report at `--report`
//!   (default `<out>.report.json`) with `kept`, `dropped`, `failed`,
//!   `total_collapsed`, `trees_with_collapse`, `dev_size` and `outcomes`
//!   (`index`, `sent_id`, `status`, `headline_len`, `collapsed`,
//!   `promoted`, optional `message`).
//! * `train`: a model file (see [`crate::parser`]).
//! * `parse`, `ensemble`: CoNLL-U. `ensemble --report` adds a JSON report
//!   with `sentences` and `root_constrained`.
//! * `eval`: the fields of [`crate::eval::EvalReport`]; with `--baseline`
//!   also `baseline` (another report), `las_error_reduction`,
//!   `uas_error_reduction` (percent or null), `relation_error_reduction`
//!   and `lem_test` (`z`, `p_value`, `degenerate`).
//! * `stats`: `summaries`, `distributions` and, for two or more inputs,
//!   `table` (`corpora`, `min_share`, `rows`).
//! * `extract`: JSON lines, one per sentence: `{"sent_id", "tuples"}`.
//! * `diff-extract`: `{"differing": [0-based sentence indices], "count"}`.
//!
//! # Run manifest
//!
//! Every run that gets past argument parsing writes a manifest to
//! `--manifest`, or next to the main output as `<out>.manifest.json`:
//! subcommand, resolved flags, SHA-256 of every input file, seed, toolkit
//! version and wall-clock seconds.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::align::{align_subsequence, read_headline_tokens, read_pairs_tsv};
use crate::conllu::{read_file, write_file, DepTree, Treebank};
use crate::ensemble::{ensemble_treebanks, ReparseOptions};
use crate::error::Error;
use crate::eval::{
    error_reduction, relative_error_reduction, score, two_proportion_test, ErrorReduction,
    ScoreOptions, REPORT_SCHEMA_VERSION,
};
use crate::openie::{diff_extractions, extract, ExtractionTuple};
use crate::parser::{continue_training, holdout_split, train, ParserModel, Stage};
use crate::project::{build_silver_corpus, CollapseOrder, SilverOptions};
use crate::stats::{
    compare_distributions, corpus_summary, relation_distribution, DEFAULT_EXCLUDED,
    DEFAULT_MIN_SHARE,
};

#[derive(Parser, Debug)]
#[command(
    name = "headtree",
    version,
    about = "Headline treebanks, parsing and evaluation"
)]
struct Cli {
    /// Worker threads for per-sentence work.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Where to write the run manifest (default: `<out>.manifest.json`).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Align headlines to lead sentences.
    Align(AlignArgs),
    /// Build a silver headline treebank by projection.
    Project(ProjectArgs),
    /// Train a parser model over one or more stages.
    Train(TrainArgs),
    /// Parse a CoNLL-U file with a trained model.
    Parse(ParseArgs),
    /// Combine parallel parses by maximum-spanning-tree reparsing.
    Ensemble(EnsembleArgs),
    /// Score predicted trees against gold trees.
    Eval(EvalArgs),
    /// Corpus summaries and relation distributions.
    Stats(StatsArgs),
    /// Extract predicate-argument tuples.
    Extract(ExtractArgs),
    /// Report sentences whose extractions differ.
    DiffExtract(DiffArgs),
}

#[derive(Args, Debug, Serialize)]
#[group(required = true, multiple = false, id = "headline_source")]
struct HeadlineSource {
    /// Headline/lead TSV.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Headline tokens, one per line, blank line between headlines.
    #[arg(long)]
    headlines: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct AlignArgs {
    #[command(flatten)]
    source: HeadlineSource,
    /// Parsed lead sentences; with `--pairs` alone the TSV leads are used.
    #[arg(long)]
    sentences: Option<PathBuf>,
    #[arg(long)]
    case_sensitive: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OrderArg {
    DepthFirst,
    ClosestToRoot,
}

#[derive(Args, Debug, Serialize)]
struct ProjectArgs {
    #[command(flatten)]
    source: HeadlineSource,
    /// Parsed lead sentences, parallel to the headlines.
    #[arg(long)]
    sentences: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// JSON report path (default `<out>.report.json`).
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    case_sensitive: bool,
    #[arg(long, value_enum, default_value = "depth-first")]
    collapse_order: OrderArg,
    /// Hold out this many silver trees as a development set.
    #[arg(long, default_value_t = 0)]
    dev_size: usize,
    #[arg(long)]
    dev_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// `path:epochs`
#[derive(Clone, Debug, Serialize)]
struct StageSpec {
    path: PathBuf,
    epochs: usize,
}

impl FromStr for StageSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (path, epochs) = s
            .rsplit_once(':')
            .ok_or_else(|| format!("expected PATH:EPOCHS, got `{}`", s))?;
        let epochs = epochs
            .parse()
            .map_err(|_| format!("bad epoch count `{}`", epochs))?;
        if path.is_empty() {
            return Err("empty stage path".into());
        }
        Ok(StageSpec {
            path: path.into(),
            epochs,
        })
    }
}

#[derive(Args, Debug, Serialize)]
struct TrainArgs {
    /// Training stage as PATH:EPOCHS; repeat for sequential stages.
    #[arg(long, required = true)]
    stage: Vec<StageSpec>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Continue training this model instead of starting from zero.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(short = 'o', long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct ParseArgs {
    #[arg(long)]
    model: PathBuf,
    /// CoNLL-U input; existing heads and labels are ignored.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct EnsembleArgs {
    /// Parallel parses of the same sentences (two or more).
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Comma-separated voter weights, one per input.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    force_single_root: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    exclude_punct: bool,
    #[arg(long)]
    coarse_labels: bool,
    /// Second system to compare against, scored on the same gold.
    #[arg(long)]
    baseline: Option<PathBuf>,
    #[arg(long = "json", visible_alias = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct StatsArgs {
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Relations to leave out (default: punct, root).
    #[arg(long, value_delimiter = ',')]
    exclude: Option<Vec<String>>,
    /// Keep `:subtype` suffixes instead of counting coarse labels.
    #[arg(long)]
    full_labels: bool,
    #[arg(long, default_value_t = DEFAULT_MIN_SHARE)]
    min_share: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct ExtractArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct DiffArgs {
    /// Extraction JSON lines from `extract`.
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct InputDigest {
    path: PathBuf,
    sha256: String,
}

#[derive(Serialize)]
pub struct RunManifest {
    schema_version: u32,
    subcommand: String,
    flags: Value,
    jobs: usize,
    inputs: Vec<InputDigest>,
    seed: Option<u64>,
    version: &'static str,
    duration_secs: f64,
}

/// An error annotated with the file it came from.
struct Failure {
    usage: bool,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            usage: true,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            usage: false,
            message: e.to_string(),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn at(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure {
        usage: false,
        message: format!("{}: {}", path.display(), e),
    }
}

fn treebank(path: &Path) -> Outcome<Treebank> {
    read_file(path).map_err(at(path))
}

fn open(path: &Path) -> Outcome<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).map_err(|e| at(path)(e.into()))?,
    ))
}

fn save_treebank(tb: &Treebank, path: &Path) -> Outcome<()> {
    write_file(tb, path).map_err(at(path))
}

fn save_json<T: Serialize>(value: &T, path: &Path) -> Outcome<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| at(path)(e.into()))?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| at(path)(e.into()))?;
    writeln!(w).map_err(|e| at(path)(e.into()))?;
    Ok(())
}

fn save_lines<T: Serialize>(values: &[T], path: &Path) -> Outcome<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| at(path)(e.into()))?);
    for v in values {
        serde_json::to_writer(&mut w, v).map_err(|e| at(path)(e.into()))?;
        writeln!(w).map_err(|e| at(path)(e.into()))?;
    }
    Ok(())
}

fn digest(path: &Path) -> Outcome<InputDigest> {
    let bytes = std::fs::read(path).map_err(|e| at(path)(e.into()))?;
    Ok(InputDigest {
        path: path.to_owned(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Headline tokens paired with lead trees, in input order.
fn load_pairs(
    source: &HeadlineSource,
    sentences: Option<&Path>,
) -> Outcome<Vec<(Vec<String>, DepTree)>> {
    let trees = sentences.map(treebank).transpose()?;
    if let Some(path) = &source.pairs {
        let pairs = read_pairs_tsv(open(path)?).map_err(at(path))?;
        let trees = match trees {
            Some(tb) => tb.trees,
            None => pairs
                .iter()
                .map(|p| {
                    let upos = vec!["X"; p.sentence.len()];
                    let heads: Vec<usize> = (0..p.sentence.len()).collect();
                    let rels: Vec<&str> = (0..p.sentence.len())
                        .map(|i| if i == 0 { "root" } else { "dep" })
                        .collect();
                    DepTree::from_columns(&p.sentence, &upos, &heads, &rels)
                })
                .collect::<crate::Result<Vec<_>>>()
                .map_err(at(path))?,
        };
        if trees.len() != pairs.len() {
            return Err(Failure::from(Error::Contract(format!(
                "{} has {} pairs but there are {} sentences",
                path.display(),
                pairs.len(),
                trees.len()
            ))));
        }
        for (i, (p, t)) in pairs.iter().zip(&trees).enumerate() {
            if p.sentence != t.forms() {
                return Err(Failure::from(Error::Mismatch {
                    sentence: i + 1,
                    message: format!(
                        "lead column of {} does not match the sentence forms",
                        path.display()
                    ),
                }));
            }
        }
        Ok(pairs.into_iter().map(|p| p.headline).zip(trees).collect())
    } else {
        let path = source.headlines.as_ref().expect("clap enforces one source");
        let heads = read_headline_tokens(open(path)?).map_err(at(path))?;
        let trees = trees.ok_or_else(|| Failure::usage("--headlines needs --sentences"))?;
        if trees.len() != heads.len() {
            return Err(Failure::from(Error::Contract(format!(
                "{} has {} headlines but there are {} sentences",
                path.display(),
                heads.len(),
                trees.len()
            ))));
        }
        Ok(heads.into_iter().zip(trees.trees).collect())
    }
}

fn percent(r: ErrorReduction) -> Option<f64> {
    match r {
        ErrorReduction::Percent(v) => Some(v),
        ErrorReduction::Undefined => None,
    }
}

struct Run {
    inputs: Vec<PathBuf>,
    seed: Option<u64>,
    out: PathBuf,
}

fn run(command: &Command) -> Outcome<Run> {
    match command {
        Command::Align(a) => {
            let pairs = load_pairs(&a.source, a.sentences.as_deref())?;
            let mut aligned = 0;
            let lines: Vec<Value> = pairs
                .iter()
                .enumerate()
                .map(|(i, (h, t))| {
                    let al = align_subsequence(h, &t.forms(), a.case_sensitive);
                    aligned += al.is_some() as usize;
                    json!({
                        "index": i,
                        "sent_id": t.sent_id(),
                        "aligned": al.is_some(),
                        "pairs": al.map(|x| x.pairs().to_vec()).unwrap_or_default(),
                    })
                })
                .collect();
            save_lines(&lines, &a.out)?;
            eprintln!("aligned {} of {} pairs", aligned, pairs.len());
            Ok(Run {
                inputs: [&a.source.pairs, &a.source.headlines, &a.sentences]
                    .into_iter()
                    .flatten()
                    .cloned()
                    .collect(),
                seed: None,
                out: a.out.clone(),
            })
        }
        Command::Project(a) => {
            if a.dev_size > 0 && a.dev_out.is_none() {
                return Err(Failure::usage("--dev-size needs --dev-out"));
            }
            let pairs = load_pairs(&a.source, Some(&a.sentences))?;
            let order = match a.collapse_order {
                OrderArg::DepthFirst => CollapseOrder::DepthFirst,
                OrderArg::ClosestToRoot => CollapseOrder::ClosestToRoot,
            };
            let (silver, report) = build_silver_corpus(
                &pairs,
                SilverOptions {
                    case_sensitive: a.case_sensitive,
                    order,
                },
            );
            let mut silver = Treebank::new("silver", silver.trees);
            if let Some(dev_out) = &a.dev_out {
                if a.dev_size > silver.len() {
                    return Err(Failure::from(Error::Contract(format!(
                        "dev size {} exceeds the {} silver trees",
                        a.dev_size,
                        silver.len()
                    ))));
                }
                let (train, dev) = holdout_split(&silver, a.dev_size, a.seed);
                save_treebank(&dev, dev_out)?;
                silver = train;
            }
            save_treebank(&silver, &a.out)?;
            let report_path = a
                .report
                .clone()
                .unwrap_or_else(|| sibling(&a.out, ".report.json"));
            save_json(
                &json!({
                    "schema_version": REPORT_SCHEMA_VERSION,
                    "kept": report.kept,
                    "dropped": report.dropped,
                    "failed": report.failed,
                    "total_collapsed": report.total_collapsed,
                    "trees_with_collapse": report.trees_with_collapse,
                    "dev_size": if a.dev_out.is_some() { a.dev_size } else { 0 },
                    "outcomes": report.outcomes,
                }),
                &report_path,
            )?;
            eprintln!(
                "projected {} of {} pairs ({} without alignment, {} failed); {} trees needed collapsing",
                report.kept,
                pairs.len(),
                report.dropped,
                report.failed,
                report.trees_with_collapse
            );
            Ok(Run {
                inputs: [&a.source.pairs, &a.source.headlines]
                    .into_iter()
                    .flatten()
                    .cloned()
                    .chain([a.sentences.clone()])
                    .collect(),
                seed: Some(a.seed),
                out: a.out.clone(),
            })
        }
        Command::Train(a) => {
            let banks: Vec<Treebank> = a
                .stage
                .iter()
                .map(|s| treebank(&s.path))
                .collect::<Outcome<_>>()?;
            let stages: Vec<Stage> = banks
                .iter()
                .zip(&a.stage)
                .map(|(tb, s)| Stage::new(tb, s.epochs))
                .collect();
            let model = match &a.init {
                Some(p) => {
                    let init = ParserModel::load(p).map_err(at(p))?;
                    continue_training(&init, &stages, a.seed)?
                }
                None => train(&stages, a.seed)?,
            };
            model.save(&a.out).map_err(at(&a.out))?;
            let meta = model.meta();
            eprintln!(
                "trained {} epochs over {} stages; {} non-projective trees skipped; {} features",
                meta.total_epochs(),
                meta.stages.len(),
                meta.skipped_nonprojective(),
                model.feature_count()
            );
            Ok(Run {
                inputs: a
                    .stage
                    .iter()
                    .map(|s| s.path.clone())
                    .chain(a.init.clone())
                    .collect(),
                seed: Some(a.seed),
                out: a.out.clone(),
            })
        }
        Command::Parse(a) => {
            let model = ParserModel::load(&a.model).map_err(at(&a.model))?;
            let input = treebank(&a.input)?;
            let parsed = model.parse_treebank(&input);
            save_treebank(&parsed, &a.out)?;
            eprintln!("parsed {} sentences", parsed.len());
            Ok(Run {
                inputs: vec![a.model.clone(), a.input.clone()],
                seed: None,
                out: a.out.clone(),
            })
        }
        Command::Ensemble(a) => {
            if a.input.len() < 2 {
                return Err(Failure::usage("ensemble needs at least two --input files"));
            }
            if let Some(w) = &a.weights {
                if w.len() != a.input.len() {
                    return Err(Failure::usage(format!(
                        "{} weights for {} inputs",
                        w.len(),
                        a.input.len()
                    )));
                }
            }
            let banks: Vec<Treebank> = a
                .input
                .iter()
                .map(|p| treebank(p))
                .collect::<Outcome<_>>()?;
            let (out, constrained) = ensemble_treebanks(
                &banks,
                a.weights.as_deref(),
                ReparseOptions {
                    force_single_root: a.force_single_root,
                },
            )?;
            save_treebank(&out, &a.out)?;
            if let Some(r) = &a.report {
                save_json(
                    &json!({
                        "schema_version": REPORT_SCHEMA_VERSION,
                        "sentences": out.len(),
                        "root_constrained": constrained,
                    }),
                    r,
                )?;
            }
            eprintln!(
                "ensembled {} sentences from {} parses; {} re-solved with a single root",
                out.len(),
                banks.len(),
                constrained
            );
            Ok(Run {
                inputs: a.input.clone(),
                seed: None,
                out: a.out.clone(),
            })
        }
        Command::Eval(a) => {
            let opts = ScoreOptions {
                exclude_punct: a.exclude_punct,
                coarse_labels: a.coarse_labels,
            };
            let gold = treebank(&a.gold)?;
            let report = score(&treebank(&a.pred)?, &gold, opts).map_err(at(&a.pred))?;
            eprint!("{}", report.to_table());
            let mut value = serde_json::to_value(&report).map_err(Error::from)?;
            let mut inputs = vec![a.pred.clone(), a.gold.clone()];
            if let Some(b) = &a.baseline {
                let base = score(&treebank(b)?, &gold, opts).map_err(at(b))?;
                let lem = |r: &crate::eval::EvalReport| {
                    (r.lem / 100.0 * r.sentence_count as f64).round() as u64
                };
                let n = report.sentence_count as u64;
                let test = if n > 0 {
                    Some(two_proportion_test(lem(&report), n, lem(&base), n)?)
                } else {
                    None
                };
                let las = percent(error_reduction(base.las / 100.0, report.las / 100.0));
                let uas = percent(error_reduction(base.uas / 100.0, report.uas / 100.0));
                let obj = value.as_object_mut().expect("report is an object");
                obj.insert(
                    "baseline".into(),
                    serde_json::to_value(&base).map_err(Error::from)?,
                );
                obj.insert("las_error_reduction".into(), json!(las));
                obj.insert("uas_error_reduction".into(), json!(uas));
                obj.insert(
                    "relation_error_reduction".into(),
                    json!(relative_error_reduction(&base, &report)
                        .into_iter()
                        .map(|(k, v)| (k, percent(v)))
                        .collect::<BTreeMap<_, _>>()),
                );
                obj.insert("lem_test".into(), json!(test));
                eprintln!(
                    "baseline LAS {:.2}; LAS error reduction {}",
                    base.las,
                    las.map_or("undefined".into(), |v| format!("{:.2}%", v))
                );
                inputs.push(b.clone());
            }
            save_json(&value, &a.out)?;
            Ok(Run {
                inputs,
                seed: None,
                out: a.out.clone(),
            })
        }
        Command::Stats(a) => {
            let exclude = a
                .exclude
                .clone()
                .unwrap_or_else(|| DEFAULT_EXCLUDED.iter().map(|s| s.to_string()).collect())
                .into_iter()
                .collect();
            let banks: Vec<Treebank> = a
                .input
                .iter()
                .map(|p| treebank(p))
                .collect::<Outcome<_>>()?;
            let summaries: Vec<_> = banks.iter().map(corpus_summary).collect();
            let dists: Vec<_> = banks
                .iter()
                .map(|tb| relation_distribution(tb, &exclude, !a.full_labels))
                .collect();
            let table = if dists.len() >= 2 {
                let t = compare_distributions(&dists, a.min_share)?;
                eprint!("{}", t.to_tsv());
                Some(t)
            } else {
                None
            };
            for s in &summaries {
                eprintln!(
                    "{}: {} sentences, {} tokens, mean length {}",
                    s.corpus_name,
                    s.headlines,
                    s.tokens,
                    s.mean_length.map_or("n/a".into(), |m| format!("{:.2}", m))
                );
            }
            save_json(
                &json!({
                    "schema_version": REPORT_SCHEMA_VERSION,
                    "summaries": summaries,
                    "distributions": dists,
                    "table": table,
                }),
                &a.out,
            )?;
            Ok(Run {
                inputs: a.input.clone(),
                seed: None,
                out: a.out.clone(),
            })
        }
        Command::Extract(a) => {
            let tb = treebank(&a.input)?;
            let lines: Vec<Value> = tb
                .iter()
                .map(|t| json!({ "sent_id": t.sent_id(), "tuples": extract(t) }))
                .collect();
            let count: usize = lines
                .iter()
                .map(|l| l["tuples"].as_array().map_or(0, Vec::len))
                .sum();
            save_lines(&lines, &a.out)?;
            eprintln!("{} tuples from {} sentences", count, tb.len());
            Ok(Run {
                inputs: vec![a.input.clone()],
                seed: None,
                out: a.out.clone(),
            })
        }
        Command::DiffExtract(a) => {
            let x = read_extractions(&a.a)?;
            let y = read_extractions(&a.b)?;
            let differing = diff_extractions(&x, &y)?;
            eprintln!("{} of {} sentences differ", differing.len(), x.len());
            save_json(
                &json!({
                    "schema_version": REPORT_SCHEMA_VERSION,
                    "count": differing.len(),
                    "differing": differing,
                }),
                &a.out,
            )?;
            Ok(Run {
                inputs: vec![a.a.clone(), a.b.clone()],
                seed: None,
                out: a.out.clone(),
            })
        }
    }
}

fn read_extractions(path: &Path) -> Outcome<Vec<Vec<ExtractionTuple>>> {
    #[derive(serde::Deserialize)]
    struct Line {
        tuples: Vec<ExtractionTuple>,
    }
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| at(path)(e.into()))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(&line).map_err(|e| {
            at(path)(Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })?;
        out.push(parsed.tuples);
    }
    Ok(out)
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Align(_) => "align",
        Command::Project(_) => "project",
        Command::Train(_) => "train",
        Command::Parse(_) => "parse",
        Command::Ensemble(_) => "ensemble",
        Command::Eval(_) => "eval",
        Command::Stats(_) => "stats",
        Command::Extract(_) => "extract",
        Command::DiffExtract(_) => "diff-extract",
    }
}

fn execute(cli: &Cli) -> Outcome<()> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.max(1))
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let done = pool.install(|| run(&cli.command))?;
    let name = subcommand_name(&cli.command);
    let flags = serde_json::to_value(&cli.command)
        .map_err(Error::from)?
        .get(name)
        .cloned()
        .unwrap_or(Value::Null);
    let manifest = RunManifest {
        schema_version: REPORT_SCHEMA_VERSION,
        subcommand: name.to_owned(),
        flags,
        jobs: cli.jobs,
        inputs: done
            .inputs
            .iter()
            .map(|p| digest(p))
            .collect::<Outcome<_>>()?,
        seed: done.seed,
        version: env!("CARGO_PKG_VERSION"),
        duration_secs: start.elapsed().as_secs_f64(),
    };
    let path = cli
        .manifest
        .clone()
        .unwrap_or_else(|| sibling(&done.out, ".manifest.json"));
    save_json(&manifest, &path)
}

/// Run with explicit arguments (the first is the program name) and return
/// the exit code.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            if f.usage {
                2
            } else {
                1
            }
        }
    }
}

pub fn main() -> i32 {
    run_with_args(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_spec_parsing() {
        let s: StageSpec = "data/gold.conllu:5".parse().unwrap();
        assert_eq!((s.path, s.epochs), (PathBuf::from("data/gold.conllu"), 5));
        let s: StageSpec = "c:/x.conllu:3".parse().unwrap();
        assert_eq!(s.path, PathBuf::from("c:/x.conllu"));
        assert!("gold.conllu".parse::<StageSpec>().is_err());
        assert!("gold.conllu:x".parse::<StageSpec>().is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_with_args(["headtree", "frobnicate"]), 2);
        assert_eq!(run_with_args(["headtree", "eval", "--pred", "p.conllu"]), 2);
        assert_eq!(run_with_args(["headtree", "--help"]), 0);
    }

    #[test]
    fn missing_input_exits_1() {
        let dir = std::env::temp_dir();
        let out = dir.join("headtree-cli-missing.json");
        let code = run_with_args([
            "headtree",
            "eval",
            "--pred",
            "/nonexistent/p.conllu",
            "--gold",
            "/nonexistent/g.conllu",
            "--json",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 1);
    }
}
