//! Greedy arc-standard dependency parser trained as an averaged perceptron.
//!
//! # Transition system
//!
//! The stack starts as `[0]` (the virtual root) and the buffer holds the
//! tokens in order. With `s0` the stack top and `s1` the item below it:
//!
//! * `SHIFT` moves the buffer front onto the stack.
//! * `LEFT-ARC(l)` attaches `s1` to `s0` with label `l` and pops `s1`.
//!   Not allowed when `s1` is the virtual root.
//! * `RIGHT-ARC(l)` attaches `s0` to `s1` and pops `s0`. Attaching to the
//!   virtual root is only allowed once the buffer is empty and `s0` is the
//!   last token on the stack, so every parse has exactly one root.
//!
//! Transition ids are `SHIFT = 0`, `LEFT-ARC(l) = 1 + 2l`,
//! `RIGHT-ARC(l) = 2 + 2l`, where `l` indexes the model's label table.
//! Equal scores are resolved towards the smaller id.
//!
//! # Feature templates (`arcstd-v1`)
//!
//! `w` is the lowercased form, `p` the UPOS; the root is `<root>`, absent
//! positions are `<none>`; `lc`/`rc` are the labels of the leftmost and
//! rightmost dependents attached so far; `d` buckets the distance between
//! `s0` and `s1` into 1, 2, 3, 4, 5-9, 10+.
//!
//! ```text
//! bias
//! s0w s0p s0w|s0p   s1w s1p s1w|s1p   b0w b0p b0w|b0p   b1w b1p   s2p
//! s0w|s1w  s0p|s1p  s0w|s1p  s0p|s1w  s0w|s0p|s1p  s0p|s1w|s1p
//! s0p|b0p  s0w|b0w  s1p|s0p|b0p  s0p|b0p|b1p  s2p|s1p|s0p
//! s0lc s0rc s1lc s1rc  s0p|s0lc  s0p|s0rc  s1p|s1lc  s1p|s1rc
//! s1p|s0p|s0lc  s1p|s0p|s1rc  d  d|s0p|s1p  d|s0w|s1w
//! ```
//!
//! # Model file
//!
//! Line-based UTF-8 text:
//!
//! ```text
//! headtree-perceptron
//! format 1
//! templates arcstd-v1
//! updates <perceptron clock>
//! seed <u64>
//! stages <count>
//! <epochs>\t<trees used>\t<non-projective skipped>\t<sha256 of the stage data>
//! labels <count>
//! <label>\t<may attach to root 0|1>\t<may attach elsewhere 0|1>
//! weights <count>
//! <transition id>\t<raw weight>\t<averaged weight>\t<feature>
//! end
//! ```
//!
//! Weight lines are sorted by feature, then transition id.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::conllu::{DepTree, Token, Treebank};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &str = "headtree-perceptron";
pub const MODEL_FORMAT: u32 = 1;
pub const FEATURE_TEMPLATES: &str = "arcstd-v1";

const ROOT: &str = "<root>";
const NONE: &str = "<none>";

/// Oracle transition with its label spelled out.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Shift,
    LeftArc(String),
    RightArc(String),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Shift => write!(f, "SHIFT"),
            Action::LeftArc(l) => write!(f, "LEFT-ARC({})", l),
            Action::RightArc(l) => write!(f, "RIGHT-ARC({})", l),
        }
    }
}

/// The tree has crossing arcs and no arc-standard derivation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NonProjective;

/// Parser state. Arcs are stored as head/label per token.
#[derive(Clone, Debug)]
pub struct Configuration<L> {
    stack: Vec<usize>,
    next: usize,
    n: usize,
    heads: Vec<Option<usize>>,
    labels: Vec<Option<L>>,
    leftmost: Vec<Option<usize>>,
    rightmost: Vec<Option<usize>>,
}

impl<L: Clone> Configuration<L> {
    pub fn new(n: usize) -> Self {
        Configuration {
            stack: vec![0],
            next: 1,
            n,
            heads: vec![None; n + 1],
            labels: vec![None; n + 1],
            leftmost: vec![None; n + 1],
            rightmost: vec![None; n + 1],
        }
    }

    pub fn stack(&self) -> &[usize] {
        &self.stack
    }

    /// Remaining buffer, front first.
    pub fn buffer(&self) -> std::ops::RangeInclusive<usize> {
        self.next..=self.n
    }

    fn buffer_empty(&self) -> bool {
        self.next > self.n
    }

    pub fn is_terminal(&self) -> bool {
        self.buffer_empty() && self.stack.len() == 1
    }

    pub fn can_shift(&self) -> bool {
        !self.buffer_empty()
    }

    pub fn can_left_arc(&self) -> bool {
        self.stack.len() >= 3
    }

    pub fn can_right_arc(&self) -> bool {
        self.stack.len() >= 3 || (self.stack.len() == 2 && self.buffer_empty())
    }

    /// `(head, dependent, label)` for every attached token.
    pub fn arcs(&self) -> Vec<(usize, usize, L)> {
        (1..=self.n)
            .filter_map(|d| Some((self.heads[d]?, d, self.labels[d].clone()?)))
            .collect()
    }

    fn s(&self, i: usize) -> Option<usize> {
        self.stack.len().checked_sub(i + 1).map(|k| self.stack[k])
    }

    fn b(&self, i: usize) -> Option<usize> {
        let id = self.next + i;
        (id <= self.n).then_some(id)
    }

    fn attach(&mut self, head: usize, dep: usize, label: L) {
        self.heads[dep] = Some(head);
        self.labels[dep] = Some(label);
        if dep < head {
            if self.leftmost[head].is_none_or(|l| dep < l) {
                self.leftmost[head] = Some(dep);
            }
        } else if self.rightmost[head].is_none_or(|r| dep > r) {
            self.rightmost[head] = Some(dep);
        }
    }

    fn shift(&mut self) {
        self.stack.push(self.next);
        self.next += 1;
    }

    fn left_arc(&mut self, label: L) {
        let s0 = self.stack.pop().unwrap();
        let s1 = self.stack.pop().unwrap();
        self.attach(s0, s1, label);
        self.stack.push(s0);
    }

    fn right_arc(&mut self, label: L) {
        let s0 = self.stack.pop().unwrap();
        let s1 = *self.stack.last().unwrap();
        self.attach(s1, s0, label);
    }

    pub fn apply(&mut self, action: &Action) -> Result<()>
    where
        L: From<String>,
    {
        match action {
            Action::Shift if self.can_shift() => self.shift(),
            Action::LeftArc(l) if self.can_left_arc() => self.left_arc(L::from(l.clone())),
            Action::RightArc(l) if self.can_right_arc() => self.right_arc(L::from(l.clone())),
            _ => {
                return Err(Error::Contract(format!(
                    "{} is not allowed in this configuration",
                    action
                )))
            }
        }
        Ok(())
    }
}

/// Canonical arc-standard derivation of a validated tree.
pub fn static_oracle(tree: &DepTree) -> std::result::Result<Vec<Action>, NonProjective> {
    let n = tree.len();
    let heads = tree.heads();
    let mut pending = vec![0usize; n + 1];
    for &h in &heads {
        pending[h] += 1;
    }
    let head = |d: usize| heads[d - 1];
    let label = |d: usize| tree.token(d).deprel.clone();

    let mut config: Configuration<String> = Configuration::new(n);
    let mut out = Vec::with_capacity(2 * n);
    while !config.is_terminal() {
        let s0 = config.s(0);
        let s1 = config.s(1);
        let action = match (s0, s1) {
            (Some(s0), Some(s1)) if s1 != 0 && head(s1) == s0 => Action::LeftArc(label(s1)),
            (Some(s0), Some(s1))
                if s0 != 0
                    && head(s0) == s1
                    && pending[s0] == 0
                    && (s1 != 0 || config.buffer_empty()) =>
            {
                Action::RightArc(label(s0))
            }
            _ if config.can_shift() => Action::Shift,
            _ => return Err(NonProjective),
        };
        match &action {
            Action::LeftArc(_) => pending[s0.unwrap()] -= 1,
            Action::RightArc(_) => pending[s1.unwrap()] -= 1,
            Action::Shift => {}
        }
        config
            .apply(&action)
            .expect("oracle only emits legal actions");
        out.push(action);
    }
    Ok(out)
}

/// Rebuild `(heads, labels)` by replaying actions on an `n`-token sentence.
pub fn replay(n: usize, actions: &[Action]) -> Result<(Vec<usize>, Vec<String>)> {
    let mut config: Configuration<String> = Configuration::new(n);
    for a in actions {
        config.apply(a)?;
    }
    if !config.is_terminal() {
        return Err(Error::Contract(
            "actions end in a non-terminal state".into(),
        ));
    }
    let heads = (1..=n).map(|d| config.heads[d].unwrap()).collect();
    let labels = (1..=n).map(|d| config.labels[d].clone().unwrap()).collect();
    Ok((heads, labels))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Transition {
    Shift,
    LeftArc(usize),
    RightArc(usize),
}

impl Transition {
    fn id(self) -> usize {
        match self {
            Transition::Shift => 0,
            Transition::LeftArc(l) => 1 + 2 * l,
            Transition::RightArc(l) => 2 + 2 * l,
        }
    }

    fn from_id(id: usize) -> Self {
        match id {
            0 => Transition::Shift,
            i if i % 2 == 1 => Transition::LeftArc((i - 1) / 2),
            i => Transition::RightArc((i - 2) / 2),
        }
    }
}

/// Per-training-stage provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageMeta {
    pub epochs: usize,
    pub trees: usize,
    pub skipped_nonprojective: usize,
    /// SHA-256 over the stage's trees in CoNLL-U form.
    pub fingerprint: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrainingMeta {
    pub seed: u64,
    pub stages: Vec<StageMeta>,
}

impl TrainingMeta {
    pub fn total_epochs(&self) -> usize {
        self.stages.iter().map(|s| s.epochs).sum()
    }

    pub fn skipped_nonprojective(&self) -> usize {
        self.stages.iter().map(|s| s.skipped_nonprojective).sum()
    }
}

type SparseRow = Vec<(u32, f64)>;

/// Trained weights and label table.
#[derive(Clone, Debug, PartialEq)]
pub struct ParserModel {
    labels: Vec<String>,
    root_ok: Vec<bool>,
    inner_ok: Vec<bool>,
    weights: HashMap<String, SparseRow>,
    averaged: HashMap<String, SparseRow>,
    updates: u64,
    meta: TrainingMeta,
}

impl ParserModel {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn meta(&self) -> &TrainingMeta {
        &self.meta
    }

    pub fn feature_count(&self) -> usize {
        self.weights.len()
    }

    fn transition_count(&self) -> usize {
        1 + 2 * self.labels.len()
    }

    fn legal(&self, config: &Configuration<usize>, t: Transition) -> bool {
        match t {
            Transition::Shift => config.can_shift(),
            Transition::LeftArc(l) => config.can_left_arc() && self.inner_ok[l],
            Transition::RightArc(l) => {
                if !config.can_right_arc() {
                    return false;
                }
                let to_root = config.stack.len() == 2;
                if to_root {
                    self.root_ok[l]
                } else {
                    self.inner_ok[l]
                }
            }
        }
    }

    fn best(
        &self,
        table: &HashMap<String, SparseRow>,
        features: &[String],
        config: &Configuration<usize>,
        scores: &mut [f64],
    ) -> Transition {
        scores.iter_mut().for_each(|s| *s = 0.0);
        for f in features {
            if let Some(row) = table.get(f) {
                for &(t, w) in row {
                    scores[t as usize] += w;
                }
            }
        }
        let mut best: Option<(f64, Transition)> = None;
        for (id, &s) in scores.iter().enumerate() {
            let t = Transition::from_id(id);
            if !self.legal(config, t) {
                continue;
            }
            if best.is_none_or(|(bs, _)| s > bs) {
                best = Some((s, t));
            }
        }
        best.expect("a non-terminal configuration has a legal transition")
            .1
    }

    /// Parse a sentence using its forms and UPOS tags. The input's
    /// structure is ignored; everything else is copied.
    pub fn parse(&self, sentence: &DepTree) -> DepTree {
        let (heads, labels) = self.parse_columns(
            &sentence
                .tokens()
                .iter()
                .map(|t| t.form.as_str())
                .collect::<Vec<_>>(),
            &sentence
                .tokens()
                .iter()
                .map(|t| t.upos.as_str())
                .collect::<Vec<_>>(),
        );
        sentence
            .with_structure(&heads, &labels)
            .expect("parser output is a single-rooted tree")
    }

    /// Parse bare tokens into a new tree.
    pub fn parse_tokens<S: AsRef<str>>(&self, forms: &[S], upos: &[S]) -> Result<DepTree> {
        if forms.len() != upos.len() || forms.is_empty() {
            return Err(Error::Contract(
                "parse needs one UPOS tag per token and at least one token".into(),
            ));
        }
        let f: Vec<&str> = forms.iter().map(AsRef::as_ref).collect();
        let p: Vec<&str> = upos.iter().map(AsRef::as_ref).collect();
        let (heads, labels) = self.parse_columns(&f, &p);
        let tokens = (0..f.len())
            .map(|i| Token::new(i + 1, f[i], p[i], heads[i], labels[i].clone()))
            .collect();
        DepTree::new(tokens, Vec::new()).check()
    }

    fn parse_columns(&self, forms: &[&str], upos: &[&str]) -> (Vec<usize>, Vec<String>) {
        let sent = Sentence::new(forms, upos);
        let mut config: Configuration<usize> = Configuration::new(forms.len());
        let mut feats = FeatureBuffer::default();
        let mut scores = vec![0.0; self.transition_count()];
        while !config.is_terminal() {
            feats.fill(&sent, &config, &self.labels);
            let t = self.best(&self.averaged, &feats.values, &config, &mut scores);
            apply(&mut config, t);
        }
        let heads = (1..=forms.len())
            .map(|d| config.heads[d].unwrap())
            .collect();
        let labels = (1..=forms.len())
            .map(|d| self.labels[config.labels[d].unwrap()].clone())
            .collect();
        (heads, labels)
    }

    pub fn parse_treebank(&self, tb: &Treebank) -> Treebank {
        use rayon::prelude::*;
        let trees = tb.trees.par_iter().map(|t| self.parse(t)).collect();
        Treebank::new(tb.source_name.clone(), trees)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", MODEL_MAGIC)?;
        writeln!(w, "format {}", MODEL_FORMAT)?;
        writeln!(w, "templates {}", FEATURE_TEMPLATES)?;
        writeln!(w, "updates {}", self.updates)?;
        writeln!(w, "seed {}", self.meta.seed)?;
        writeln!(w, "stages {}", self.meta.stages.len())?;
        for s in &self.meta.stages {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                s.epochs, s.trees, s.skipped_nonprojective, s.fingerprint
            )?;
        }
        writeln!(w, "labels {}", self.labels.len())?;
        for (i, l) in self.labels.iter().enumerate() {
            writeln!(
                w,
                "{}\t{}\t{}",
                l, self.root_ok[i] as u8, self.inner_ok[i] as u8
            )?;
        }
        let mut keys: Vec<&String> = self.weights.keys().collect();
        keys.sort();
        let mut lines = Vec::new();
        for k in keys {
            let raw = &self.weights[k];
            let avg = self.averaged.get(k);
            let mut ts: Vec<u32> = raw.iter().map(|&(t, _)| t).collect();
            ts.sort_unstable();
            for t in ts {
                let rw = raw.iter().find(|e| e.0 == t).map_or(0.0, |e| e.1);
                let aw = avg
                    .and_then(|row| row.iter().find(|e| e.0 == t))
                    .map_or(0.0, |e| e.1);
                lines.push(format!("{}\t{:?}\t{:?}\t{}", t, rw, aw, k));
            }
        }
        writeln!(w, "weights {}", lines.len())?;
        for l in lines {
            writeln!(w, "{}", l)?;
        }
        writeln!(w, "end")?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = |what: &str| -> Result<String> {
            match lines.next() {
                Some(l) => Ok(l?),
                None => Err(Error::Format(format!("file ends before {}", what))),
            }
        };
        let bad = |m: String| Error::Format(m);

        if next("magic")? != MODEL_MAGIC {
            return Err(bad("not a headtree parser model (bad magic line)".into()));
        }
        let header = |line: String, key: &str| -> Result<String> {
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_owned)
                .ok_or_else(|| Error::Format(format!("expected `{} ...`, found `{}`", key, line)))
        };
        let num = |s: String, what: &str| -> Result<u64> {
            s.parse::<u64>()
                .map_err(|_| Error::Format(format!("bad {} `{}`", what, s)))
        };

        let format = num(header(next("format")?, "format")?, "format")?;
        if format != MODEL_FORMAT as u64 {
            return Err(bad(format!(
                "unsupported model format {} (expected {})",
                format, MODEL_FORMAT
            )));
        }
        let templates = header(next("templates")?, "templates")?;
        if templates != FEATURE_TEMPLATES {
            return Err(bad(format!(
                "model uses feature templates `{}`, this build uses `{}`",
                templates, FEATURE_TEMPLATES
            )));
        }
        let updates = num(header(next("updates")?, "updates")?, "updates")?;
        let seed = num(header(next("seed")?, "seed")?, "seed")?;
        let stage_count = num(header(next("stages")?, "stages")?, "stage count")?;
        let mut stages = Vec::new();
        for _ in 0..stage_count {
            let line = next("stage line")?;
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(bad(format!("bad stage line `{}`", line)));
            }
            stages.push(StageMeta {
                epochs: num(cols[0].into(), "epochs")? as usize,
                trees: num(cols[1].into(), "tree count")? as usize,
                skipped_nonprojective: num(cols[2].into(), "skip count")? as usize,
                fingerprint: cols[3].to_owned(),
            });
        }
        let label_count = num(header(next("labels")?, "labels")?, "label count")? as usize;
        let mut labels = Vec::with_capacity(label_count);
        let mut root_ok = Vec::with_capacity(label_count);
        let mut inner_ok = Vec::with_capacity(label_count);
        for _ in 0..label_count {
            let line = next("label line")?;
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(bad(format!("bad label line `{}`", line)));
            }
            labels.push(cols[0].to_owned());
            root_ok.push(cols[1] == "1");
            inner_ok.push(cols[2] == "1");
        }
        let transitions = 1 + 2 * label_count as u64;
        let weight_count = num(header(next("weights")?, "weights")?, "weight count")?;
        let mut weights: HashMap<String, SparseRow> = HashMap::new();
        let mut averaged: HashMap<String, SparseRow> = HashMap::new();
        for _ in 0..weight_count {
            let line = next("weight line")?;
            let mut cols = line.splitn(4, '\t');
            let (Some(t), Some(rw), Some(aw), Some(feat)) =
                (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(bad(format!("bad weight line `{}`", line)));
            };
            let t = num(t.into(), "transition id")?;
            if t >= transitions {
                return Err(bad(format!("transition id {} out of range", t)));
            }
            let parse_f = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Format(format!("bad weight `{}`", s)))
            };
            let (rw, aw) = (parse_f(rw)?, parse_f(aw)?);
            weights
                .entry(feat.to_owned())
                .or_default()
                .push((t as u32, rw));
            averaged
                .entry(feat.to_owned())
                .or_default()
                .push((t as u32, aw));
        }
        if next("end marker")? != "end" {
            return Err(bad("missing end marker".into()));
        }
        Ok(ParserModel {
            labels,
            root_ok,
            inner_ok,
            weights,
            averaged,
            updates,
            meta: TrainingMeta { seed, stages },
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        buf
    }
}

fn apply(config: &mut Configuration<usize>, t: Transition) {
    match t {
        Transition::Shift => config.shift(),
        Transition::LeftArc(l) => config.left_arc(l),
        Transition::RightArc(l) => config.right_arc(l),
    }
}

struct Sentence {
    words: Vec<String>,
    tags: Vec<String>,
}

impl Sentence {
    fn new(forms: &[&str], upos: &[&str]) -> Self {
        let mut words = vec![ROOT.to_owned()];
        words.extend(forms.iter().map(|f| f.to_lowercase()));
        let mut tags = vec![ROOT.to_owned()];
        tags.extend(upos.iter().map(|p| p.to_string()));
        Sentence { words, tags }
    }

    fn word(&self, i: Option<usize>) -> &str {
        i.map_or(NONE, |i| &self.words[i])
    }

    fn tag(&self, i: Option<usize>) -> &str {
        i.map_or(NONE, |i| &self.tags[i])
    }
}

fn distance_bucket(s0: Option<usize>, s1: Option<usize>) -> &'static str {
    match (s0, s1) {
        (Some(a), Some(b)) => match a.abs_diff(b) {
            0 => "0",
            1 => "1",
            2 => "2",
            3 => "3",
            4 => "4",
            5..=9 => "5-9",
            _ => "10+",
        },
        _ => NONE,
    }
}

/// Reusable buffer of feature strings for one configuration.
#[derive(Default)]
struct FeatureBuffer {
    values: Vec<String>,
}

impl FeatureBuffer {
    fn fill(&mut self, sent: &Sentence, config: &Configuration<usize>, labels: &[String]) {
        let s0 = config.s(0);
        let s1 = config.s(1);
        let s2 = config.s(2);
        let b0 = config.b(0);
        let b1 = config.b(1);
        let child_label = |node: Option<usize>, left: bool| -> &str {
            let child = node.and_then(|n| {
                if left {
                    config.leftmost[n]
                } else {
                    config.rightmost[n]
                }
            });
            child
                .and_then(|c| config.labels[c])
                .map_or(NONE, |l| labels[l].as_str())
        };

        let (s0w, s0p) = (sent.word(s0), sent.tag(s0));
        let (s1w, s1p) = (sent.word(s1), sent.tag(s1));
        let (b0w, b0p) = (sent.word(b0), sent.tag(b0));
        let (b1w, b1p) = (sent.word(b1), sent.tag(b1));
        let s2p = sent.tag(s2);
        let (s0lc, s0rc) = (child_label(s0, true), child_label(s0, false));
        let (s1lc, s1rc) = (child_label(s1, true), child_label(s1, false));
        let d = distance_bucket(s0, s1);

        let parts: [(&str, &[&str]); 39] = [
            ("bias", &[]),
            ("s0w", &[s0w]),
            ("s0p", &[s0p]),
            ("s0wp", &[s0w, s0p]),
            ("s1w", &[s1w]),
            ("s1p", &[s1p]),
            ("s1wp", &[s1w, s1p]),
            ("b0w", &[b0w]),
            ("b0p", &[b0p]),
            ("b0wp", &[b0w, b0p]),
            ("b1w", &[b1w]),
            ("b1p", &[b1p]),
            ("s2p", &[s2p]),
            ("s0w_s1w", &[s0w, s1w]),
            ("s0p_s1p", &[s0p, s1p]),
            ("s0w_s1p", &[s0w, s1p]),
            ("s0p_s1w", &[s0p, s1w]),
            ("s0wp_s1p", &[s0w, s0p, s1p]),
            ("s0p_s1wp", &[s0p, s1w, s1p]),
            ("s0p_b0p", &[s0p, b0p]),
            ("s0w_b0w", &[s0w, b0w]),
            ("s1p_s0p_b0p", &[s1p, s0p, b0p]),
            ("s0p_b0p_b1p", &[s0p, b0p, b1p]),
            ("s2p_s1p_s0p", &[s2p, s1p, s0p]),
            ("s0lc", &[s0lc]),
            ("s0rc", &[s0rc]),
            ("s1lc", &[s1lc]),
            ("s1rc", &[s1rc]),
            ("s0p_s0lc", &[s0p, s0lc]),
            ("s0p_s0rc", &[s0p, s0rc]),
            ("s1p_s1lc", &[s1p, s1lc]),
            ("s1p_s1rc", &[s1p, s1rc]),
            ("s1p_s0p_s0lc", &[s1p, s0p, s0lc]),
            ("s1p_s0p_s1rc", &[s1p, s0p, s1rc]),
            ("d", &[d]),
            ("d_s0p_s1p", &[d, s0p, s1p]),
            ("d_s0w_s1w", &[d, s0w, s1w]),
            ("b0p_b1w", &[b0p, b1w]),
            ("b0w_b1p", &[b0w, b1p]),
        ];
        if self.values.len() != parts.len() {
            self.values = vec![String::new(); parts.len()];
        }
        for (slot, (name, vals)) in self.values.iter_mut().zip(parts.iter()) {
            slot.clear();
            slot.push_str(name);
            slot.push('=');
            for (i, v) in vals.iter().enumerate() {
                if i > 0 {
                    slot.push('|');
                }
                slot.push_str(v);
            }
        }
    }
}

/// One training stage: trees to iterate over and the number of epochs.
#[derive(Clone, Debug)]
pub struct Stage<'a> {
    pub trees: Vec<&'a DepTree>,
    pub epochs: usize,
}

impl<'a> Stage<'a> {
    pub fn new(tb: &'a Treebank, epochs: usize) -> Self {
        Stage {
            trees: tb.trees.iter().collect(),
            epochs,
        }
    }
}

/// How gold and silver data are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Gold only.
    Gold,
    /// Silver only.
    Silver,
    /// One stage over the concatenation of gold and silver.
    Concat,
    /// Gold first, then continue on silver.
    Finetune,
}

impl Regime {
    pub fn stages<'a>(
        self,
        gold: &'a Treebank,
        silver: &'a Treebank,
        epochs: usize,
    ) -> Vec<Stage<'a>> {
        match self {
            Regime::Gold => vec![Stage::new(gold, epochs)],
            Regime::Silver => vec![Stage::new(silver, epochs)],
            Regime::Concat => vec![Stage {
                trees: gold.trees.iter().chain(silver.trees.iter()).collect(),
                epochs,
            }],
            Regime::Finetune => vec![Stage::new(gold, epochs), Stage::new(silver, epochs)],
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Param {
    w: f64,
    total: f64,
    stamp: u64,
}

struct Trainer {
    labels: Vec<String>,
    root_ok: Vec<bool>,
    inner_ok: Vec<bool>,
    params: HashMap<String, Vec<(u32, Param)>>,
    clock: u64,
}

impl Trainer {
    fn from_model(model: &ParserModel) -> Self {
        let params = model
            .weights
            .iter()
            .map(|(f, row)| {
                let avg = model.averaged.get(f);
                let entries = row
                    .iter()
                    .map(|&(t, w)| {
                        let a = avg
                            .and_then(|r| r.iter().find(|e| e.0 == t))
                            .map_or(0.0, |e| e.1);
                        (
                            t,
                            Param {
                                w,
                                total: a * model.updates as f64,
                                stamp: model.updates,
                            },
                        )
                    })
                    .collect();
                (f.clone(), entries)
            })
            .collect();
        Trainer {
            labels: model.labels.clone(),
            root_ok: model.root_ok.clone(),
            inner_ok: model.inner_ok.clone(),
            params,
            clock: model.updates,
        }
    }

    fn label_id(&mut self, label: &str, to_root: bool) -> usize {
        let id = match self.labels.iter().position(|l| l == label) {
            Some(i) => i,
            None => {
                self.labels.push(label.to_owned());
                self.root_ok.push(false);
                self.inner_ok.push(false);
                self.labels.len() - 1
            }
        };
        if to_root {
            self.root_ok[id] = true;
        } else {
            self.inner_ok[id] = true;
        }
        id
    }

    fn as_model_view(&self) -> ParserModel {
        // Raw weights only; used for prediction during training.
        ParserModel {
            labels: self.labels.clone(),
            root_ok: self.root_ok.clone(),
            inner_ok: self.inner_ok.clone(),
            weights: HashMap::new(),
            averaged: HashMap::new(),
            updates: self.clock,
            meta: TrainingMeta::default(),
        }
    }

    fn predict(
        &self,
        view: &ParserModel,
        features: &[String],
        config: &Configuration<usize>,
        scores: &mut [f64],
    ) -> Transition {
        scores.iter_mut().for_each(|s| *s = 0.0);
        for f in features {
            if let Some(row) = self.params.get(f) {
                for (t, p) in row {
                    scores[*t as usize] += p.w;
                }
            }
        }
        let mut best: Option<(f64, Transition)> = None;
        for (id, &s) in scores.iter().enumerate() {
            let t = Transition::from_id(id);
            if view.legal(config, t) && best.is_none_or(|(bs, _)| s > bs) {
                best = Some((s, t));
            }
        }
        best.expect("legal transition exists").1
    }

    fn bump(&mut self, feature: &str, t: u32, delta: f64) {
        let clock = self.clock;
        let row = match self.params.get_mut(feature) {
            Some(r) => r,
            None => self.params.entry(feature.to_owned()).or_default(),
        };
        let entry = match row.iter().position(|e| e.0 == t) {
            Some(i) => &mut row[i].1,
            None => {
                row.push((
                    t,
                    Param {
                        stamp: clock,
                        ..Param::default()
                    },
                ));
                &mut row.last_mut().unwrap().1
            }
        };
        entry.total += (clock - entry.stamp) as f64 * entry.w;
        entry.stamp = clock;
        entry.w += delta;
    }

    fn finish(self, meta: TrainingMeta) -> ParserModel {
        let clock = self.clock.max(1);
        let mut weights = HashMap::with_capacity(self.params.len());
        let mut averaged = HashMap::with_capacity(self.params.len());
        for (f, row) in self.params {
            let raw: SparseRow = row.iter().map(|(t, p)| (*t, p.w)).collect();
            let avg: SparseRow = row
                .iter()
                .map(|(t, p)| {
                    let total = p.total + (clock - p.stamp) as f64 * p.w;
                    (*t, total / clock as f64)
                })
                .collect();
            weights.insert(f.clone(), raw);
            averaged.insert(f, avg);
        }
        ParserModel {
            labels: self.labels,
            root_ok: self.root_ok,
            inner_ok: self.inner_ok,
            weights,
            averaged,
            updates: self.clock,
            meta,
        }
    }
}

fn fingerprint(trees: &[&DepTree]) -> String {
    let mut hasher = Sha256::new();
    let mut line = String::new();
    for t in trees {
        for tok in t.tokens() {
            line.clear();
            let _ = writeln!(
                line,
                "{}\t{}\t{}\t{}\t{}",
                tok.id, tok.form, tok.upos, tok.head, tok.deprel
            );
            hasher.update(line.as_bytes());
        }
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

/// Train a fresh model over the stages in order.
pub fn train(stages: &[Stage<'_>], seed: u64) -> Result<ParserModel> {
    let empty = ParserModel {
        labels: Vec::new(),
        root_ok: Vec::new(),
        inner_ok: Vec::new(),
        weights: HashMap::new(),
        averaged: HashMap::new(),
        updates: 0,
        meta: TrainingMeta {
            seed,
            stages: Vec::new(),
        },
    };
    continue_training(&empty, stages, seed)
}

/// Continue training from `model` (the averaged-perceptron state is
/// restored from its raw and averaged weights). Stage metadata is appended.
pub fn continue_training(
    model: &ParserModel,
    stages: &[Stage<'_>],
    seed: u64,
) -> Result<ParserModel> {
    if stages.is_empty() {
        return Err(Error::Contract("training needs at least one stage".into()));
    }
    let mut trainer = Trainer::from_model(model);
    let mut meta = model.meta.clone();
    meta.seed = seed;

    // Oracles and label ids for every stage up front, so the label table
    // is complete before the first update.
    let mut prepared: Vec<Vec<(Vec<Transition>, &DepTree)>> = Vec::new();
    for stage in stages {
        let mut usable = Vec::new();
        let mut skipped = 0;
        for &tree in &stage.trees {
            match static_oracle(tree) {
                Ok(actions) => {
                    let mut trans = Vec::with_capacity(actions.len());
                    let mut config: Configuration<String> = Configuration::new(tree.len());
                    for a in &actions {
                        let to_root = config.stack.len() == 2;
                        trans.push(match a {
                            Action::Shift => Transition::Shift,
                            Action::LeftArc(l) => Transition::LeftArc(trainer.label_id(l, false)),
                            Action::RightArc(l) => {
                                Transition::RightArc(trainer.label_id(l, to_root))
                            }
                        });
                        config.apply(a)?;
                    }
                    usable.push((trans, tree));
                }
                Err(NonProjective) => skipped += 1,
            }
        }
        let used: Vec<&DepTree> = usable.iter().map(|(_, t)| *t).collect();
        meta.stages.push(StageMeta {
            epochs: stage.epochs,
            trees: usable.len(),
            skipped_nonprojective: skipped,
            fingerprint: fingerprint(&used),
        });
        prepared.push(usable);
    }
    if prepared.iter().all(|p| p.is_empty()) {
        return Err(Error::Contract("no projective trees to train on".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let view = trainer.as_model_view();
    let mut feats = FeatureBuffer::default();
    let mut scores = vec![0.0; 1 + 2 * trainer.labels.len()];
    for (stage, data) in stages.iter().zip(&prepared) {
        let mut order: Vec<usize> = (0..data.len()).collect();
        for _ in 0..stage.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                let (gold, tree) = &data[i];
                let forms: Vec<&str> = tree.tokens().iter().map(|t| t.form.as_str()).collect();
                let upos: Vec<&str> = tree.tokens().iter().map(|t| t.upos.as_str()).collect();
                let sent = Sentence::new(&forms, &upos);
                let mut config: Configuration<usize> = Configuration::new(tree.len());
                for &g in gold {
                    feats.fill(&sent, &config, &trainer.labels);
                    let guess = trainer.predict(&view, &feats.values, &config, &mut scores);
                    trainer.clock += 1;
                    if guess != g {
                        for f in &feats.values {
                            trainer.bump(f, g.id() as u32, 1.0);
                            trainer.bump(f, guess.id() as u32, -1.0);
                        }
                    }
                    apply(&mut config, g);
                }
            }
        }
    }
    Ok(trainer.finish(meta))
}

/// Split off a seeded random sample of `dev_size` trees. Both parts keep
/// the original relative order.
pub fn holdout_split(tb: &Treebank, dev_size: usize, seed: u64) -> (Treebank, Treebank) {
    let mut idx: Vec<usize> = (0..tb.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let mut is_dev = vec![false; tb.len()];
    for &i in idx.iter().take(dev_size) {
        is_dev[i] = true;
    }
    let (mut train, mut dev) = (Vec::new(), Vec::new());
    for (t, d) in tb.trees.iter().zip(is_dev) {
        if d {
            dev.push(t.clone());
        } else {
            train.push(t.clone());
        }
    }
    (
        Treebank::new(format!("{}-train", tb.source_name), train),
        Treebank::new(format!("{}-dev", tb.source_name), dev),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(forms: &[&str], upos: &[&str], heads: &[usize], rels: &[&str]) -> DepTree {
        DepTree::from_columns(forms, upos, heads, rels).unwrap()
    }

    #[test]
    fn two_token_oracle() {
        let t = tree(
            &["dogs", "bark"],
            &["NOUN", "VERB"],
            &[2, 0],
            &["nsubj", "root"],
        );
        let actions = static_oracle(&t).unwrap();
        let shown: Vec<String> = actions.iter().map(|a| a.to_string()).collect();
        assert_eq!(
            shown,
            vec!["SHIFT", "SHIFT", "LEFT-ARC(nsubj)", "RIGHT-ARC(root)"]
        );
    }

    #[test]
    fn crossing_arcs_are_nonprojective() {
        // 1 -> 3 and 2 -> 4 cross
        let t = tree(
            &["a", "b", "c", "d"],
            &["X"; 4],
            &[0, 1, 1, 2],
            &["root", "x", "y", "z"],
        );
        assert!(!t.is_projective());
        assert_eq!(static_oracle(&t), Err(NonProjective));
    }

    #[test]
    fn replay_rejects_illegal() {
        assert!(replay(1, &[Action::LeftArc("x".into())]).is_err());
        assert!(replay(2, &[Action::Shift]).is_err());
    }

    #[test]
    fn single_token_parse_is_root() {
        let t = tree(&["Hello"], &["INTJ"], &[0], &["root"]);
        let m = train(
            &[Stage {
                trees: vec![&t],
                epochs: 1,
            }],
            1,
        )
        .unwrap();
        let p = m.parse_tokens(&["Bye"], &["NOUN"]).unwrap();
        assert_eq!(p.heads(), vec![0]);
        assert_eq!(p.deprels(), vec!["root"]);
    }

    #[test]
    fn empty_training_set_is_error() {
        assert!(train(&[], 0).is_err());
        let t = tree(
            &["a", "b", "c", "d"],
            &["X"; 4],
            &[0, 1, 1, 2],
            &["root", "x", "y", "z"],
        );
        let r = train(
            &[Stage {
                trees: vec![&t],
                epochs: 1,
            }],
            0,
        );
        assert!(matches!(r, Err(Error::Contract(_))));
    }

    #[test]
    fn model_text_round_trip_and_errors() {
        let t = tree(
            &["dogs", "bark"],
            &["NOUN", "VERB"],
            &[2, 0],
            &["nsubj", "root"],
        );
        let m = train(
            &[Stage {
                trees: vec![&t],
                epochs: 2,
            }],
            3,
        )
        .unwrap();
        let bytes = m.to_bytes();
        let back = ParserModel::read_from(bytes.as_slice()).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        assert_eq!(back.labels(), m.labels());

        let text = String::from_utf8(bytes).unwrap();
        let wrong = text.replace(FEATURE_TEMPLATES, "arcstd-v0");
        match ParserModel::read_from(wrong.as_bytes()) {
            Err(Error::Format(m)) => assert!(m.contains("arcstd-v0")),
            other => panic!("{:?}", other.map(|_| ())),
        }
        let truncated = &text[..text.len() / 2];
        assert!(matches!(
            ParserModel::read_from(truncated.as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            ParserModel::read_from("nonsense\n".as_bytes()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn holdout_is_seeded_and_disjoint() {
        let trees: Vec<DepTree> = (0..20)
            .map(|i| tree(&[&format!("w{}", i)], &["X"], &[0], &["root"]))
            .collect();
        let tb = Treebank::new("s", trees);
        let (a, b) = holdout_split(&tb, 5, 7);
        let (c, d) = holdout_split(&tb, 5, 7);
        assert_eq!((a.len(), b.len()), (15, 5));
        assert_eq!(a, c);
        assert_eq!(b, d);
    }
}
