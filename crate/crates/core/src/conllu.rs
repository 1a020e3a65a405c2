//! CoNLL-U reading, writing and validation, plus the in-memory
//! dependency tree shared by every other module.
//!
//! Only word lines are modeled. Multiword-token ranges (`1-2`) and empty
//! nodes (`3.1`) are dropped on read and counted. The LEMMA, XPOS, FEATS,
//! DEPS and MISC columns are carried through untouched.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One word line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// 1-based position within the sentence.
    pub id: usize,
    pub form: String,
    pub lemma: Option<String>,
    pub upos: String,
    pub xpos: Option<String>,
    pub feats: Option<String>,
    /// Head token id, 0 for the virtual root.
    pub head: usize,
    pub deprel: String,
    pub deps: Option<String>,
    pub misc: Option<String>,
}

impl Token {
    pub fn new(
        id: usize,
        form: impl Into<String>,
        upos: impl Into<String>,
        head: usize,
        deprel: impl Into<String>,
    ) -> Self {
        Token {
            id,
            form: form.into(),
            lemma: None,
            upos: upos.into(),
            xpos: None,
            feats: None,
            head,
            deprel: deprel.into(),
            deps: None,
            misc: None,
        }
    }

    /// The relation label with any `:subtype` removed.
    pub fn coarse_deprel(&self) -> &str {
        coarse_label(&self.deprel)
    }
}

/// Truncate a relation label at its first colon (`nsubj:pass` -> `nsubj`).
pub fn coarse_label(label: &str) -> &str {
    label.split(':').next().unwrap_or(label)
}

/// A sentence: its tokens and its comment lines.
///
/// Trees built with [`DepTree::new`] are unvalidated; [`DepTree::check`]
/// runs [`validate`] and marks the tree as validated on success. Trees
/// produced by the reader, the projector, the parser and the ensembler are
/// always validated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepTree {
    tokens: Vec<Token>,
    comments: Vec<String>,
    validated: bool,
}

impl DepTree {
    /// Comments are stored verbatim, including the leading `#`.
    pub fn new(tokens: Vec<Token>, comments: Vec<String>) -> Self {
        DepTree {
            tokens,
            comments,
            validated: false,
        }
    }

    /// Build a tree from parallel columns. Heads use the CoNLL-U
    /// convention (0 = virtual root).
    pub fn from_columns<F: AsRef<str>, U: AsRef<str>, R: AsRef<str>>(
        forms: &[F],
        upos: &[U],
        heads: &[usize],
        deprels: &[R],
    ) -> Result<Self> {
        let n = forms.len();
        if upos.len() != n || heads.len() != n || deprels.len() != n {
            return Err(Error::Contract(
                "column lengths differ when building a tree".into(),
            ));
        }
        let tokens = (0..n)
            .map(|i| {
                Token::new(
                    i + 1,
                    forms[i].as_ref(),
                    upos[i].as_ref(),
                    heads[i],
                    deprels[i].as_ref(),
                )
            })
            .collect();
        DepTree::new(tokens, Vec::new()).check()
    }

    /// Validate and mark as validated.
    pub fn check(mut self) -> Result<Self> {
        let violations = validate(&self);
        if violations.is_empty() {
            self.validated = true;
            Ok(self)
        } else {
            Err(Error::Validation {
                sent_id: self.sent_id().unwrap_or("<unnamed>").to_owned(),
                violations,
            })
        }
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by 1-based id.
    pub fn token(&self, id: usize) -> &Token {
        &self.tokens[id - 1]
    }

    /// Value of a `# sent_id = ...` comment, if present.
    pub fn sent_id(&self) -> Option<&str> {
        self.comments
            .iter()
            .find_map(|c| comment_value(c, "sent_id"))
    }

    /// Set (or replace) the `# sent_id = ...` comment.
    pub fn with_sent_id(mut self, id: &str) -> Self {
        self.set_comment("sent_id", id);
        self
    }

    /// Set (or replace) the `# text = ...` comment.
    pub fn with_text(mut self, text: &str) -> Self {
        self.set_comment("text", text);
        self
    }

    fn set_comment(&mut self, key: &str, value: &str) {
        let line = format!("# {} = {}", key, value);
        match self
            .comments
            .iter()
            .position(|c| comment_value(c, key).is_some())
        {
            Some(pos) => self.comments[pos] = line,
            None => self.comments.push(line),
        }
    }

    pub fn forms(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.form.as_str()).collect()
    }

    /// Heads in token order (`heads()[i]` is the head of token `i + 1`).
    pub fn heads(&self) -> Vec<usize> {
        self.tokens.iter().map(|t| t.head).collect()
    }

    pub fn deprels(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.deprel.as_str()).collect()
    }

    /// Dependents of `head` (0 for the virtual root) in ascending order.
    pub fn dependents(&self, head: usize) -> Vec<usize> {
        self.tokens
            .iter()
            .filter(|t| t.head == head)
            .map(|t| t.id)
            .collect()
    }

    /// Ids of the token's subtree (including itself) in ascending order.
    pub fn subtree(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(cur) = stack.pop() {
            out.push(cur);
            stack.extend(self.dependents(cur));
        }
        out.sort_unstable();
        out
    }

    /// True when no two arcs cross (arcs from the virtual root included).
    pub fn is_projective(&self) -> bool {
        is_projective_heads(&self.heads())
    }

    /// Copy of this tree with new heads and labels, keeping forms, tags
    /// and comments. The result is validated.
    pub fn with_structure(&self, heads: &[usize], deprels: &[String]) -> Result<Self> {
        if heads.len() != self.len() || deprels.len() != self.len() {
            return Err(Error::Contract(
                "structure length differs from token count".into(),
            ));
        }
        let tokens = self
            .tokens
            .iter()
            .zip(heads.iter().zip(deprels))
            .map(|(t, (&h, l))| Token {
                head: h,
                deprel: l.clone(),
                ..t.clone()
            })
            .collect();
        DepTree::new(tokens, self.comments.clone()).check()
    }
}

fn comment_value<'a>(comment: &'a str, key: &str) -> Option<&'a str> {
    let body = comment.trim_start_matches('#').trim_start();
    let rest = body.strip_prefix(key)?.trim_start();
    let value = rest.strip_prefix('=')?;
    Some(value.trim())
}

/// Projectivity over a 0-rooted head vector (`heads[i]` is the head of
/// token `i + 1`).
pub fn is_projective_heads(heads: &[usize]) -> bool {
    let n = heads.len();
    for (i, &h) in heads.iter().enumerate() {
        let d = i + 1;
        let (lo, hi) = if h < d { (h, d) } else { (d, h) };
        for k in lo + 1..hi {
            // every token strictly inside the arc must descend from h
            let mut cur = k;
            let mut steps = 0;
            while cur != h && cur != 0 && steps <= n {
                cur = heads[cur - 1];
                steps += 1;
            }
            if cur != h {
                return false;
            }
        }
    }
    true
}

/// An ordered collection of trees.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Treebank {
    pub trees: Vec<DepTree>,
    pub source_name: String,
}

impl Treebank {
    pub fn new(source_name: impl Into<String>, trees: Vec<DepTree>) -> Self {
        Treebank {
            trees,
            source_name: source_name.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.trees.iter().map(DepTree::len).sum()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DepTree> {
        self.trees.iter()
    }
}

impl<'a> IntoIterator for &'a Treebank {
    type Item = &'a DepTree;
    type IntoIter = std::slice::Iter<'a, DepTree>;

    fn into_iter(self) -> Self::IntoIter {
        self.trees.iter()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Empty,
    NonConsecutiveId,
    EmptyField,
    HeadOutOfRange,
    MultipleRoots,
    Cycle,
}

impl ViolationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationKind::Empty => "empty",
            ViolationKind::NonConsecutiveId => "non-consecutive-id",
            ViolationKind::EmptyField => "empty-field",
            ViolationKind::HeadOutOfRange => "head-out-of-range",
            ViolationKind::MultipleRoots => "multiple-roots",
            ViolationKind::Cycle => "cycle",
        }
    }
}

/// A structural problem with a tree, tied to the offending token id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub token: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at token {}", self.kind.as_str(), self.token)
    }
}

/// Structural check of a tree.
///
/// Returns no violations iff ids are `1..n`, every head is in `0..=n`,
/// exactly one token attaches to the virtual root and following heads from
/// any token reaches the root. A tree without a root attachment always
/// contains a cycle and is reported as such. Each cycle is reported once,
/// at its smallest token id.
pub fn validate(tree: &DepTree) -> Vec<Violation> {
    let tokens = tree.tokens();
    let n = tokens.len();
    if n == 0 {
        return vec![Violation {
            kind: ViolationKind::Empty,
            token: 0,
        }];
    }

    let mut out = Vec::new();
    let mut indexable = true;
    for (i, t) in tokens.iter().enumerate() {
        if t.id != i + 1 {
            out.push(Violation {
                kind: ViolationKind::NonConsecutiveId,
                token: t.id,
            });
            indexable = false;
        }
        if t.form.is_empty() || t.upos.is_empty() || t.deprel.is_empty() {
            out.push(Violation {
                kind: ViolationKind::EmptyField,
                token: t.id,
            });
        }
        if t.head > n {
            out.push(Violation {
                kind: ViolationKind::HeadOutOfRange,
                token: t.id,
            });
            indexable = false;
        }
    }

    tokens.iter().filter(|t| t.head == 0).skip(1).for_each(|t| {
        out.push(Violation {
            kind: ViolationKind::MultipleRoots,
            token: t.id,
        })
    });

    if indexable {
        // 0 = unvisited, 1 = on current walk, 2 = known to reach the root
        let mut state = vec![0u8; n + 1];
        state[0] = 2;
        for start in 1..=n {
            if state[start] != 0 {
                continue;
            }
            let mut walk = Vec::new();
            let mut cur = start;
            while state[cur] == 0 {
                state[cur] = 1;
                walk.push(cur);
                cur = tokens[cur - 1].head;
            }
            if state[cur] == 1 {
                let pos = walk.iter().position(|&w| w == cur).unwrap();
                let smallest = *walk[pos..].iter().min().unwrap();
                out.push(Violation {
                    kind: ViolationKind::Cycle,
                    token: smallest,
                });
            }
            for w in walk {
                state[w] = 2;
            }
        }
    }

    out
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ReadOptions {
    /// Abort on the first malformed or invalid sentence instead of
    /// skipping it.
    pub strict: bool,
}

/// A sentence dropped by a non-strict read.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkippedSentence {
    /// Line where the sentence block starts.
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct ReadOutcome {
    pub treebank: Treebank,
    pub skipped_multiword: usize,
    pub skipped_empty_nodes: usize,
    pub skipped_sentences: Vec<SkippedSentence>,
}

impl ReadOutcome {
    /// Number of dropped range and empty-node lines.
    pub fn warning_count(&self) -> usize {
        self.skipped_multiword + self.skipped_empty_nodes
    }
}

#[derive(Default)]
struct Block {
    start_line: usize,
    comments: Vec<String>,
    tokens: Vec<Token>,
    error: Option<Error>,
}

impl Block {
    fn has_content(&self) -> bool {
        !self.comments.is_empty() || !self.tokens.is_empty() || self.error.is_some()
    }
}

fn opt_column(s: &str) -> Option<String> {
    if s == "_" {
        None
    } else {
        Some(s.to_owned())
    }
}

fn parse_token_line(line: &str, line_no: usize) -> Result<Option<Token>> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(Error::Parse {
            line: line_no,
            message: format!("expected 10 tab-separated columns, found {}", cols.len()),
        });
    }
    let id_col = cols[0];
    if id_col.contains('-') || id_col.contains('.') {
        return Ok(None);
    }
    let id = id_col.parse::<usize>().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("token id `{}` is not an integer", id_col),
    })?;
    if id == 0 {
        return Err(Error::Parse {
            line: line_no,
            message: "token id must be at least 1".into(),
        });
    }
    let head = cols[6].parse::<usize>().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("head `{}` is not an integer", cols[6]),
    })?;
    Ok(Some(Token {
        id,
        form: cols[1].to_owned(),
        lemma: opt_column(cols[2]),
        upos: cols[3].to_owned(),
        xpos: opt_column(cols[4]),
        feats: opt_column(cols[5]),
        head,
        deprel: cols[7].to_owned(),
        deps: opt_column(cols[8]),
        misc: opt_column(cols[9]),
    }))
}

/// Read a CoNLL-U stream.
///
/// In non-strict mode malformed or structurally invalid sentences are
/// skipped and listed in [`ReadOutcome::skipped_sentences`]; in strict mode
/// the first one is returned as an error.
pub fn read_conllu<R: BufRead>(
    reader: R,
    source_name: &str,
    options: ReadOptions,
) -> Result<ReadOutcome> {
    let mut outcome = ReadOutcome {
        treebank: Treebank::new(source_name, Vec::new()),
        skipped_multiword: 0,
        skipped_empty_nodes: 0,
        skipped_sentences: Vec::new(),
    };
    let mut block = Block::default();

    let finish = |block: Block, outcome: &mut ReadOutcome| -> Result<()> {
        if !block.has_content() {
            return Ok(());
        }
        let result = match block.error {
            Some(e) => Err(e),
            None => DepTree::new(block.tokens, block.comments).check(),
        };
        match result {
            Ok(tree) => outcome.treebank.trees.push(tree),
            Err(e) if options.strict => return Err(e),
            Err(e) => outcome.skipped_sentences.push(SkippedSentence {
                line: block.start_line,
                reason: e.to_string(),
            }),
        }
        Ok(())
    };

    let mut line_no = 0;
    for line in reader.lines() {
        let line = line?;
        line_no += 1;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            finish(std::mem::take(&mut block), &mut outcome)?;
            continue;
        }
        if !block.has_content() {
            block.start_line = line_no;
        }
        if line.starts_with('#') {
            block.comments.push(line.to_owned());
            continue;
        }
        if block.error.is_some() {
            continue;
        }
        match parse_token_line(line, line_no) {
            Ok(Some(token)) => block.tokens.push(token),
            Ok(None) => {
                if line.split('\t').next().unwrap_or("").contains('-') {
                    outcome.skipped_multiword += 1;
                } else {
                    outcome.skipped_empty_nodes += 1;
                }
            }
            Err(e) if options.strict => return Err(e),
            Err(e) => block.error = Some(e),
        }
    }
    finish(block, &mut outcome)?;
    Ok(outcome)
}

/// Convenience wrapper for in-memory text.
pub fn parse_str(text: &str, options: ReadOptions) -> Result<ReadOutcome> {
    read_conllu(text.as_bytes(), "<string>", options)
}

/// Read a file in strict mode.
pub fn read_file(path: impl AsRef<std::path::Path>) -> Result<Treebank> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(read_conllu(
        std::io::BufReader::new(file),
        &name,
        ReadOptions { strict: true },
    )?
    .treebank)
}

fn col(v: &Option<String>) -> &str {
    v.as_deref().unwrap_or("_")
}

/// Serialize a treebank. Every tree must be validated.
pub fn write_conllu<W: Write>(treebank: &Treebank, mut out: W) -> Result<()> {
    for (i, tree) in treebank.trees.iter().enumerate() {
        if !tree.is_validated() {
            return Err(Error::Contract(format!(
                "tree {} is not validated and cannot be written",
                i + 1
            )));
        }
        for c in tree.comments() {
            writeln!(out, "{}", c)?;
        }
        for t in tree.tokens() {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.id,
                t.form,
                col(&t.lemma),
                t.upos,
                col(&t.xpos),
                col(&t.feats),
                t.head,
                t.deprel,
                col(&t.deps),
                col(&t.misc)
            )?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn to_conllu_string(treebank: &Treebank) -> Result<String> {
    let mut buf = Vec::new();
    write_conllu(treebank, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CoNLL-U output is UTF-8"))
}

pub fn write_file(treebank: &Treebank, path: impl AsRef<std::path::Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_conllu(treebank, &mut w)?;
    w.flush()?;
    Ok(())
}
