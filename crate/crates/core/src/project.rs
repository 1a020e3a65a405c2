//! Projection of a lead sentence's tree onto a headline that is a
//! subsequence of it.
//!
//! The sentence tree is first restricted to the headline tokens and every
//! ancestor of one. Ancestors that are not headline tokens are then removed
//! one at a time: the removed node's leftmost remaining child takes its
//! place (same head, same incoming label) and adopts its siblings.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::align::{align_subsequence, Alignment};
use crate::conllu::{DepTree, Token, Treebank};
use crate::error::{Error, Result};

/// Nodes and arcs of the restricted sentence tree. Node 0 is the virtual
/// root; arcs are `(head, dependent)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subtree {
    pub nodes: BTreeSet<usize>,
    pub edges: BTreeSet<(usize, usize)>,
}

/// Union of the root paths of `headline_nodes`, and every sentence arc with
/// both ends in that union.
pub fn extract_subtree(sentence: &DepTree, headline_nodes: &BTreeSet<usize>) -> Result<Subtree> {
    let n = sentence.len();
    if headline_nodes.is_empty() {
        return Err(Error::Contract("no headline nodes given".into()));
    }
    if let Some(&bad) = headline_nodes.iter().find(|&&i| i == 0 || i > n) {
        return Err(Error::Contract(format!(
            "headline node {} outside sentence of length {}",
            bad, n
        )));
    }
    let mut nodes = BTreeSet::new();
    nodes.insert(0);
    for &start in headline_nodes {
        let mut cur = start;
        while cur != 0 && nodes.insert(cur) {
            cur = sentence.token(cur).head;
        }
    }
    let edges = nodes
        .iter()
        .filter(|&&d| d != 0)
        .map(|&d| (sentence.token(d).head, d))
        .filter(|(h, _)| nodes.contains(h))
        .collect();
    Ok(Subtree { nodes, edges })
}

/// Which non-headline node is removed next.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CollapseOrder {
    /// Stack-based depth-first search from the virtual root: children are
    /// pushed in ascending order and popped last-in-first-out, so the
    /// rightmost branch is explored first.
    #[default]
    DepthFirst,
    /// Smallest depth, then smallest token id.
    ClosestToRoot,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionResult {
    /// Tree over the headline tokens, renumbered 1..=|headline|.
    pub tree: DepTree,
    pub collapsed_count: usize,
    /// Sentence token ids that took over a removed node's attachment.
    pub promoted_ids: Vec<usize>,
}

/// Heads and labels over sentence ids after the collapse loop.
struct Collapsed {
    heads: Vec<usize>,
    rels: Vec<String>,
    collapsed: usize,
    promoted: Vec<usize>,
}

fn children_of(heads: &[usize], included: &[bool]) -> Vec<Vec<usize>> {
    let mut children = vec![Vec::new(); heads.len()];
    for (i, &inc) in included.iter().enumerate().skip(1) {
        if inc {
            children[heads[i]].push(i);
        }
    }
    children
}

fn next_to_collapse(children: &[Vec<usize>], keep: &[bool], order: CollapseOrder) -> Option<usize> {
    match order {
        CollapseOrder::DepthFirst => {
            let mut stack = vec![0];
            while let Some(cur) = stack.pop() {
                if cur != 0 && !keep[cur] {
                    return Some(cur);
                }
                stack.extend(&children[cur]);
            }
            None
        }
        CollapseOrder::ClosestToRoot => {
            let mut best: Option<(usize, usize)> = None;
            let mut level = vec![0];
            let mut depth = 0;
            while !level.is_empty() && best.is_none() {
                best = level
                    .iter()
                    .filter(|&&c| c != 0 && !keep[c])
                    .map(|&c| (depth, c))
                    .min();
                level = level
                    .iter()
                    .flat_map(|&c| children[c].iter().copied())
                    .collect();
                depth += 1;
            }
            best.map(|(_, c)| c)
        }
    }
}

fn collapse(sentence: &DepTree, keep_ids: &[usize], order: CollapseOrder) -> Result<Collapsed> {
    let n = sentence.len();
    let mut heads = vec![0; n + 1];
    let mut rels = vec![String::new(); n + 1];
    for t in sentence.tokens() {
        heads[t.id] = t.head;
        rels[t.id] = t.deprel.clone();
    }
    let mut keep = vec![false; n + 1];
    keep[0] = true;
    for &k in keep_ids {
        keep[k] = true;
    }

    let subtree = extract_subtree(sentence, &keep_ids.iter().copied().collect())?;
    let mut included = vec![false; n + 1];
    for &node in &subtree.nodes {
        included[node] = true;
    }
    let mut remaining = subtree.nodes.len();

    let mut collapsed = 0;
    let mut promoted = Vec::new();
    while remaining > keep_ids.len() + 1 {
        let children = children_of(&heads, &included);
        let node = next_to_collapse(&children, &keep, order)
            .expect("an extra node remains while the count exceeds the headline");
        // Extra nodes lie on a root path of some headline node, so at least
        // one child is still included.
        let kids = &children[node];
        assert!(
            !kids.is_empty(),
            "node {} selected for collapse has no remaining children",
            node
        );
        let leftmost = kids[0];
        for &c in &kids[1..] {
            heads[c] = leftmost;
        }
        heads[leftmost] = heads[node];
        rels[leftmost] = rels[node].clone();
        included[node] = false;
        remaining -= 1;
        collapsed += 1;
        if !promoted.contains(&leftmost) {
            promoted.push(leftmost);
        }
    }

    Ok(Collapsed {
        heads,
        rels,
        collapsed,
        promoted,
    })
}

/// Project `sentence` onto the aligned headline tokens.
pub fn project_tree(sentence: &DepTree, alignment: &Alignment) -> Result<ProjectionResult> {
    project_tree_with(sentence, alignment, CollapseOrder::DepthFirst)
}

pub fn project_tree_with(
    sentence: &DepTree,
    alignment: &Alignment,
    order: CollapseOrder,
) -> Result<ProjectionResult> {
    if !sentence.is_validated() {
        return Err(Error::Contract("sentence tree is not validated".into()));
    }
    let keep_ids = alignment.sentence_indices();
    if let Some(&bad) = keep_ids.iter().find(|&&i| i == 0 || i > sentence.len()) {
        return Err(Error::Contract(format!(
            "alignment index {} out of range for sentence of length {}",
            bad,
            sentence.len()
        )));
    }

    let result = collapse(sentence, &keep_ids, order)?;

    let mut new_id = vec![0; sentence.len() + 1];
    for (i, &s) in keep_ids.iter().enumerate() {
        new_id[s] = i + 1;
    }
    let tokens: Vec<Token> = keep_ids
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let src = sentence.token(s);
            Token {
                id: i + 1,
                form: src.form.clone(),
                lemma: src.lemma.clone(),
                upos: src.upos.clone(),
                xpos: src.xpos.clone(),
                feats: src.feats.clone(),
                head: new_id[result.heads[s]],
                deprel: result.rels[s].clone(),
                deps: None,
                misc: None,
            }
        })
        .collect();

    let text = tokens
        .iter()
        .map(|t| t.form.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    let mut tree = DepTree::new(tokens, Vec::new());
    if let Some(id) = sentence.sent_id() {
        tree = tree.with_sent_id(id);
    }
    let tree = tree.with_text(&text).check()?;

    Ok(ProjectionResult {
        tree,
        collapsed_count: result.collapsed,
        promoted_ids: result.promoted,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairStatus {
    Projected,
    NoAlignment,
    Failed,
}

/// Per-pair record of a silver corpus run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairOutcome {
    /// 0-based position in the input.
    pub index: usize,
    pub sent_id: Option<String>,
    pub status: PairStatus,
    pub headline_len: usize,
    pub collapsed: usize,
    pub promoted: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SilverReport {
    pub kept: usize,
    pub dropped: usize,
    pub failed: usize,
    pub total_collapsed: usize,
    pub trees_with_collapse: usize,
    #[serde(skip)]
    pub outcomes: Vec<PairOutcome>,
}

impl SilverReport {
    /// One JSON object per input pair.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for o in &self.outcomes {
            out.push_str(&serde_json::to_string(o)?);
            out.push('\n');
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SilverOptions {
    pub case_sensitive: bool,
    pub order: CollapseOrder,
}

/// Align and project every pair. Pairs that do not satisfy the subsequence
/// constraint, or fail to project, are recorded in the report and skipped.
/// Output order follows input order.
pub fn build_silver_corpus<H>(
    pairs: &[(Vec<H>, DepTree)],
    options: SilverOptions,
) -> (Treebank, SilverReport)
where
    H: AsRef<str> + Sync,
{
    let results: Vec<(PairOutcome, Option<DepTree>)> = pairs
        .par_iter()
        .enumerate()
        .map(|(index, (headline, sentence))| {
            let mut outcome = PairOutcome {
                index,
                sent_id: sentence.sent_id().map(str::to_owned),
                status: PairStatus::NoAlignment,
                headline_len: headline.len(),
                collapsed: 0,
                promoted: Vec::new(),
                message: None,
            };
            let Some(alignment) =
                align_subsequence(headline, &sentence.forms(), options.case_sensitive)
            else {
                return (outcome, None);
            };
            match project_tree_with(sentence, &alignment, options.order) {
                Ok(res) => {
                    outcome.status = PairStatus::Projected;
                    outcome.collapsed = res.collapsed_count;
                    outcome.promoted = res.promoted_ids;
                    let tree = if sentence.sent_id().is_some() {
                        res.tree
                    } else {
                        res.tree.with_sent_id(&format!("pair-{}", index + 1))
                    };
                    (outcome, Some(tree))
                }
                Err(e) => {
                    outcome.status = PairStatus::Failed;
                    outcome.message = Some(e.to_string());
                    (outcome, None)
                }
            }
        })
        .collect();

    let mut report = SilverReport::default();
    let mut trees = Vec::new();
    for (outcome, tree) in results {
        match outcome.status {
            PairStatus::Projected => report.kept += 1,
            PairStatus::NoAlignment => report.dropped += 1,
            PairStatus::Failed => report.failed += 1,
        }
        report.total_collapsed += outcome.collapsed;
        if outcome.collapsed > 0 {
            report.trees_with_collapse += 1;
        }
        report.outcomes.push(outcome);
        trees.extend(tree);
    }
    (Treebank::new("silver", trees), report)
}
