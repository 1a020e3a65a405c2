//! Reparsing: combine several parses of the same sentence by voting on
//! arcs and extracting the maximum-weight spanning arborescence rooted at
//! the virtual root (Chu-Liu/Edmonds).

use std::collections::BTreeMap;

use crate::conllu::{DepTree, Treebank};
use crate::error::{Error, Result};

/// Arc votes for one sentence. Node 0 is the virtual root.
#[derive(Clone, Debug, PartialEq)]
pub struct VoteGraph {
    n: usize,
    voters: usize,
    /// Row-major `(n + 1) x (n + 1)`, indexed `[head][dep]`.
    weight: Vec<f64>,
    labels: BTreeMap<(usize, usize), BTreeMap<String, f64>>,
}

impl VoteGraph {
    pub fn token_count(&self) -> usize {
        self.n
    }

    pub fn voters(&self) -> usize {
        self.voters
    }

    pub fn weight(&self, head: usize, dep: usize) -> f64 {
        self.weight[head * (self.n + 1) + dep]
    }

    /// Labels proposed for an arc with their accumulated vote weight.
    pub fn labels(&self, head: usize, dep: usize) -> Option<&BTreeMap<String, f64>> {
        self.labels.get(&(head, dep))
    }

    /// Total weight of a head assignment (`heads[i]` is the head of token
    /// `i + 1`).
    pub fn score(&self, heads: &[usize]) -> f64 {
        heads
            .iter()
            .enumerate()
            .map(|(i, &h)| self.weight(h, i + 1))
            .sum()
    }

    /// Plurality label for an arc, ties to the lexicographically smallest.
    /// An arc nobody voted for takes the plurality label over all arcs
    /// into the same dependent.
    fn label_for(&self, head: usize, dep: usize) -> String {
        let pick = |m: &BTreeMap<String, f64>| -> Option<String> {
            let mut best: Option<(&String, f64)> = None;
            for (l, &w) in m {
                if best.is_none_or(|(_, bw)| w > bw) {
                    best = Some((l, w));
                }
            }
            best.map(|(l, _)| l.clone())
        };
        if let Some(l) = self.labels.get(&(head, dep)).and_then(pick) {
            return l;
        }
        let mut pooled: BTreeMap<String, f64> = BTreeMap::new();
        for ((_, d), m) in &self.labels {
            if *d == dep {
                for (l, w) in m {
                    *pooled.entry(l.clone()).or_default() += w;
                }
            }
        }
        pick(&pooled).unwrap_or_else(|| "dep".to_owned())
    }
}

/// Uniform votes: each tree contributes 1 to every arc it contains.
pub fn build_votes(trees: &[&DepTree]) -> Result<VoteGraph> {
    build_weighted_votes(trees, &vec![1.0; trees.len()])
}

/// Votes scaled by a per-voter weight.
pub fn build_weighted_votes(trees: &[&DepTree], voter_weights: &[f64]) -> Result<VoteGraph> {
    let first = trees
        .first()
        .ok_or_else(|| Error::Contract("at least one tree is needed to vote".into()))?;
    if voter_weights.len() != trees.len() {
        return Err(Error::Contract(format!(
            "{} voter weights for {} trees",
            voter_weights.len(),
            trees.len()
        )));
    }
    if voter_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Contract(
            "voter weights must be finite and >= 0".into(),
        ));
    }
    let n = first.len();
    let forms = first.forms();
    for (i, t) in trees.iter().enumerate().skip(1) {
        if t.forms() != forms {
            return Err(Error::Contract(format!(
                "voter {} has a different token sequence than voter 1",
                i + 1
            )));
        }
    }

    let mut graph = VoteGraph {
        n,
        voters: trees.len(),
        weight: vec![0.0; (n + 1) * (n + 1)],
        labels: BTreeMap::new(),
    };
    for (t, &w) in trees.iter().zip(voter_weights) {
        for tok in t.tokens() {
            graph.weight[tok.head * (n + 1) + tok.id] += w;
            *graph
                .labels
                .entry((tok.head, tok.id))
                .or_default()
                .entry(tok.deprel.clone())
                .or_default() += w;
        }
    }
    Ok(graph)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ReparseOptions {
    /// Allow only one dependent of the virtual root.
    pub force_single_root: bool,
}

/// Heads and labels chosen by reparsing.
#[derive(Clone, Debug, PartialEq)]
pub struct Reparse {
    pub heads: Vec<usize>,
    pub labels: Vec<String>,
    pub weight: f64,
}

impl Reparse {
    pub fn root_count(&self) -> usize {
        self.heads.iter().filter(|&&h| h == 0).count()
    }

    /// Apply to a template tree with the same tokens.
    pub fn apply_to(&self, template: &DepTree) -> Result<DepTree> {
        template.with_structure(&self.heads, &self.labels)
    }
}

/// Maximum-weight arborescence over the vote graph.
///
/// Ties between candidate heads prefer the smaller head index, then the
/// shorter arc.
pub fn reparse(votes: &VoteGraph, options: ReparseOptions) -> Reparse {
    let n = votes.n;
    let size = n + 1;
    let mut scores = vec![vec![f64::NEG_INFINITY; size]; size];
    for (h, row) in scores.iter_mut().enumerate() {
        for (d, cell) in row.iter_mut().enumerate().skip(1) {
            if h != d {
                *cell = votes.weight(h, d);
            }
        }
    }

    let heads = if options.force_single_root {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for root_child in 1..=n {
            let mut s = scores.clone();
            for (d, cell) in s[0].iter_mut().enumerate().skip(1) {
                if d != root_child {
                    *cell = f64::NEG_INFINITY;
                }
            }
            let parents = chu_liu_edmonds(&s);
            let heads = parents[1..].to_vec();
            let w = votes.score(&heads);
            if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
                best = Some((w, heads));
            }
        }
        best.map(|(_, h)| h).unwrap_or_default()
    } else {
        chu_liu_edmonds(&scores)[1..].to_vec()
    };

    let labels = heads
        .iter()
        .enumerate()
        .map(|(i, &h)| votes.label_for(h, i + 1))
        .collect();
    Reparse {
        weight: votes.score(&heads),
        heads,
        labels,
    }
}

fn prefer(cand: (f64, usize, usize), best: Option<(f64, usize, usize)>) -> bool {
    // (score, head, dep): higher score, then smaller head, then shorter arc
    match best {
        None => true,
        Some((bs, bh, bd)) => {
            if cand.0 != bs {
                return cand.0 > bs;
            }
            if cand.1 != bh {
                return cand.1 < bh;
            }
            cand.1.abs_diff(cand.2) < bh.abs_diff(bd)
        }
    }
}

/// Chu-Liu/Edmonds on a dense score matrix `scores[head][dep]` with node 0
/// as root. Missing arcs are `-inf`. Returns `parent[v]` for every node
/// (`parent[0]` is 0).
fn chu_liu_edmonds(scores: &[Vec<f64>]) -> Vec<usize> {
    let size = scores.len();
    let mut parent = vec![0; size];
    for (d, p) in parent.iter_mut().enumerate().skip(1) {
        let mut best: Option<(f64, usize, usize)> = None;
        for (h, row) in scores.iter().enumerate() {
            if h != d && row[d] > f64::NEG_INFINITY && prefer((row[d], h, d), best) {
                best = Some((row[d], h, d));
            }
        }
        *p = best.map_or(0, |b| b.1);
    }

    let Some(cycle) = find_cycle(&parent) else {
        return parent;
    };
    let in_cycle: Vec<bool> = (0..size).map(|v| cycle.contains(&v)).collect();

    // Contract the cycle into one node appended after the survivors.
    let survivors: Vec<usize> = (0..size).filter(|&v| !in_cycle[v]).collect();
    let mut new_index = vec![usize::MAX; size];
    for (i, &v) in survivors.iter().enumerate() {
        new_index[v] = i;
    }
    let c = survivors.len();
    let cycle_score: f64 = cycle.iter().map(|&v| scores[parent[v]][v]).sum();
    let mut contracted = vec![vec![f64::NEG_INFINITY; c + 1]; c + 1];
    // For an arc u -> cycle: which cycle node it enters.
    let mut enters = vec![usize::MAX; size];
    // For an arc cycle -> v: which cycle node it leaves from.
    let mut leaves = vec![usize::MAX; size];

    for &u in &survivors {
        for &v in &survivors {
            if u != v && v != 0 {
                contracted[new_index[u]][new_index[v]] = scores[u][v];
            }
        }
        let mut best: Option<(f64, usize)> = None;
        for &v in &cycle {
            let s = scores[u][v];
            if s == f64::NEG_INFINITY {
                continue;
            }
            let gain = s - scores[parent[v]][v];
            if best.is_none_or(|(bs, bv)| gain > bs || (gain == bs && v < bv)) {
                best = Some((gain, v));
            }
        }
        if let Some((gain, v)) = best {
            contracted[new_index[u]][c] = gain + cycle_score;
            enters[u] = v;
        }
        if u != 0 {
            let mut best: Option<(f64, usize)> = None;
            for &w in &cycle {
                let s = scores[w][u];
                if s == f64::NEG_INFINITY {
                    continue;
                }
                if best.is_none_or(|(bs, bw)| s > bs || (s == bs && w < bw)) {
                    best = Some((s, w));
                }
            }
            if let Some((s, w)) = best {
                contracted[c][new_index[u]] = s;
                leaves[u] = w;
            }
        }
    }

    let sub = chu_liu_edmonds(&contracted);

    let mut result = parent.clone();
    for &v in &survivors {
        if v == 0 {
            continue;
        }
        let p = sub[new_index[v]];
        result[v] = if p == c { leaves[v] } else { survivors[p] };
    }
    let entry_from = survivors[sub[c]];
    result[enters[entry_from]] = entry_from;
    result
}

/// Some cycle in the parent function over nodes `1..`, as a node list.
fn find_cycle(parent: &[usize]) -> Option<Vec<usize>> {
    let size = parent.len();
    let mut state = vec![0u8; size];
    state[0] = 2;
    for start in 1..size {
        if state[start] != 0 {
            continue;
        }
        let mut walk = Vec::new();
        let mut cur = start;
        while state[cur] == 0 {
            state[cur] = 1;
            walk.push(cur);
            cur = parent[cur];
        }
        if state[cur] == 1 {
            let pos = walk.iter().position(|&w| w == cur).unwrap();
            return Some(walk[pos..].to_vec());
        }
        for w in walk {
            state[w] = 2;
        }
    }
    None
}

/// Result of ensembling one sentence into a writable tree.
#[derive(Clone, Debug)]
pub struct EnsembledTree {
    pub tree: DepTree,
    pub weight: f64,
    /// The unconstrained optimum had several root dependents and the
    /// sentence was re-solved with a single root.
    pub root_constrained: bool,
}

/// Reparse one sentence into a validated tree. When the unconstrained
/// optimum attaches several tokens to the root the sentence is re-solved
/// with the single-root constraint, since a CoNLL-U tree must have one.
pub fn ensemble_tree(
    trees: &[&DepTree],
    voter_weights: Option<&[f64]>,
    options: ReparseOptions,
) -> Result<EnsembledTree> {
    let votes = match voter_weights {
        Some(w) => build_weighted_votes(trees, w)?,
        None => build_votes(trees)?,
    };
    let mut result = reparse(&votes, options);
    let mut root_constrained = false;
    if result.root_count() > 1 {
        result = reparse(
            &votes,
            ReparseOptions {
                force_single_root: true,
            },
        );
        root_constrained = true;
    }
    Ok(EnsembledTree {
        tree: result.apply_to(trees[0])?,
        weight: result.weight,
        root_constrained,
    })
}

/// Ensemble parallel treebanks sentence by sentence.
pub fn ensemble_treebanks(
    treebanks: &[Treebank],
    voter_weights: Option<&[f64]>,
    options: ReparseOptions,
) -> Result<(Treebank, usize)> {
    let first = treebanks
        .first()
        .ok_or_else(|| Error::Contract("no treebanks to ensemble".into()))?;
    if let Some(tb) = treebanks.iter().find(|tb| tb.len() != first.len()) {
        return Err(Error::Contract(format!(
            "treebank `{}` has {} sentences, expected {}",
            tb.source_name,
            tb.len(),
            first.len()
        )));
    }
    let mut trees = Vec::with_capacity(first.len());
    let mut constrained = 0;
    for i in 0..first.len() {
        let voters: Vec<&DepTree> = treebanks.iter().map(|tb| &tb.trees[i]).collect();
        let e = ensemble_tree(&voters, voter_weights, options).map_err(|e| match e {
            Error::Contract(m) => Error::Mismatch {
                sentence: i + 1,
                message: m,
            },
            other => other,
        })?;
        constrained += e.root_constrained as usize;
        trees.push(e.tree);
    }
    Ok((Treebank::new("ensemble", trees), constrained))
}
