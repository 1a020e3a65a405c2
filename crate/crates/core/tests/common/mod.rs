//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's algorithms; only `DepTree` is used as a carrier.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use headtree::DepTree;
use rand::seq::SliceRandom;
use rand::Rng;

pub const LABELS: [&str; 8] = [
    "nsubj",
    "obj",
    "obl",
    "amod",
    "compound",
    "flat",
    "nsubj:pass",
    "advmod",
];

/// Uniform random labeled tree on `n` nodes (1-based) via Prüfer decoding,
/// as undirected edges.
fn prufer_edges<R: Rng>(rng: &mut R, n: usize) -> Vec<(usize, usize)> {
    if n == 1 {
        return Vec::new();
    }
    if n == 2 {
        return vec![(1, 2)];
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(1..=n)).collect();
    let mut degree = vec![1usize; n + 1];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let leaf = (1..=n).find(|&i| degree[i] == 1).unwrap();
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (1..=n).filter(|&i| degree[i] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Uniformly random single-root dependency tree heads over `n` tokens
/// (0 = virtual root).
pub fn random_heads<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let edges = prufer_edges(rng, n);
    let root = rng.gen_range(1..=n);
    let mut adj = vec![Vec::new(); n + 1];
    for (a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut heads = vec![usize::MAX; n + 1];
    heads[root] = 0;
    let mut stack = vec![root];
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if heads[v] == usize::MAX {
                heads[v] = u;
                stack.push(v);
            }
        }
    }
    heads[1..].to_vec()
}

pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> DepTree {
    let heads = random_heads(rng, n);
    let rels: Vec<&str> = heads
        .iter()
        .map(|&h| {
            if h == 0 {
                "root"
            } else {
                *LABELS.choose(rng).unwrap()
            }
        })
        .collect();
    let forms: Vec<String> = (1..=n).map(|i| format!("w{}", i)).collect();
    let upos: Vec<&str> = (0..n)
        .map(|_| *["NOUN", "VERB", "ADP", "PROPN"].choose(rng).unwrap())
        .collect();
    DepTree::from_columns(&forms, &upos, &heads, &rels).unwrap()
}

/// Line-by-line port of the reference projection routine. Node 0 is the
/// virtual root with head -1 and must be the first element of `subset`.
/// The routine starts its search from a sentinel `-1` and reads
/// `children[-1]`; here the sentinel's children are taken to be `[0]`
/// (the virtual root) rather than the children of the last token.
pub fn reference_project(
    heads_in: &[i64],
    rels_in: &[String],
    subset: &[usize],
) -> (Vec<i64>, Vec<String>) {
    let mut heads = heads_in.to_vec();
    let mut rels = rels_in.to_vec();

    let mut included: BTreeSet<usize> = BTreeSet::new();
    for &i in subset {
        let mut cur = i as i64;
        while cur != -1 {
            included.insert(cur as usize);
            cur = heads[cur as usize];
        }
    }

    let cache = |heads: &[i64], included: &BTreeSet<usize>| {
        let mut children = vec![Vec::new(); heads.len()];
        for &i in included {
            if heads[i] != -1 {
                children[heads[i] as usize].push(i);
            }
        }
        children
    };
    let mut children = cache(&heads, &included);

    while included.len() != subset.len() {
        let mut queue: Vec<i64> = vec![-1];
        let mut node_to_collapse = None;
        while let Some(cur) = queue.pop() {
            if cur != -1 && !subset.contains(&(cur as usize)) {
                node_to_collapse = Some(cur as usize);
                break;
            }
            if cur == -1 {
                queue.push(0);
            } else {
                queue.extend(children[cur as usize].iter().map(|&c| c as i64));
            }
        }
        let node = node_to_collapse.expect("an extra node is reachable");

        let children_nodes = children[node].clone();
        let leftmost = children_nodes[0];
        for &c in &children_nodes {
            heads[c] = leftmost as i64;
        }
        heads[leftmost] = heads[node];
        rels[leftmost] = rels[node].clone();
        included.remove(&node);

        children = cache(&heads, &included);
    }

    let mapping: HashMap<i64, i64> = subset
        .iter()
        .enumerate()
        .map(|(i, &n)| (n as i64, i as i64))
        .collect();
    let subset_heads = subset
        .iter()
        .map(|&x| *mapping.get(&heads[x]).unwrap_or(&-1))
        .collect();
    let subset_rels = subset.iter().map(|&x| rels[x].clone()).collect();
    (subset_heads, subset_rels)
}

/// Run the reference on a tree and a sorted list of kept token ids and
/// return heads/labels for the kept tokens (1-based heads, 0 = root).
pub fn reference_on_tree(tree: &DepTree, kept: &[usize]) -> (Vec<usize>, Vec<String>) {
    let mut heads = vec![-1i64];
    heads.extend(tree.heads().iter().map(|&h| h as i64));
    let mut rels = vec![String::new()];
    rels.extend(tree.deprels().iter().map(|s| s.to_string()));
    let mut subset = vec![0];
    subset.extend_from_slice(kept);
    let (h, r) = reference_project(&heads, &rels, &subset);
    (
        h[1..].iter().map(|&x| x as usize).collect(),
        r[1..].to_vec(),
    )
}

/// True when `heads` (1-based, 0 = root) has exactly one root and every
/// token reaches it.
pub fn is_valid_tree(heads: &[usize]) -> bool {
    let n = heads.len();
    if heads.iter().filter(|&&h| h == 0).count() != 1 {
        return false;
    }
    if heads.iter().any(|&h| h > n) {
        return false;
    }
    reaches_root(heads)
}

/// Every token reaches node 0 by following heads (any number of roots).
pub fn reaches_root(heads: &[usize]) -> bool {
    let n = heads.len();
    (1..=n).all(|start| {
        let mut cur = start;
        for _ in 0..=n {
            if cur == 0 {
                return true;
            }
            cur = heads[cur - 1];
        }
        false
    })
}

/// Maximum total arc score over all arborescences rooted at 0 by
/// enumerating every head assignment.
pub fn brute_force_max<F: Fn(usize, usize) -> f64>(n: usize, arc: F, single_root: bool) -> f64 {
    let mut heads = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        let ok = heads.iter().enumerate().all(|(i, &h)| h != i + 1)
            && (!single_root || heads.iter().filter(|&&h| h == 0).count() == 1)
            && reaches_root(&heads);
        if ok {
            let s: f64 = heads.iter().enumerate().map(|(i, &h)| arc(h, i + 1)).sum();
            if s > best {
                best = s;
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            heads[k] += 1;
            if heads[k] <= n {
                break;
            }
            heads[k] = 0;
            k += 1;
        }
    }
}

/// Standard normal CDF from the Maclaurin series of erf, summed until the
/// terms vanish. Accurate for |x| up to about 6.
pub fn normal_cdf_series(x: f64) -> f64 {
    let z = x / std::f64::consts::SQRT_2;
    let mut term = z;
    let mut sum = z;
    let mut k = 0.0;
    while term.abs() > 1e-17 * sum.abs().max(1e-300) {
        k += 1.0;
        term *= -z * z / k;
        sum += term / (2.0 * k + 1.0);
        if k > 500.0 {
            break;
        }
    }
    0.5 * (1.0 + 2.0 / std::f64::consts::PI.sqrt() * sum)
}

/// Cohen's kappa from a square contingency table (rows: annotator A).
pub fn kappa_from_table(table: &[Vec<u64>]) -> f64 {
    let k = table.len();
    let total: u64 = table.iter().flatten().sum();
    let t = total as f64;
    let observed: u64 = (0..k).map(|i| table[i][i]).sum();
    let po = observed as f64 / t;
    let pe: f64 = (0..k)
        .map(|i| {
            let row: u64 = table[i].iter().sum();
            let col: u64 = table.iter().map(|r| r[i]).sum();
            (row as f64 / t) * (col as f64 / t)
        })
        .sum();
    (po - pe) / (1.0 - pe)
}

/// Lexicographically smallest embedding of `headline` into `sentence`
/// (1-based positions), by enumerating every increasing index tuple.
pub fn smallest_embedding(headline: &[String], sentence: &[String]) -> Option<Vec<usize>> {
    fn go(
        h: &[String],
        s: &[String],
        from: usize,
        acc: &mut Vec<usize>,
        best: &mut Option<Vec<usize>>,
    ) {
        if acc.len() == h.len() {
            if best.as_ref().is_none_or(|b| &*acc < b) {
                *best = Some(acc.clone());
            }
            return;
        }
        for j in from..s.len() {
            if s[j] == h[acc.len()] {
                acc.push(j + 1);
                go(h, s, j + 1, acc, best);
                acc.pop();
            }
        }
    }
    if headline.is_empty() {
        return None;
    }
    let mut best = None;
    go(headline, sentence, 0, &mut Vec::new(), &mut best);
    best
}
