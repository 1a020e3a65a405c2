//! Rule-based predicate-argument extraction from UD trees.
//!
//! A deliberately small rule set:
//!
//! * Predicate heads are tokens tagged `VERB` and tokens governing an
//!   `nsubj`, `nsubj:pass` or `csubj` dependent.
//! * The predicate phrase is the head plus its `aux`, `aux:pass`, `cop`,
//!   `mark`, `compound:prt` dependents and negating `advmod` dependents
//!   (`not`, `n't`, `never`, `no`), in surface order.
//! * Arguments are the full subtrees of dependents labeled `nsubj*`, `obj`,
//!   `iobj`, `ccomp`, `xcomp` or `obl` (subtypes included), in surface
//!   order.
//!
//! One tuple per predicate head, ordered by head position. Conjunct
//! expansion, relative-clause argument borrowing and similar refinements
//! are not attempted.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::conllu::{coarse_label, DepTree};
use crate::error::{Error, Result};

const SUBJECTS: [&str; 3] = ["nsubj", "nsubj:pass", "csubj"];
const PREDICATE_PARTS: [&str; 5] = ["aux", "aux:pass", "cop", "mark", "compound:prt"];
const ARGUMENT_RELATIONS: [&str; 6] = ["nsubj", "obj", "iobj", "ccomp", "xcomp", "obl"];
const NEGATIONS: [&str; 4] = ["not", "n't", "never", "no"];

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Argument {
    pub rel: String,
    /// Token ids of the dependent's subtree, ascending.
    pub indices: Vec<usize>,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionTuple {
    pub sent_id: Option<String>,
    /// Token ids of the predicate phrase, ascending.
    pub predicate: Vec<usize>,
    pub pred_text: String,
    pub args: Vec<Argument>,
}

fn text(tree: &DepTree, ids: &[usize]) -> String {
    ids.iter()
        .map(|&i| tree.token(i).form.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_negation(tree: &DepTree, id: usize) -> bool {
    let t = tree.token(id);
    t.deprel == "advmod" && NEGATIONS.contains(&t.form.to_lowercase().as_str())
}

pub fn extract(tree: &DepTree) -> Vec<ExtractionTuple> {
    let n = tree.len();
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for t in tree.tokens() {
        dependents[t.head].push(t.id);
    }

    let is_predicate = |id: usize| {
        tree.token(id).upos == "VERB"
            || dependents[id]
                .iter()
                .any(|&d| SUBJECTS.contains(&tree.token(d).deprel.as_str()))
    };

    (1..=n)
        .filter(|&id| is_predicate(id))
        .map(|head| {
            let mut predicate: Vec<usize> = dependents[head]
                .iter()
                .copied()
                .filter(|&d| {
                    PREDICATE_PARTS.contains(&tree.token(d).deprel.as_str()) || is_negation(tree, d)
                })
                .collect();
            predicate.push(head);
            predicate.sort_unstable();

            let args = dependents[head]
                .iter()
                .copied()
                .filter(|&d| ARGUMENT_RELATIONS.contains(&coarse_label(&tree.token(d).deprel)))
                .map(|d| {
                    let indices = tree.subtree(d);
                    Argument {
                        rel: tree.token(d).deprel.clone(),
                        text: text(tree, &indices),
                        indices,
                    }
                })
                .collect();

            ExtractionTuple {
                sent_id: tree.sent_id().map(str::to_owned),
                pred_text: text(tree, &predicate),
                predicate,
                args,
            }
        })
        .collect()
}

/// Tuple identity for comparison: predicate ids and `(rel, ids)` per
/// argument.
type NormalTuple = (Vec<usize>, Vec<(String, Vec<usize>)>);

fn normalize(tuples: &[ExtractionTuple]) -> BTreeSet<NormalTuple> {
    tuples
        .iter()
        .map(|t| {
            (
                t.predicate.clone(),
                t.args
                    .iter()
                    .map(|a| (a.rel.clone(), a.indices.clone()))
                    .collect(),
            )
        })
        .collect()
}

/// 0-based indices of sentences whose tuple sets differ.
pub fn diff_extractions(
    a: &[Vec<ExtractionTuple>],
    b: &[Vec<ExtractionTuple>],
) -> Result<Vec<usize>> {
    if a.len() != b.len() {
        return Err(Error::Contract(format!(
            "extraction lists cover {} and {} sentences",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .enumerate()
        .filter(|(_, (x, y))| normalize(x) != normalize(y))
        .map(|(i, _)| i)
        .collect())
}
