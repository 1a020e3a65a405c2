//! Attachment and exact-match scores, per-relation precision/recall/F1,
//! relative error reduction, and the two significance statistics used to
//! compare systems (pooled two-proportion z-test, Cohen's kappa).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::conllu::{coarse_label, Treebank};
use crate::error::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default)]
pub struct ScoreOptions {
    /// Drop tokens whose gold UPOS is `PUNCT` from every count.
    pub exclude_punct: bool,
    /// Compare labels with their `:subtype` removed.
    pub coarse_labels: bool,
}

/// Scores for one relation label. Percentages are on a 0-100 scale.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RelationScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub gold_support: usize,
    pub predicted_count: usize,
    /// Tokens carrying this label in both trees with the correct head.
    pub correct: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub uas: f64,
    pub las: f64,
    pub uem: f64,
    pub lem: f64,
    pub per_relation: BTreeMap<String, RelationScore>,
    pub token_count: usize,
    pub sentence_count: usize,
    pub punct_excluded: bool,
    pub coarse_labels: bool,
}

impl EvalReport {
    /// Fixed-width text table: the four aggregates, then one line per
    /// relation.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "sentences {}  tokens {}{}",
            self.sentence_count,
            self.token_count,
            if self.punct_excluded {
                "  (punct excluded)"
            } else {
                ""
            }
        );
        let _ = writeln!(
            s,
            "UAS {:6.2}  LAS {:6.2}  UEM {:6.2}  LEM {:6.2}",
            self.uas, self.las, self.uem, self.lem
        );
        let _ = writeln!(
            s,
            "{:<16} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "relation", "prec", "recall", "f1", "gold", "pred"
        );
        for (rel, r) in &self.per_relation {
            let _ = writeln!(
                s,
                "{:<16} {:>8.2} {:>8.2} {:>8.2} {:>8} {:>8}",
                rel, r.precision, r.recall, r.f1, r.gold_support, r.predicted_count
            );
        }
        s
    }
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Score `pred` against `gold`.
///
/// Both treebanks must hold the same sentences in the same order with the
/// same token forms. A token is labeled-correct only when its head is also
/// correct. With punctuation excluded, a sentence whose tokens are all
/// punctuation counts as an exact match.
pub fn score(pred: &Treebank, gold: &Treebank, options: ScoreOptions) -> Result<EvalReport> {
    if pred.len() != gold.len() {
        return Err(Error::Mismatch {
            sentence: pred.len().min(gold.len()) + 1,
            message: format!(
                "predicted file has {} sentences, gold has {}",
                pred.len(),
                gold.len()
            ),
        });
    }

    let label = |l: &str| -> String {
        if options.coarse_labels {
            coarse_label(l).to_owned()
        } else {
            l.to_owned()
        }
    };

    let mut tokens = 0;
    let mut head_ok = 0;
    let mut both_ok = 0;
    let mut uem = 0;
    let mut lem = 0;
    let mut gold_count: BTreeMap<String, usize> = BTreeMap::new();
    let mut pred_count: BTreeMap<String, usize> = BTreeMap::new();
    let mut correct: BTreeMap<String, usize> = BTreeMap::new();

    for (i, (p, g)) in pred.iter().zip(gold.iter()).enumerate() {
        if p.len() != g.len() {
            return Err(Error::Mismatch {
                sentence: i + 1,
                message: format!("{} predicted tokens vs {} gold tokens", p.len(), g.len()),
            });
        }
        let mut sent_heads = true;
        let mut sent_labels = true;
        for (pt, gt) in p.tokens().iter().zip(g.tokens()) {
            if pt.form != gt.form {
                return Err(Error::Mismatch {
                    sentence: i + 1,
                    message: format!(
                        "token {} form `{}` differs from gold `{}`",
                        gt.id, pt.form, gt.form
                    ),
                });
            }
            if options.exclude_punct && gt.upos == "PUNCT" {
                continue;
            }
            tokens += 1;
            let gl = label(&gt.deprel);
            let pl = label(&pt.deprel);
            *gold_count.entry(gl.clone()).or_default() += 1;
            *pred_count.entry(pl.clone()).or_default() += 1;
            if pt.head == gt.head {
                head_ok += 1;
                if pl == gl {
                    both_ok += 1;
                    *correct.entry(gl).or_default() += 1;
                } else {
                    sent_labels = false;
                }
            } else {
                sent_heads = false;
                sent_labels = false;
            }
        }
        uem += sent_heads as usize;
        lem += sent_labels as usize;
    }

    let labels: BTreeSet<&String> = gold_count.keys().chain(pred_count.keys()).collect();
    let per_relation = labels
        .into_iter()
        .map(|l| {
            let g = gold_count.get(l).copied().unwrap_or(0);
            let p = pred_count.get(l).copied().unwrap_or(0);
            let c = correct.get(l).copied().unwrap_or(0);
            let precision = pct(c, p);
            let recall = pct(c, g);
            (
                l.clone(),
                RelationScore {
                    precision,
                    recall,
                    f1: harmonic(precision, recall),
                    gold_support: g,
                    predicted_count: p,
                    correct: c,
                },
            )
        })
        .collect();

    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        uas: pct(head_ok, tokens),
        las: pct(both_ok, tokens),
        uem: pct(uem, gold.len()),
        lem: pct(lem, gold.len()),
        per_relation,
        token_count: tokens,
        sentence_count: gold.len(),
        punct_excluded: options.exclude_punct,
        coarse_labels: options.coarse_labels,
    })
}

/// Relative error reduction of one relation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum ErrorReduction {
    Percent(f64),
    /// The baseline was already perfect and the improved system is not.
    Undefined,
}

/// Per-relation `100 * (err_base - err_improved) / err_base`, with
/// `err = 1 - F1` on a 0-1 scale. Relations missing from one report are
/// treated as F1 = 0 there.
pub fn relative_error_reduction(
    base: &EvalReport,
    improved: &EvalReport,
) -> BTreeMap<String, ErrorReduction> {
    let labels: BTreeSet<&String> = base
        .per_relation
        .keys()
        .chain(improved.per_relation.keys())
        .collect();
    let f1 = |r: &EvalReport, l: &str| r.per_relation.get(l).map_or(0.0, |s| s.f1 / 100.0);
    labels
        .into_iter()
        .map(|l| (l.clone(), error_reduction(f1(base, l), f1(improved, l))))
        .collect()
}

/// Relative error reduction between two F1 values on a 0-1 scale.
pub fn error_reduction(base_f1: f64, improved_f1: f64) -> ErrorReduction {
    const EPS: f64 = 1e-12;
    let base_err = 1.0 - base_f1;
    let improved_err = 1.0 - improved_f1;
    if base_err.abs() < EPS {
        if improved_err.abs() < EPS {
            ErrorReduction::Percent(0.0)
        } else {
            ErrorReduction::Undefined
        }
    } else {
        ErrorReduction::Percent(100.0 * (base_err - improved_err) / base_err)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProportionTest {
    pub z: f64,
    /// Two-sided.
    pub p_value: f64,
    /// Pooled proportion was 0 or 1; z is reported as 0 and p as 1.
    pub degenerate: bool,
}

/// Pooled two-population proportion z-test.
pub fn two_proportion_test(
    successes_a: u64,
    n_a: u64,
    successes_b: u64,
    n_b: u64,
) -> Result<ProportionTest> {
    if n_a == 0 || n_b == 0 || successes_a > n_a || successes_b > n_b {
        return Err(Error::Contract(
            "proportion test needs n >= 1 and successes <= n".into(),
        ));
    }
    let (xa, na, xb, nb) = (
        successes_a as f64,
        n_a as f64,
        successes_b as f64,
        n_b as f64,
    );
    let pooled = (xa + xb) / (na + nb);
    if pooled <= 0.0 || pooled >= 1.0 {
        return Ok(ProportionTest {
            z: 0.0,
            p_value: 1.0,
            degenerate: true,
        });
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    let z = (xa / na - xb / nb) / se;
    let p_value = (2.0 * normal_sf(z.abs())).min(1.0);
    Ok(ProportionTest {
        z,
        p_value,
        degenerate: false,
    })
}

/// Upper tail of the standard normal, `P(Z > x)`.
///
/// Zelen & Severo's rational approximation (Abramowitz & Stegun 26.2.17),
/// absolute error below 7.5e-8.
pub fn normal_sf(x: f64) -> f64 {
    const P: f64 = 0.231_641_9;
    const B: [f64; 5] = [
        0.319_381_530,
        -0.356_563_782,
        1.781_477_937,
        -1.821_255_978,
        1.330_274_429,
    ];
    if x < 0.0 {
        return 1.0 - normal_sf(-x);
    }
    let t = 1.0 / (1.0 + P * x);
    let poly = B.iter().rev().fold(0.0, |acc, &b| acc * t + b) * t;
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    density * poly
}

/// Cohen's kappa with empirical marginals.
///
/// When chance agreement is 1 (both annotators used one identical label
/// throughout) kappa is 1.0; if chance agreement is 1 without perfect
/// observed agreement, the value is undefined and an error is returned.
pub fn cohen_kappa<T: Ord>(labels_a: &[T], labels_b: &[T]) -> Result<f64> {
    if labels_a.len() != labels_b.len() || labels_a.is_empty() {
        return Err(Error::Contract(
            "kappa needs two equally long, non-empty label sequences".into(),
        ));
    }
    let n = labels_a.len() as f64;
    let observed = labels_a
        .iter()
        .zip(labels_b)
        .filter(|(a, b)| a == b)
        .count() as f64
        / n;
    let mut marg_a: BTreeMap<&T, f64> = BTreeMap::new();
    let mut marg_b: BTreeMap<&T, f64> = BTreeMap::new();
    for (a, b) in labels_a.iter().zip(labels_b) {
        *marg_a.entry(a).or_default() += 1.0;
        *marg_b.entry(b).or_default() += 1.0;
    }
    let expected: f64 = marg_a
        .iter()
        .map(|(k, ca)| ca * marg_b.get(k).copied().unwrap_or(0.0))
        .sum::<f64>()
        / (n * n);
    if (1.0 - expected).abs() < 1e-12 {
        return if (1.0 - observed).abs() < 1e-12 {
            Ok(1.0)
        } else {
            Err(Error::Contract(
                "kappa undefined: chance agreement is 1".into(),
            ))
        };
    }
    Ok((observed - expected) / (1.0 - expected))
}
