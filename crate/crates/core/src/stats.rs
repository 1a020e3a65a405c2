//! Descriptive corpus statistics and relation-label distributions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::conllu::{coarse_label, Treebank};
use crate::error::{Error, Result};

/// Relations left out of distributions unless told otherwise.
pub const DEFAULT_EXCLUDED: [&str; 2] = ["punct", "root"];

/// Labels below this share in every corpus are dropped from comparisons.
pub const DEFAULT_MIN_SHARE: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationDistribution {
    pub corpus_name: String,
    pub proportions: BTreeMap<String, f64>,
    pub counted_tokens: usize,
    pub excluded: BTreeSet<String>,
}

pub fn default_exclusions() -> BTreeSet<String> {
    DEFAULT_EXCLUDED.iter().map(|s| s.to_string()).collect()
}

/// Share of each relation label among the counted tokens. Exclusions are
/// matched against the label as counted (coarse or full).
pub fn relation_distribution(
    tb: &Treebank,
    exclude: &BTreeSet<String>,
    coarse: bool,
) -> RelationDistribution {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for tok in tb.iter().flat_map(|t| t.tokens()) {
        let label = if coarse {
            coarse_label(&tok.deprel)
        } else {
            tok.deprel.as_str()
        };
        if exclude.contains(label) {
            continue;
        }
        *counts.entry(label.to_owned()).or_default() += 1;
    }
    let total: usize = counts.values().sum();
    let proportions = counts
        .into_iter()
        .map(|(l, c)| (l, c as f64 / total as f64))
        .collect();
    RelationDistribution {
        corpus_name: tb.source_name.clone(),
        proportions,
        counted_tokens: total,
        excluded: exclude.clone(),
    }
}

/// Sentence-length percentiles by the nearest-rank method.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LengthPercentiles {
    pub min: usize,
    pub p25: usize,
    pub median: usize,
    pub p75: usize,
    pub p90: usize,
    pub max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub corpus_name: String,
    pub headlines: usize,
    pub tokens: usize,
    /// `None` for an empty treebank.
    pub mean_length: Option<f64>,
    pub length_percentiles: Option<LengthPercentiles>,
}

/// Nearest-rank percentile of sorted, non-empty data.
pub fn nearest_rank(sorted: &[usize], percent: f64) -> usize {
    let n = sorted.len();
    let rank = ((percent / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

pub fn corpus_summary(tb: &Treebank) -> CorpusSummary {
    let mut lengths: Vec<usize> = tb.iter().map(|t| t.len()).collect();
    lengths.sort_unstable();
    let tokens: usize = lengths.iter().sum();
    let (mean_length, length_percentiles) = if lengths.is_empty() {
        (None, None)
    } else {
        (
            Some(tokens as f64 / lengths.len() as f64),
            Some(LengthPercentiles {
                min: lengths[0],
                p25: nearest_rank(&lengths, 25.0),
                median: nearest_rank(&lengths, 50.0),
                p75: nearest_rank(&lengths, 75.0),
                p90: nearest_rank(&lengths, 90.0),
                max: *lengths.last().unwrap(),
            }),
        )
    };
    CorpusSummary {
        corpus_name: tb.source_name.clone(),
        headlines: tb.len(),
        tokens,
        mean_length,
        length_percentiles,
    }
}

/// Labels x corpora table of shares.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionTable {
    pub corpora: Vec<String>,
    pub min_share: f64,
    /// `(label, share per corpus)`, highest maximum share first.
    pub rows: Vec<(String, Vec<f64>)>,
}

impl DistributionTable {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("relation");
        for c in &self.corpora {
            s.push('\t');
            s.push_str(c);
        }
        s.push('\n');
        for (label, shares) in &self.rows {
            s.push_str(label);
            for v in shares {
                let _ = write!(s, "\t{:.6}", v);
            }
            s.push('\n');
        }
        s
    }

    pub fn share(&self, label: &str, corpus: &str) -> Option<f64> {
        let col = self.corpora.iter().position(|c| c == corpus)?;
        self.rows
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v[col])
    }
}

/// Keep labels reaching `min_share` in at least one corpus, sorted by their
/// largest share (descending), then by label.
pub fn compare_distributions(
    dists: &[RelationDistribution],
    min_share: f64,
) -> Result<DistributionTable> {
    if dists.len() < 2 {
        return Err(Error::Contract(
            "comparison needs at least two distributions".into(),
        ));
    }
    let labels: BTreeSet<&String> = dists.iter().flat_map(|d| d.proportions.keys()).collect();
    let mut rows: Vec<(String, Vec<f64>)> = labels
        .into_iter()
        .map(|l| {
            let shares = dists
                .iter()
                .map(|d| d.proportions.get(l).copied().unwrap_or(0.0))
                .collect();
            (l.clone(), shares)
        })
        .filter(|(_, shares): &(String, Vec<f64>)| shares.iter().any(|&s| s >= min_share))
        .collect();
    let max_of = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    rows.sort_by(|a, b| {
        max_of(&b.1)
            .partial_cmp(&max_of(&a.1))
            .unwrap()
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(DistributionTable {
        corpora: dists.iter().map(|d| d.corpus_name.clone()).collect(),
        min_share,
        rows,
    })
}
