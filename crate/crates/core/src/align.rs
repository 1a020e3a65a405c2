//! Headline-to-lead-sentence alignment under the subsequence constraint.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::conllu::DepTree;
use crate::error::{Error, Result};

/// Order-preserving injective map from headline positions to sentence
/// positions. Both sides are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pairs: Vec<(usize, usize)>,
}

impl Alignment {
    /// Build from sentence positions listed in headline order.
    pub fn from_sentence_indices(indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Contract("empty alignment".into()));
        }
        if indices[0] == 0 || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract(
                "alignment indices must be 1-based and strictly increasing".into(),
            ));
        }
        Ok(Alignment {
            pairs: indices
                .iter()
                .enumerate()
                .map(|(i, &s)| (i + 1, s))
                .collect(),
        })
    }

    /// `(headline_index, sentence_index)` pairs in headline order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn sentence_indices(&self) -> Vec<usize> {
        self.pairs.iter().map(|&(_, s)| s).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn same_form(a: &str, b: &str, case_sensitive: bool) -> bool {
    if case_sensitive {
        a == b
    } else {
        a == b || a.to_lowercase() == b.to_lowercase()
    }
}

/// Greedy leftmost embedding of `headline` into `sentence`.
///
/// Each headline token is matched to the earliest unconsumed sentence token
/// with the same form (case-folded unless `case_sensitive`). Returns `None`
/// when the headline is not a subsequence or either side is empty.
pub fn align_subsequence<H, S>(
    headline: &[H],
    sentence: &[S],
    case_sensitive: bool,
) -> Option<Alignment>
where
    H: AsRef<str>,
    S: AsRef<str>,
{
    if headline.is_empty() || sentence.is_empty() {
        return None;
    }
    let mut pairs = Vec::with_capacity(headline.len());
    let mut next = 0;
    for (hi, h) in headline.iter().enumerate() {
        let offset = sentence[next..]
            .iter()
            .position(|s| same_form(h.as_ref(), s.as_ref(), case_sensitive))?;
        let si = next + offset;
        pairs.push((hi + 1, si + 1));
        next = si + 1;
    }
    Some(Alignment { pairs })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FilterCounts {
    pub kept: usize,
    pub dropped: usize,
}

/// Keep only the pairs whose headline embeds into the sentence.
pub fn filter_pairs<I, H>(
    pairs: I,
    case_sensitive: bool,
) -> (Vec<(Alignment, DepTree)>, FilterCounts)
where
    I: IntoIterator<Item = (Vec<H>, DepTree)>,
    H: AsRef<str>,
{
    let mut counts = FilterCounts::default();
    let mut kept = Vec::new();
    for (headline, tree) in pairs {
        match align_subsequence(&headline, &tree.forms(), case_sensitive) {
            Some(a) => {
                counts.kept += 1;
                kept.push((a, tree));
            }
            None => counts.dropped += 1,
        }
    }
    (kept, counts)
}

/// One line of a pairs file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TextPair {
    pub headline: Vec<String>,
    pub sentence: Vec<String>,
}

/// Read a two-column TSV of pre-tokenized text (`headline<TAB>lead`),
/// tokens separated by single spaces. Blank lines are ignored.
pub fn read_pairs_tsv<R: BufRead>(reader: R) -> Result<Vec<TextPair>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(h), Some(s), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::Parse {
                line: i + 1,
                message: "expected two tab-separated columns (headline, lead sentence)".into(),
            });
        };
        let split = |s: &str| -> Vec<String> {
            s.split(' ')
                .filter(|t| !t.is_empty())
                .map(str::to_owned)
                .collect()
        };
        out.push(TextPair {
            headline: split(h),
            sentence: split(s),
        });
    }
    Ok(out)
}

/// Read headlines from a CoNLL-U-like file: one token per line, sentences
/// separated by blank lines, `#` comments ignored. A line with 10 tab
/// separated columns contributes its FORM column; any other line is taken
/// whole as the token.
pub fn read_headline_tokens<R: BufRead>(reader: R) -> Result<Vec<Vec<String>>> {
    let mut out = Vec::new();
    let mut cur: Vec<String> = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() == 10 {
            if cols[0].contains('-') || cols[0].contains('.') {
                continue;
            }
            cur.push(cols[1].to_owned());
        } else {
            cur.push(line.trim().to_owned());
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}
