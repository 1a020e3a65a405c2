use std::io;

use thiserror::Error;

use crate::conllu::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] io::Error),

    /// A malformed line in a CoNLL-U or pairs file (line numbers are 1-based).
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("sentence {sent_id}: invalid tree ({})", format_violations(.violations))]
    Validation {
        sent_id: String,
        violations: Vec<Violation>,
    },

    /// Two treebanks that should be parallel are not.
    #[error("sentence {sentence}: {message}")]
    Mismatch { sentence: usize, message: String },

    /// A precondition of an operation was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("model format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
