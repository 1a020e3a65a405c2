//! Tools for building and using silver-annotated headline treebanks.
//!
//! The pipeline:
//!
//! 1. [`align`] finds headline/lead-sentence pairs where the headline is a
//!    subsequence of the lead sentence.
//! 2. [`project`] prunes the lead sentence's dependency tree down to the
//!    headline tokens, producing a silver headline tree.
//! 3. [`parser`] trains an arc-standard averaged-perceptron parser on gold,
//!    silver, or staged mixtures of both.
//! 4. [`ensemble`] combines several parses by arc voting and maximum
//!    spanning arborescence reparsing.
//! 5. [`eval`], [`stats`] and [`openie`] score, describe and extract
//!    tuples from the results.
//!
//! [`conllu`] holds the tree model and file format shared by all of them;
//! [`cli`] wires everything into the `headtree` command; [`synth`]
//! generates a small synthetic news corpus used by the examples and tests.

pub mod align;
pub mod cli;
pub mod conllu;
pub mod ensemble;
mod error;
pub mod eval;
pub mod openie;
pub mod parser;
pub mod project;
pub mod stats;
pub mod synth;

pub use conllu::{DepTree, Token, Treebank};
pub use error::{Error, Result};
