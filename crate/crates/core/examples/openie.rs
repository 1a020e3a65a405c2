//! Predicate-argument tuples from a headline parse, and a diff between two
//! parses of the same headlines.
//!
//!     cargo run --example openie

use headtree::conllu::DepTree;
use headtree::openie::{diff_extractions, extract};

fn main() -> headtree::Result<()> {
    let gold = DepTree::from_columns(
        &[
            "JPMorgan",
            "to",
            "Cut",
            "9,200",
            "Jobs",
            "at",
            "Washington",
            "Mutual",
        ],
        &[
            "PROPN", "PART", "VERB", "NUM", "NOUN", "ADP", "PROPN", "PROPN",
        ],
        &[3, 3, 0, 5, 3, 8, 8, 3],
        &[
            "nsubj", "mark", "root", "nummod", "obj", "case", "compound", "obl",
        ],
    )?;
    // A typical body-text parser error: `JPMorgan` as the root with an
    // infinitival modifier.
    let predicted = DepTree::from_columns(
        &[
            "JPMorgan",
            "to",
            "Cut",
            "9,200",
            "Jobs",
            "at",
            "Washington",
            "Mutual",
        ],
        &[
            "PROPN", "PART", "VERB", "NUM", "NOUN", "ADP", "PROPN", "PROPN",
        ],
        &[0, 3, 1, 5, 3, 8, 8, 3],
        &[
            "root", "mark", "acl", "nummod", "obj", "case", "compound", "obl",
        ],
    )?;

    for (name, tree) in [("gold", &gold), ("predicted", &predicted)] {
        println!("{}:", name);
        for t in extract(tree) {
            let args: Vec<String> = t
                .args
                .iter()
                .map(|a| format!("{}: {}", a.rel, a.text))
                .collect();
            println!("  {} ({})", t.pred_text, args.join("; "));
        }
    }
    let diff = diff_extractions(&[extract(&gold)], &[extract(&predicted)])?;
    println!("differing sentences: {:?}", diff);
    println!("{}", serde_json::to_string_pretty(&extract(&gold)).unwrap());
    Ok(())
}
