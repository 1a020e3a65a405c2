//! Read a CoNLL-U file (or a built-in sample), report what was skipped,
//! and write it back out.
//!
//!     cargo run --example conllu_io -- [input.conllu]

use headtree::conllu::{
    parse_str, read_conllu, to_conllu_string, validate, DepTree, ReadOptions, Token,
};

const SAMPLE: &str = "\
# sent_id = gsc-1
# text = JPMorgan to Cut 9,200 Jobs
1\tJPMorgan\tJPMorgan\tPROPN\tNNP\t_\t3\tnsubj\t_\t_
2\tto\tto\tPART\tTO\t_\t3\tmark\t_\t_
3\tCut\tcut\tVERB\tVB\t_\t0\troot\t_\t_
4-5\tJobs'\t_\t_\t_\t_\t_\t_\t_\t_
4\t9,200\t9,200\tNUM\tCD\t_\t5\tnummod\t_\t_
5\tJobs\tjob\tNOUN\tNNS\tNumber=Plur\t3\tobj\t_\t_

# sent_id = broken
1\ta\t_\tX\t_\t_\t2\tdep\t_\t_
2\tb\t_\tX\t_\t_\t1\tdep\t_\t_

";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lenient = ReadOptions { strict: false };
    let outcome = match std::env::args().nth(1) {
        Some(path) => {
            let file = std::io::BufReader::new(std::fs::File::open(&path)?);
            read_conllu(file, &path, lenient)?
        }
        None => parse_str(SAMPLE, lenient)?,
    };
    eprintln!(
        "{} trees, {} tokens; skipped {} multiword lines, {} empty nodes, {} sentences",
        outcome.treebank.len(),
        outcome.treebank.token_count(),
        outcome.skipped_multiword,
        outcome.skipped_empty_nodes,
        outcome.skipped_sentences.len()
    );
    for s in &outcome.skipped_sentences {
        eprintln!("  skipped: {:?}", s);
    }

    // Trees built by hand are unvalidated until checked.
    let tokens = vec![
        Token::new(1, "Storm", "NOUN", 2, "nsubj"),
        Token::new(2, "hits", "VERB", 0, "root"),
        Token::new(3, "coast", "NOUN", 1, "obj"),
    ];
    let tree = DepTree::new(tokens, Vec::new());
    for v in validate(&tree) {
        eprintln!("hand-built tree: {:?} at token {}", v.kind, v.token);
    }

    print!("{}", to_conllu_string(&outcome.treebank)?);
    Ok(())
}
