//! Corpus summaries and a side-by-side relation distribution.
//!
//!     cargo run --example corpus_stats -- [a.conllu b.conllu ...]

use headtree::conllu::read_file;
use headtree::stats::{
    compare_distributions, corpus_summary, default_exclusions, relation_distribution,
    DEFAULT_MIN_SHARE,
};
use headtree::synth::NewsGenerator;

fn main() -> headtree::Result<()> {
    let paths: Vec<String> = std::env::args().skip(1).collect();
    let banks = if paths.is_empty() {
        let mut g = NewsGenerator::new(2);
        vec![
            g.headline_treebank("headlines", 600),
            g.body_treebank("body", 600),
        ]
    } else {
        paths
            .iter()
            .map(read_file)
            .collect::<headtree::Result<_>>()?
    };

    for tb in &banks {
        let s = corpus_summary(tb);
        println!(
            "{}: {} sentences, {} tokens, mean {:.2}, percentiles {:?}",
            s.corpus_name,
            s.headlines,
            s.tokens,
            s.mean_length.unwrap_or(0.0),
            s.length_percentiles
        );
    }
    if banks.len() >= 2 {
        let dists: Vec<_> = banks
            .iter()
            .map(|tb| relation_distribution(tb, &default_exclusions(), true))
            .collect();
        print!(
            "\n{}",
            compare_distributions(&dists, DEFAULT_MIN_SHARE)?.to_tsv()
        );
    }
    Ok(())
}
