//! Align headlines to lead sentences and project the lead parses onto
//! them.
//!
//!     cargo run --example project_headlines

use headtree::align::align_subsequence;
use headtree::conllu::DepTree;
use headtree::project::{build_silver_corpus, project_tree, SilverOptions};
use headtree::synth::NewsGenerator;

fn show(t: &DepTree) -> String {
    t.tokens()
        .iter()
        .map(|tok| {
            let head = if tok.head == 0 {
                "ROOT"
            } else {
                &t.token(tok.head).form
            };
            format!("{}({} -> {})", tok.deprel, head, tok.form)
        })
        .collect::<Vec<_>>()
        .join("  ")
}

fn main() -> headtree::Result<()> {
    let lead = DepTree::from_columns(
        &["Researchers", "promised", "to", "release", "data", "."],
        &["NOUN", "VERB", "PART", "VERB", "NOUN", "PUNCT"],
        &[2, 0, 4, 2, 4, 2],
        &["nsubj", "root", "mark", "xcomp", "obj", "punct"],
    )?;
    let headline = ["researchers", "to", "release", "data"];
    let alignment = align_subsequence(&headline, &lead.forms(), false).expect("headline embeds");
    println!("alignment: {:?}", alignment.pairs());
    let res = project_tree(&lead, &alignment)?;
    println!("projected: {}", show(&res.tree));
    println!(
        "collapsed {} node(s), promoted {:?}",
        res.collapsed_count, res.promoted_ids
    );

    // A small silver corpus from synthetic pairs.
    let mut g = NewsGenerator::new(1);
    let pairs: Vec<(Vec<String>, DepTree)> = g
        .news_pairs("news", 1_000)
        .into_iter()
        .map(|p| (p.headline, p.lead))
        .collect();
    let (silver, report) = build_silver_corpus(&pairs, SilverOptions::default());
    println!(
        "\nsilver: {} kept, {} dropped, {} failed; {} trees needed collapsing",
        report.kept, report.dropped, report.failed, report.trees_with_collapse
    );
    for (t, (h, lead)) in silver.iter().zip(&pairs).take(3) {
        println!("\n  lead:     {}", lead.forms().join(" "));
        println!("  headline: {}", h.join(" "));
        println!("  tree:     {}", show(t));
    }
    Ok(())
}
