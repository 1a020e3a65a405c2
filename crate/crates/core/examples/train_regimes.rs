//! Train the perceptron parser under the four data regimes and score each
//! on held-out headlines.
//!
//!     cargo run --release --example train_regimes

use headtree::eval::{score, ScoreOptions};
use headtree::parser::{train, Regime};
use headtree::project::{build_silver_corpus, SilverOptions};
use headtree::synth::NewsGenerator;
use headtree::Treebank;

fn main() -> headtree::Result<()> {
    let mut g = NewsGenerator::new(7);
    let gold = g.body_treebank("body", 2_000);
    let pairs: Vec<_> = g
        .news_pairs("news", 5_000)
        .into_iter()
        .map(|p| (p.headline, p.lead))
        .collect();
    let (silver, _) = build_silver_corpus(&pairs, SilverOptions::default());
    let test = g.headline_treebank("headlines", 600);
    let empty = Treebank::default();

    println!(
        "{:<10} {:>7} {:>7} {:>7} {:>7}",
        "regime", "UAS", "LAS", "UEM", "LEM"
    );
    for (name, regime) in [
        ("gold", Regime::Gold),
        ("silver", Regime::Silver),
        ("concat", Regime::Concat),
        ("finetune", Regime::Finetune),
    ] {
        let silver = if regime == Regime::Gold {
            &empty
        } else {
            &silver
        };
        let model = train(&regime.stages(&gold, silver, 8), 1)?;
        let r = score(&model.parse_treebank(&test), &test, ScoreOptions::default())?;
        println!(
            "{:<10} {:>7.2} {:>7.2} {:>7.2} {:>7.2}",
            name, r.uas, r.las, r.uem, r.lem
        );
    }
    Ok(())
}
