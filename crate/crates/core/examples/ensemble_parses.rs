//! Combine five parsers trained with different seeds by reparsing their
//! votes into a maximum spanning tree.
//!
//!     cargo run --release --example ensemble_parses

use headtree::ensemble::{ensemble_treebanks, ReparseOptions};
use headtree::eval::{score, ScoreOptions};
use headtree::parser::{train, Stage};
use headtree::synth::NewsGenerator;

fn main() -> headtree::Result<()> {
    let mut g = NewsGenerator::new(3);
    let gold = g.body_treebank("body", 800);
    let test = g.headline_treebank("headlines", 400);

    let mut parses = Vec::new();
    for seed in 1..=5 {
        let model = train(&[Stage::new(&gold, 3)], seed)?;
        let parsed = model.parse_treebank(&test);
        let r = score(&parsed, &test, ScoreOptions::default())?;
        println!("seed {}: LAS {:.2}", seed, r.las);
        parses.push(parsed);
    }
    for force in [false, true] {
        let (combined, constrained) = ensemble_treebanks(
            &parses,
            None,
            ReparseOptions {
                force_single_root: force,
            },
        )?;
        let r = score(&combined, &test, ScoreOptions::default())?;
        println!(
            "ensemble (force_single_root={}): LAS {:.2}, {} sentences re-solved with one root",
            force, r.las, constrained
        );
    }
    Ok(())
}
