//! Attachment scores, per-relation F1, relative error reduction and the
//! significance tests.
//!
//!     cargo run --example evaluate -- [pred.conllu gold.conllu]

use headtree::conllu::read_file;
use headtree::eval::{
    cohen_kappa, relative_error_reduction, score, two_proportion_test, ScoreOptions,
};
use headtree::parser::{train, Stage};
use headtree::synth::NewsGenerator;

fn main() -> headtree::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let [pred, gold] = args.as_slice() {
        let r = score(
            &read_file(pred)?,
            &read_file(gold)?,
            ScoreOptions::default(),
        )?;
        print!("{}", r.to_table());
        return Ok(());
    }

    let mut g = NewsGenerator::new(5);
    let gold = g.body_treebank("body", 500);
    let test = g.headline_treebank("headlines", 300);
    let weak = train(&[Stage::new(&gold, 1)], 1)?;
    let strong = train(&[Stage::new(&gold, 6)], 1)?;
    let base = score(&weak.parse_treebank(&test), &test, ScoreOptions::default())?;
    let better = score(
        &strong.parse_treebank(&test),
        &test,
        ScoreOptions::default(),
    )?;
    print!("{}", better.to_table());

    println!("\nrelative error reduction over the 1-epoch model:");
    for (rel, red) in relative_error_reduction(&base, &better) {
        println!("  {:<12} {:?}", rel, red);
    }

    let t = two_proportion_test(41, 50, 28, 50)?;
    println!("\n41/50 vs 28/50: z = {:.3}, p = {:.4}", t.z, t.p_value);
    let a = ["ok", "ok", "bad", "ok", "bad", "ok"];
    let b = ["ok", "bad", "bad", "ok", "bad", "ok"];
    println!("kappa = {:.3}", cohen_kappa(&a, &b)?);
    Ok(())
}
