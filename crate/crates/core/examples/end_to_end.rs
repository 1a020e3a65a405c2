//! The full pipeline: project silver headline trees, train on gold then
//! silver, parse with five restarts, ensemble, evaluate.
//!
//!     cargo run --release --example end_to_end

use headtree::conllu::DepTree;
use headtree::ensemble::{ensemble_treebanks, ReparseOptions};
use headtree::eval::{relative_error_reduction, score, ErrorReduction, ScoreOptions};
use headtree::parser::{holdout_split, train, Regime, Stage};
use headtree::project::{build_silver_corpus, SilverOptions};
use headtree::synth::NewsGenerator;

fn main() -> headtree::Result<()> {
    let mut g = NewsGenerator::new(2022);
    let gold = g.body_treebank("body", 2_000);
    let pairs = g.news_pairs("news", 5_000);
    let test = g.headline_treebank("headlines", 600);

    // Leads are parsed by a body-text model before projection.
    let body_model = train(&[Stage::new(&gold, 8)], 0)?;
    let parsed: Vec<(Vec<String>, DepTree)> = pairs
        .iter()
        .map(|p| (p.headline.clone(), body_model.parse(&p.lead)))
        .collect();
    let (silver, report) = build_silver_corpus(&parsed, SilverOptions::default());
    let (silver_train, silver_dev) = holdout_split(&silver, 500, 0);
    eprintln!(
        "silver: {} projected ({} train, {} dev), {} collapsed",
        report.kept,
        silver_train.len(),
        silver_dev.len(),
        report.trees_with_collapse
    );

    let opts = ScoreOptions::default();
    let baseline = score(&body_model.parse_treebank(&test), &test, opts)?;
    let mut parses = Vec::new();
    for seed in 1..=5 {
        let model = train(&Regime::Finetune.stages(&gold, &silver_train, 8), seed)?;
        let p = model.parse_treebank(&test);
        eprintln!(
            "finetune seed {}: LAS {:.2}",
            seed,
            score(&p, &test, opts)?.las
        );
        parses.push(p);
    }
    let (combined, _) = ensemble_treebanks(&parses, None, ReparseOptions::default())?;
    let final_report = score(&combined, &test, opts)?;

    println!("body-text model: LAS {:.2}", baseline.las);
    println!("ensembled finetuned models:");
    print!("{}", final_report.to_table());
    println!("\nerror reduction by relation:");
    for (rel, red) in relative_error_reduction(&baseline, &final_report) {
        if let ErrorReduction::Percent(p) = red {
            println!("  {:<12} {:>7.1}%", rel, p);
        }
    }
    Ok(())
}
