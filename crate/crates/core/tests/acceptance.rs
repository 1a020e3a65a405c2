//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use headtree::align::Alignment;
use headtree::conllu::{read_file, validate, DepTree, Treebank};
use headtree::ensemble::{
    build_votes, build_weighted_votes, ensemble_tree, reparse, ReparseOptions,
};
use headtree::eval::{cohen_kappa, score, two_proportion_test, ScoreOptions};
use headtree::openie::{diff_extractions, extract};
use headtree::parser::{train, ParserModel, Regime, Stage};
use headtree::project::{build_silver_corpus, project_tree, SilverOptions};
use headtree::stats::{
    compare_distributions, corpus_summary, default_exclusions, relation_distribution,
};
use headtree::synth::NewsGenerator;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Random tree plus a random non-empty, sorted subset of its tokens.
fn projection_case(rng: &mut ChaCha8Rng) -> (DepTree, Vec<usize>) {
    let n = rng.gen_range(1..=10);
    let tree = common::random_tree(rng, n);
    let mut kept: Vec<usize> = (1..=n).filter(|_| rng.gen_bool(0.5)).collect();
    if kept.is_empty() {
        kept.push(rng.gen_range(1..=n));
    }
    (tree, kept)
}

const PROJECTION_CASES: usize = 5_000;

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut mismatches = 0;
    let mut first = None;
    for _ in 0..PROJECTION_CASES {
        let (tree, kept) = projection_case(&mut rng);
        let ours = project_tree(&tree, &Alignment::from_sentence_indices(&kept).unwrap())
            .map_err(|e| e.to_string())?;
        let (heads, rels) = common::reference_on_tree(&tree, &kept);
        let got_rels: Vec<String> = ours.tree.deprels().iter().map(|s| s.to_string()).collect();
        if ours.tree.heads() != heads || got_rels != rels {
            mismatches += 1;
            first.get_or_insert_with(|| format!("heads {:?} kept {:?}", tree.heads(), kept));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(mismatches == 0, || {
        format!(
            "{} mismatches, first: {}",
            mismatches,
            first.clone().unwrap_or_default()
        )
    })?;
    ensure(secs < 10.0, || format!("took {:.2}s", secs))?;
    Ok(format!(
        "{} random cases, 0 mismatches, {:.2}s",
        PROJECTION_CASES, secs
    ))
}

fn criterion_2() -> Verdict {
    let sentence = DepTree::from_columns(
        &["Researchers", "promised", "to", "release", "data"],
        &["NOUN", "VERB", "PART", "VERB", "NOUN"],
        &[2, 0, 4, 2, 4],
        &["nsubj", "root", "mark", "xcomp", "obj"],
    )
    .unwrap();
    let res = project_tree(
        &sentence,
        &Alignment::from_sentence_indices(&[1, 3, 4, 5]).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    let t = &res.tree;
    let describe = || {
        t.tokens()
            .iter()
            .map(|tok| {
                let head = if tok.head == 0 {
                    "ROOT"
                } else {
                    t.token(tok.head).form.as_str()
                };
                format!("{}({}->{})", tok.deprel, head, tok.form)
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    // headline ids: Researchers=1 to=2 release=3 data=4
    let root_ok = t.token(3).head == 0;
    let nsubj_ok = t.token(1).head == 3 && t.token(1).deprel == "nsubj";
    let obj_ok = t.token(4).head == 3 && t.token(4).deprel == "obj";
    ensure(root_ok && nsubj_ok && obj_ok, || {
        format!(
            "expected root=release, nsubj(release->Researchers), obj(release->data); got {}",
            describe()
        )
    })?;
    Ok(describe())
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations: Vec<String> = Vec::new();
    for case in 0..PROJECTION_CASES {
        let (tree, kept) = projection_case(&mut rng);
        let res = project_tree(&tree, &Alignment::from_sentence_indices(&kept).unwrap())
            .map_err(|e| e.to_string())?;
        let out = &res.tree;
        let mut bad = |what: &str| violations.push(format!("case {}: {}", case, what));
        if out.len() != kept.len() {
            bad("size");
            continue;
        }
        if !validate(out).is_empty() {
            bad("output does not validate");
        }
        let position: BTreeMap<usize, usize> =
            kept.iter().enumerate().map(|(i, &s)| (s, i + 1)).collect();
        let kept_set: BTreeSet<usize> = kept.iter().copied().collect();
        let promoted: BTreeSet<usize> = res.promoted_ids.iter().copied().collect();
        for (i, &s) in kept.iter().enumerate() {
            let orig = tree.token(s);
            let got = out.token(i + 1);
            if got.form != orig.form {
                bad("form changed");
            }
            let parent_kept = orig.head == 0 || kept_set.contains(&orig.head);
            if parent_kept {
                let expect_head = if orig.head == 0 {
                    0
                } else {
                    position[&orig.head]
                };
                if got.head != expect_head || got.deprel != orig.deprel {
                    bad("retained edge changed");
                }
            }
            if promoted.contains(&s) {
                let mut inherited = Vec::new();
                let mut cur = orig.head;
                while cur != 0 {
                    if !kept_set.contains(&cur) {
                        inherited.push(tree.token(cur).deprel.clone());
                    }
                    cur = tree.token(cur).head;
                }
                if !inherited.contains(&got.deprel) {
                    bad("promoted label not inherited from a collapsed ancestor");
                }
            } else if got.deprel != orig.deprel {
                bad("label changed without promotion");
            }
        }
    }
    ensure(violations.is_empty(), || {
        format!("{} violations, first: {}", violations.len(), violations[0])
    })?;
    Ok(format!("{} cases, 0 violations", PROJECTION_CASES))
}

fn tb_from(rows: &[(&[&str], &[usize], &[&str])]) -> Treebank {
    let trees = rows
        .iter()
        .map(|(forms, heads, rels)| {
            let upos = vec!["X"; forms.len()];
            DepTree::from_columns(forms, &upos, heads, rels).unwrap()
        })
        .collect();
    Treebank::new("fixture", trees)
}

fn criterion_4() -> Verdict {
    let forms1: &[&str] = &["Bank", "cuts", "jobs", "in", "Ohio"];
    let forms2: &[&str] = &["Storm", "hits", "coast", "on", "Monday"];
    let gold = tb_from(&[
        (
            forms1,
            &[2, 0, 2, 5, 2],
            &["nsubj", "root", "obj", "case", "obl"],
        ),
        (
            forms2,
            &[2, 0, 2, 5, 2],
            &["nsubj", "root", "obj", "case", "obl"],
        ),
    ]);
    // sentence 1: `Ohio` attached to `jobs` (head error)
    // sentence 2: `coast` attached to `Storm` (head error), `Monday` labeled obj (label error)
    let pred = tb_from(&[
        (
            forms1,
            &[2, 0, 2, 5, 3],
            &["nsubj", "root", "obj", "case", "obl"],
        ),
        (
            forms2,
            &[2, 0, 1, 5, 2],
            &["nsubj", "root", "obj", "case", "obj"],
        ),
    ]);
    // Hand count: 10 tokens, 8 correct heads, 7 correct head+label; no sentence fully right.
    let r = score(&pred, &gold, ScoreOptions::default()).map_err(|e| e.to_string())?;
    let got = (r.uas, r.las, r.uem, r.lem);
    ensure(got == (80.0, 70.0, 0.0, 0.0), || {
        format!("fixture scored {:?}", got)
    })?;

    let id = score(&gold, &gold, ScoreOptions::default()).map_err(|e| e.to_string())?;
    ensure(
        (id.uas, id.las, id.uem, id.lem) == (100.0, 100.0, 100.0, 100.0),
        || "identity below 100".into(),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..1_000 {
        let sents = rng.gen_range(1..=5);
        let mut g = Vec::new();
        let mut p = Vec::new();
        for _ in 0..sents {
            let n = rng.gen_range(1..=8);
            let gt = common::random_tree(&mut rng, n);
            let pt = if rng.gen_bool(0.3) {
                gt.clone()
            } else {
                let other = common::random_tree(&mut rng, n);
                let mut heads = gt.heads();
                let mut rels: Vec<String> = gt.deprels().iter().map(|s| s.to_string()).collect();
                if rng.gen_bool(0.5) {
                    heads = other.heads();
                }
                for r in rels.iter_mut() {
                    if r != "root" && rng.gen_bool(0.3) {
                        *r = common::LABELS.choose(&mut rng).unwrap().to_string();
                    }
                }
                if heads.iter().filter(|&&h| h == 0).count() == 1 {
                    let root = heads.iter().position(|&h| h == 0).unwrap();
                    rels[root] = "root".into();
                    for (i, r) in rels.iter_mut().enumerate() {
                        if i != root && r == "root" {
                            *r = "dep".into();
                        }
                    }
                }
                gt.with_structure(&heads, &rels)
                    .map_err(|e| e.to_string())?
            };
            g.push(gt);
            p.push(pt);
        }
        let opts = ScoreOptions {
            exclude_punct: rng.gen_bool(0.5),
            coarse_labels: rng.gen_bool(0.5),
        };
        let r = score(&Treebank::new("p", p), &Treebank::new("g", g), opts)
            .map_err(|e| e.to_string())?;
        ensure(r.las <= r.uas && r.lem <= r.uem, || {
            format!(
                "case {}: UAS {} LAS {} UEM {} LEM {}",
                case, r.uas, r.las, r.uem, r.lem
            )
        })?;
    }
    Ok("fixture UAS 80 LAS 70 UEM 0 LEM 0; identity 100; 1000 fuzz pairs ordered".into())
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..500 {
        let n = rng.gen_range(1..=6);
        let k = rng.gen_range(1..=5);
        let trees: Vec<DepTree> = (0..k).map(|_| common::random_tree(&mut rng, n)).collect();
        let refs: Vec<&DepTree> = trees.iter().collect();
        let votes = if rng.gen_bool(0.5) {
            build_votes(&refs)
        } else {
            let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..2.0)).collect();
            build_weighted_votes(&refs, &w)
        }
        .map_err(|e| e.to_string())?;
        for single in [false, true] {
            let r = reparse(
                &votes,
                ReparseOptions {
                    force_single_root: single,
                },
            );
            let best = common::brute_force_max(n, |h, d| votes.weight(h, d), single);
            let roots_ok = !single || r.root_count() == 1;
            ensure(
                common::reaches_root(&r.heads) && roots_ok && (r.weight - best).abs() < 1e-9,
                || {
                    format!(
                        "case {} (n={}, k={}, single_root={}): weight {} vs brute force {}",
                        case, n, k, single, r.weight, best
                    )
                },
            )?;
            ensure((votes.score(&r.heads) - r.weight).abs() < 1e-9, || {
                format!(
                    "case {}: reported weight differs from its heads' score",
                    case
                )
            })?;
        }
    }
    for _ in 0..100 {
        let n = rng.gen_range(1..=12);
        let t = common::random_tree(&mut rng, n);
        let k = rng.gen_range(1..=5);
        let refs: Vec<&DepTree> = vec![&t; k];
        let e = ensemble_tree(&refs, None, ReparseOptions::default()).map_err(|e| e.to_string())?;
        ensure(e.tree == t, || {
            format!("unanimous vote changed {:?}", t.heads())
        })?;
    }
    Ok("500 instances match brute force (free and single-root); unanimity verbatim".into())
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("data")
}

fn criterion_6() -> Verdict {
    let dir = data_dir();
    let gsc = dir.join("eht").join("gsc.conllu");
    let nyt = dir.join("eht").join("nyt.conllu");
    let ewt = dir.join("ewt-sample.conllu");
    let missing: Vec<String> = [&gsc, &nyt, &ewt]
        .iter()
        .filter(|p| !p.exists())
        .map(|p| p.display().to_string())
        .collect();
    ensure(missing.is_empty(), || {
        format!(
            "published headline treebank files not available: {}",
            missing.join(", ")
        )
    })?;
    let load = |p: &PathBuf| read_file(p).map_err(|e| format!("{}: {}", p.display(), e));
    let (gsc, nyt, ewt) = (load(&gsc)?, load(&nyt)?, load(&ewt)?);
    let g = corpus_summary(&gsc);
    let y = corpus_summary(&nyt);
    ensure((g.headlines, g.tokens) == (600, 5017), || {
        format!("GSC summary ({}, {})", g.headlines, g.tokens)
    })?;
    ensure((y.headlines, y.tokens) == (455, 3986), || {
        format!("NYT summary ({}, {})", y.headlines, y.tokens)
    })?;
    let ex = default_exclusions();
    let table = compare_distributions(
        &[
            relation_distribution(&gsc, &ex, true),
            relation_distribution(&ewt, &ex, true),
        ],
        0.0,
    )
    .map_err(|e| e.to_string())?;
    for label in ["compound", "flat"] {
        let a = table.share(label, &gsc.source_name).unwrap_or(0.0);
        let b = table.share(label, &ewt.source_name).unwrap_or(0.0);
        ensure(a > b, || {
            format!("{} share {:.4} (GSC) vs {:.4} (EWT)", label, a, b)
        })?;
    }
    Ok("GSC (600, 5017), NYT (455, 3986); compound and flat higher in GSC".into())
}

fn las(model: &ParserModel, test: &Treebank) -> f64 {
    score(&model.parse_treebank(test), test, ScoreOptions::default())
        .unwrap()
        .las
}

fn criterion_7() -> Verdict {
    const EPOCHS: usize = 8;
    let start = Instant::now();
    let mut g = NewsGenerator::new(2024);
    let gold = g.body_treebank("body", 2_000);
    let pairs = g.news_pairs("news", 5_000);
    let seen: HashSet<Vec<String>> = pairs
        .iter()
        .map(|p| p.headline.iter().map(|f| f.to_lowercase()).collect())
        .collect();
    let mut test_trees = Vec::new();
    while test_trees.len() < 600 {
        let h = g.headline();
        let key: Vec<String> = h.forms().iter().map(|f| f.to_lowercase()).collect();
        if !seen.contains(&key) {
            test_trees.push(h.with_sent_id(&format!("test-{}", test_trees.len() + 1)));
        }
    }
    let test = Treebank::new("headlines", test_trees);

    let mut sums = [0.0f64; 3];
    let mut lines = Vec::new();
    for seed in 1..=3u64 {
        let gold_model = train(&[Stage::new(&gold, EPOCHS)], seed).map_err(|e| e.to_string())?;
        // project from predicted lead parses
        let parsed: Vec<(Vec<String>, DepTree)> = pairs
            .iter()
            .map(|p| (p.headline.clone(), gold_model.parse(&p.lead)))
            .collect();
        let (silver, report) = build_silver_corpus(&parsed, SilverOptions::default());
        ensure(silver.len() >= 5_000, || {
            format!("only {} silver trees", silver.len())
        })?;
        let concat = train(&Regime::Concat.stages(&gold, &silver, EPOCHS), seed)
            .map_err(|e| e.to_string())?;
        let finetune = train(&Regime::Finetune.stages(&gold, &silver, EPOCHS), seed)
            .map_err(|e| e.to_string())?;
        let scores = [
            las(&gold_model, &test),
            las(&concat, &test),
            las(&finetune, &test),
        ];
        for (s, v) in sums.iter_mut().zip(scores) {
            *s += v;
        }
        lines.push(format!(
            "seed {}: gold {:.2} concat {:.2} finetune {:.2} ({} silver, {} collapsed)",
            seed,
            scores[0],
            scores[1],
            scores[2],
            silver.len(),
            report.trees_with_collapse
        ));
    }
    let [base, concat, finetune] = sums.map(|s| s / 3.0);
    let secs = start.elapsed().as_secs_f64();
    let summary = format!(
        "synthetic corpora; mean LAS gold-only {:.2}, concat {:.2}, finetune {:.2}; {:.0}s [{}]",
        base,
        concat,
        finetune,
        secs,
        lines.join("; ")
    );
    ensure(
        finetune - base >= 1.0 && concat - base >= 1.0 && secs < 1800.0,
        || summary.clone(),
    )?;
    Ok(summary)
}

fn criterion_8() -> Verdict {
    let mut g = NewsGenerator::new(8);
    let mut trees = Vec::new();
    while trees.len() < 10 {
        let t = g.body_sentence();
        if t.is_projective() {
            trees.push(t);
        }
    }
    let toy = Treebank::new("toy", trees);
    let mut memorized_at = None;
    for epochs in 1..=10 {
        let model = train(&[Stage::new(&toy, epochs)], 7).map_err(|e| e.to_string())?;
        if las(&model, &toy) == 100.0 {
            memorized_at = Some(epochs);
            break;
        }
    }
    let at = memorized_at.ok_or_else(|| "LAS below 100 after 10 epochs".to_string())?;
    let a = train(&[Stage::new(&toy, 10)], 42).map_err(|e| e.to_string())?;
    let b = train(&[Stage::new(&toy, 10)], 42).map_err(|e| e.to_string())?;
    ensure(a.to_bytes() == b.to_bytes(), || {
        "models differ under a fixed seed".into()
    })?;
    Ok(format!(
        "100% LAS after {} epochs; identical model bytes",
        at
    ))
}

fn criterion_9() -> Verdict {
    let t = two_proportion_test(41, 50, 28, 50).map_err(|e| e.to_string())?;
    ensure(t.p_value < 0.01, || format!("p = {}", t.p_value))?;
    // independent z and tail
    for (xa, na, xb, nb) in [
        (41u64, 50u64, 28u64, 50u64),
        (49, 50, 25, 50),
        (30, 60, 22, 55),
    ] {
        let (pa, pb) = (xa as f64 / na as f64, xb as f64 / nb as f64);
        let pool = (xa + xb) as f64 / (na + nb) as f64;
        let z = (pa - pb) / (pool * (1.0 - pool) * (1.0 / na as f64 + 1.0 / nb as f64)).sqrt();
        let p = 2.0 * (1.0 - common::normal_cdf_series(z.abs()));
        let got = two_proportion_test(xa, na, xb, nb).map_err(|e| e.to_string())?;
        ensure(
            (got.z - z).abs() < 1e-9 && (got.p_value - p).abs() < 1e-6,
            || {
                format!(
                    "{}/{} vs {}/{}: p {} vs oracle {}",
                    xa, na, xb, nb, got.p_value, p
                )
            },
        )?;
    }
    let a = ["x", "y", "x", "z", "y", "x"];
    let k = cohen_kappa(&a, &a).map_err(|e| e.to_string())?;
    ensure(k == 1.0, || format!("identity kappa {}", k))?;
    // 2x2 table [[20, 5], [10, 15]]
    let table = vec![vec![20u64, 5], vec![10, 15]];
    let mut la = Vec::new();
    let mut lb = Vec::new();
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            for _ in 0..c {
                la.push(i);
                lb.push(j);
            }
        }
    }
    let k = cohen_kappa(&la, &lb).map_err(|e| e.to_string())?;
    let oracle = common::kappa_from_table(&table);
    ensure(
        (k - oracle).abs() < 1e-12 && (k - 0.4).abs() < 1e-12,
        || format!("kappa {} vs oracle {}", k, oracle),
    )?;
    Ok(format!(
        "p = {:.4} (z = {:.3}); kappa identity 1.0, table 0.4",
        t.p_value, t.z
    ))
}

fn criterion_10() -> Verdict {
    let tree = DepTree::from_columns(
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
    )
    .unwrap();
    let tuples = extract(&tree);
    ensure(tuples.len() == 1, || format!("{} tuples", tuples.len()))?;
    let args: Vec<&str> = tuples[0].args.iter().map(|a| a.text.as_str()).collect();
    ensure(
        tuples[0].pred_text == "to Cut"
            && args == ["JPMorgan", "9,200 Jobs", "at Washington Mutual"],
        || format!("predicate {:?}, args {:?}", tuples[0].pred_text, args),
    )?;

    let mut g = NewsGenerator::new(10);
    let base: Vec<DepTree> = (0..10).map(|_| g.headline()).collect();
    let changed: BTreeSet<usize> = [1, 4, 5, 8].into_iter().collect();
    let other: Vec<DepTree> = base
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if !changed.contains(&i) {
                return t.clone();
            }
            // relabel the subject of the root
            let mut rels: Vec<String> = t.deprels().iter().map(|s| s.to_string()).collect();
            let root = t.heads().iter().position(|&h| h == 0).unwrap() + 1;
            let subj = t
                .tokens()
                .iter()
                .position(|tok| tok.head == root && tok.deprel.starts_with("nsubj"))
                .unwrap();
            rels[subj] = "obl".into();
            t.with_structure(&t.heads(), &rels).unwrap()
        })
        .collect();
    let a: Vec<_> = base.iter().map(extract).collect();
    let b: Vec<_> = other.iter().map(extract).collect();
    let flagged: BTreeSet<usize> = diff_extractions(&a, &b)
        .map_err(|e| e.to_string())?
        .into_iter()
        .collect();
    ensure(flagged == changed, || {
        format!("flagged {:?}, expected {:?}", flagged, changed)
    })?;
    Ok(
        "JPMorgan: to Cut (JPMorgan; 9,200 Jobs; at Washington Mutual); diff flags 1, 4, 5, 8"
            .into(),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("projection matches the reference code", criterion_1),
        ("projection worked example", criterion_2),
        ("projection invariants", criterion_3),
        ("evaluation correctness", criterion_4),
        ("ensemble optimality", criterion_5),
        ("statistics on published headline treebanks", criterion_6),
        ("silver data improves headline parsing", criterion_7),
        ("perceptron memorization and determinism", criterion_8),
        ("statistical tests", criterion_9),
        ("predicate-argument extraction", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!(
                "criterion {:>2} PASS  {} ({:.1}s): {}",
                i + 1,
                name,
                secs,
                detail
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "criterion {:>2} FAIL  {} ({:.1}s): {}",
                    i + 1,
                    name,
                    secs,
                    detail
                );
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
