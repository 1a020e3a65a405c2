mod common;

use headtree::align::{align_subsequence, Alignment};
use headtree::conllu::{
    parse_str, to_conllu_string, validate, DepTree, ReadOptions, Token, Treebank,
};
use headtree::ensemble::{build_votes, reparse, ReparseOptions};
use headtree::eval::{score, ScoreOptions};
use headtree::parser::{replay, static_oracle, train, Stage};
use headtree::project::{project_tree_with, CollapseOrder};
use headtree::synth::NewsGenerator;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn words(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "A"]), 0..=max)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn alignment_is_smallest_embedding(h in words(8), s in words(8)) {
        let ours = align_subsequence(&h, &s, true).map(|a| a.sentence_indices());
        prop_assert_eq!(ours, common::smallest_embedding(&h, &s));
    }

    #[test]
    fn case_folded_alignment_matches_lowercased_input(h in words(6), s in words(8)) {
        let lower = |v: &[String]| v.iter().map(|x| x.to_lowercase()).collect::<Vec<_>>();
        let folded = align_subsequence(&h, &s, false).map(|a| a.sentence_indices());
        prop_assert_eq!(folded, common::smallest_embedding(&lower(&h), &lower(&s)));
    }

    #[test]
    fn validation_agrees_with_reachability(
        heads in (1usize..=8).prop_flat_map(|n| prop::collection::vec(0..=n, n))
    ) {
        let tokens = heads
            .iter()
            .enumerate()
            .map(|(i, &h)| Token::new(i + 1, format!("w{}", i + 1), "X", h, "dep"))
            .collect();
        let tree = DepTree::new(tokens, Vec::new());
        let no_self_loops = heads.iter().enumerate().all(|(i, &h)| h != i + 1);
        prop_assert_eq!(
            validate(&tree).is_empty(),
            no_self_loops && common::is_valid_tree(&heads)
        );
    }

    #[test]
    fn conllu_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trees: Vec<DepTree> = (0..rng.gen_range(1..4))
            .map(|i| {
                let n = rng.gen_range(1..10);
                common::random_tree(&mut rng, n).with_sent_id(&format!("s{}", i))
            })
            .collect();
        let tb = Treebank::new("x", trees);
        let text = to_conllu_string(&tb).unwrap();
        let back = parse_str(&text, ReadOptions { strict: true }).unwrap().treebank;
        prop_assert_eq!(back.trees, tb.trees);
    }

    #[test]
    fn scores_are_ordered_and_consistent(seed in any::<u64>(), exclude_punct: bool, coarse: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..10);
        let gold = common::random_tree(&mut rng, n);
        let other = common::random_tree(&mut rng, n);
        let pred = gold
            .with_structure(&other.heads(), &other.deprels().iter().map(|s| s.to_string()).collect::<Vec<_>>())
            .unwrap();
        let r = score(
            &Treebank::new("p", vec![pred]),
            &Treebank::new("g", vec![gold]),
            ScoreOptions { exclude_punct, coarse_labels: coarse },
        )
        .unwrap();
        prop_assert!(r.las <= r.uas && r.lem <= r.uem);
        let correct: usize = r.per_relation.values().map(|s| s.correct).sum();
        let support: usize = r.per_relation.values().map(|s| s.gold_support).sum();
        prop_assert_eq!(support, r.token_count);
        if r.token_count > 0 {
            prop_assert!((correct as f64 * 100.0 / r.token_count as f64 - r.las).abs() < 1e-9);
        }
    }

    #[test]
    fn collapse_orders_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=12);
        let tree = common::random_tree(&mut rng, n);
        let mut kept: Vec<usize> = (1..=n).filter(|_| rng.gen_bool(0.4)).collect();
        if kept.is_empty() {
            kept.push(n);
        }
        let a = Alignment::from_sentence_indices(&kept).unwrap();
        let dfs = project_tree_with(&tree, &a, CollapseOrder::DepthFirst).unwrap();
        let bfs = project_tree_with(&tree, &a, CollapseOrder::ClosestToRoot).unwrap();
        prop_assert_eq!(dfs.tree.heads(), bfs.tree.heads());
        prop_assert_eq!(dfs.tree.deprels(), bfs.tree.deprels());
    }

    #[test]
    fn reparse_beats_every_voter(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=9);
        let trees: Vec<DepTree> = (0..rng.gen_range(1..=6)).map(|_| common::random_tree(&mut rng, n)).collect();
        let refs: Vec<&DepTree> = trees.iter().collect();
        let votes = build_votes(&refs).unwrap();
        let r = reparse(&votes, ReparseOptions { force_single_root: true });
        prop_assert!(common::is_valid_tree(&r.heads));
        for t in &trees {
            prop_assert!(r.weight + 1e-9 >= votes.score(&t.heads()));
        }
    }
}

#[test]
fn oracle_replays_projective_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut replayed = 0;
    let mut rejected = 0;
    while replayed < 1_000 {
        let n = rng.gen_range(1..=10);
        let tree = common::random_tree(&mut rng, n);
        match static_oracle(&tree) {
            Ok(actions) => {
                assert!(tree.is_projective());
                let (heads, labels) = replay(n, &actions).unwrap();
                assert_eq!(heads, tree.heads());
                assert_eq!(labels, tree.deprels());
                replayed += 1;
            }
            Err(_) => {
                assert!(!tree.is_projective());
                rejected += 1;
            }
        }
    }
    assert!(rejected > 0);
}

#[test]
fn parser_output_always_validates() {
    let mut g = NewsGenerator::new(3);
    let tb = g.body_treebank("train", 200);
    let model = train(&[Stage::new(&tb, 2)], 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..300 {
        let n = rng.gen_range(1..=15);
        let t = common::random_tree(&mut rng, n);
        let parsed = model.parse(&t);
        assert!(validate(&parsed).is_empty());
        assert_eq!(parsed.forms(), t.forms());
    }
}

#[test]
fn synthetic_pairs_always_align() {
    let mut g = NewsGenerator::new(12);
    for p in g.news_pairs("n", 2_000) {
        assert!(align_subsequence(&p.headline, &p.lead.forms(), false).is_some());
        assert!(validate(&p.gold_headline).is_empty());
    }
}
