mod common;

use common::{mean_std, oracle_score};
use ddr_core::eval::{aggregate, score_sample, RetrievalScore};
use proptest::prelude::*;

fn ident() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!["Nat", "Real", "sqrt", "add", "comm"]), 1..4).prop_map(|c| c.join("."))
}

fn idents() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(ident(), 0..6)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

#[test]
fn hand_case_and_empty_conventions() {
    let s = score_sample(&["Nat.sqrt", "Real.pi"], &["Nat.sqrt"]);
    assert_eq!((s.precision, s.recall), (0.5, 1.0));
    assert!(close(s.f1, 2.0 / 3.0));
    let none: [&str; 0] = [];
    let s = score_sample(&none, &none);
    assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    let s = score_sample(&none, &["a"]);
    assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    let s = score_sample(&["a"], &none);
    assert_eq!((s.precision, s.recall, s.f1), (0.0, 1.0, 0.0));
}

proptest! {
    #[test]
    fn matches_oracle(p in idents(), g in idents()) {
        let s = score_sample(&p, &g);
        let (op, or, of) = oracle_score(&p, &g);
        prop_assert!(close(s.precision, op) && close(s.recall, or) && close(s.f1, of));
    }

    #[test]
    fn bounded(p in idents(), g in idents()) {
        let s = score_sample(&p, &g);
        for x in [s.precision, s.recall, s.f1] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        prop_assert!(s.f1 <= s.precision.max(s.recall) + 1e-12);
    }

    #[test]
    fn swapping_sides_swaps_precision_and_recall(p in idents(), g in idents()) {
        prop_assume!(!p.is_empty() && !g.is_empty());
        let a = score_sample(&p, &g);
        let b = score_sample(&g, &p);
        prop_assert!(close(a.precision, b.recall) && close(a.recall, b.precision) && close(a.f1, b.f1));
    }

    #[test]
    fn order_does_not_matter(p in idents(), g in idents()) {
        let mut pr = p.clone();
        pr.reverse();
        let mut gr = g.clone();
        gr.reverse();
        prop_assert_eq!(score_sample(&p, &g), score_sample(&pr, &gr));
    }

    #[test]
    fn adding_a_gold_name_never_lowers_precision(p in idents(), g in idents(), extra in ident()) {
        prop_assume!(!g.is_empty());
        let before = score_sample(&p, &g);
        let mut g2 = g.clone();
        g2.push(extra);
        prop_assert!(score_sample(&p, &g2).precision >= before.precision - 1e-12);
    }

    #[test]
    fn aggregate_matches_direct_arithmetic(scores in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..200)) {
        let scores: Vec<RetrievalScore> = scores.into_iter().map(|(p, r)| RetrievalScore::from_precision_recall(p, r)).collect();
        let agg = aggregate(&scores).unwrap();
        let (mp, sp) = mean_std(&scores.iter().map(|s| s.precision).collect::<Vec<_>>());
        let (mr, sr) = mean_std(&scores.iter().map(|s| s.recall).collect::<Vec<_>>());
        let (mf, sf) = mean_std(&scores.iter().map(|s| s.f1).collect::<Vec<_>>());
        prop_assert!(close(agg.mean.precision, mp) && close(agg.std.precision, sp));
        prop_assert!(close(agg.mean.recall, mr) && close(agg.std.recall, sr));
        prop_assert!(close(agg.mean.f1, mf) && close(agg.std.f1, sf));
        prop_assert_eq!(agg.n, scores.len());
    }
}

#[test]
fn empty_corpus_is_an_error() {
    assert!(aggregate(&[]).is_err());
}
