mod common;

use common::{mixed_queries, oracle_lookup};
use ddr_core::synth::synthetic_library;
use ddr_core::{DependencyIndex, LibraryItem, MatchStatus};
use proptest::prelude::*;

fn check(names: &[String], queries: &[String]) {
    let index = DependencyIndex::build(names.iter().map(LibraryItem::new).collect()).unwrap();
    for (q, r) in queries.iter().zip(index.verify_batch(queries)) {
        let r = r.unwrap();
        let want = oracle_lookup(names, q);
        assert_eq!(r.status.as_str(), want.status, "query {q:?}");
        assert_eq!(r.resolved, want.resolved, "query {q:?}");
        assert_eq!(r.partial_hits, want.partial_hits, "query {q:?}");
    }
}

#[test]
fn synthetic_libraries_agree_with_scan() {
    for (n, seed) in [(10, 1), (200, 2), (2_000, 3)] {
        let names: Vec<String> = synthetic_library(n, seed).into_iter().map(|i| i.fqn).collect();
        check(&names, &mixed_queries(&names, 2_000, seed));
    }
}

#[test]
fn every_item_resolves_itself() {
    let names: Vec<String> = synthetic_library(3_000, 9).into_iter().map(|i| i.fqn).collect();
    let index = DependencyIndex::build(names.iter().map(LibraryItem::new).collect()).unwrap();
    for name in &names {
        let r = index.lookup(name).unwrap();
        assert_eq!(r.status, MatchStatus::Exact);
        assert!(r.resolved.contains(name));
        assert!(r.resolved.iter().all(|f| f == name || f.ends_with(&format!(".{name}"))));
    }
}

fn component() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["a", "b", "ab", "ba", "Nat", "sqrt", "x"]).prop_map(String::from)
}

fn identifier() -> impl Strategy<Value = String> {
    prop::collection::vec(component(), 1..4).prop_map(|c| c.join("."))
}

proptest! {
    #[test]
    fn dense_collisions_agree_with_scan(
        names in prop::collection::btree_set(identifier(), 1..40),
        extra in prop::collection::vec("[ab.x]{1,6}", 0..20),
    ) {
        let names: Vec<String> = names.into_iter().collect();
        let mut queries = mixed_queries(&names, 50, names.len() as u64);
        queries.extend(extra);
        check(&names, &queries);
    }

    #[test]
    fn results_are_sorted_and_disjoint(names in prop::collection::btree_set(identifier(), 1..30), q in identifier()) {
        let names: Vec<String> = names.into_iter().collect();
        let index = DependencyIndex::build(names.iter().map(LibraryItem::new).collect()).unwrap();
        let r = index.lookup(&q).unwrap();
        prop_assert!(r.resolved.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(r.partial_hits.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(r.partial_hits.iter().all(|p| !r.resolved.contains(p)));
        prop_assert_eq!(r.status == MatchStatus::Exact, names.contains(&q));
    }
}

#[test]
fn invalid_queries_are_errors() {
    let index = DependencyIndex::build(vec![LibraryItem::new("Nat.sqrt")]).unwrap();
    assert!(index.lookup("").is_err());
    assert!(index.lookup("Nat\u{1}sqrt").is_err());
    let batch = index.verify_batch(&["Nat.sqrt", "", "sqrt"]);
    assert!(batch[0].is_ok() && batch[1].is_err() && batch[2].is_ok());
}
