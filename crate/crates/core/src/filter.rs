//! Verification filter for generated candidates.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::index::{DependencyIndex, MatchStatus};
use crate::par::Execution;

/// A generated candidate that did not resolve. `status` is `None` for
/// queries that could not be looked up at all.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejected {
    pub candidate: String,
    pub status: Option<MatchStatus>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredCandidates {
    pub dependencies: Vec<String>,
    pub dropped: Vec<Rejected>,
}

/// Trims whitespace and backticks; empty results disappear.
pub fn normalize_candidate(raw: &str) -> Option<String> {
    let t = raw.trim().trim_matches('`').trim();
    (!t.is_empty()).then(|| t.to_owned())
}

/// Verifies candidates in one batch and keeps every resolution, deduplicated
/// in first-resolution order. Generator order is preserved; nothing is
/// truncated.
pub fn filter_candidates<S: AsRef<str>>(
    index: &DependencyIndex,
    candidates: &[S],
    exec: Execution,
) -> FilteredCandidates {
    let normalized: Vec<String> = candidates
        .iter()
        .filter_map(|c| normalize_candidate(c.as_ref()))
        .collect();
    let results = index.verify_batch_with(&normalized, exec);
    let mut out = FilteredCandidates::default();
    let mut emitted = HashSet::new();
    for (cand, result) in normalized.into_iter().zip(results) {
        match result {
            Ok(r) if r.resolves() => {
                for fqn in r.resolved {
                    if emitted.insert(fqn.clone()) {
                        out.dependencies.push(fqn);
                    }
                }
            }
            Ok(r) => out.dropped.push(Rejected {
                candidate: cand,
                status: Some(r.status),
            }),
            Err(_) => out.dropped.push(Rejected {
                candidate: cand,
                status: None,
            }),
        }
    }
    out
}
