//! Throughput measurement: index build time and verification rate, with an
//! optional linear-scan baseline for comparison.

use std::collections::BTreeSet;
use std::time::Instant;

use memchr::memmem::Finder;
use serde::{Deserialize, Serialize};

use crate::index::{DependencyIndex, IndexError, LibraryItem, MatchResult, MatchStatus};
use crate::par::{self, Execution};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    /// Library item count.
    #[serde(rename = "N")]
    pub n: usize,
    /// Query count.
    #[serde(rename = "M")]
    pub m: usize,
    /// Mean identifier length in bytes.
    pub d: f64,
    /// Mean query length in bytes.
    pub s: f64,
    pub build_seconds: f64,
    pub verify_seconds: f64,
    pub queries_per_second: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brute_force_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brute_force_queries_per_second: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speedup: Option<f64>,
    pub execution: Execution,
    pub builder: String,
}

/// `m` queries: 40% existing names, 30% trailing component runs of existing
/// names, 30% random strings. Deterministic in `seed`.
pub fn bench_queries(items: &[LibraryItem], m: usize, seed: u64) -> Vec<String> {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_._";
    let mut rng = SplitMix64::new(seed);
    (0..m)
        .map(|_| {
            let roll = rng.below(10);
            if roll < 4 {
                rng.choose(items).fqn.clone()
            } else if roll < 7 {
                let fqn = &rng.choose(items).fqn;
                let parts: Vec<&str> = fqn.split('.').collect();
                let drop = rng.below(parts.len());
                parts[drop..].join(".")
            } else {
                let len = 3 + rng.below(18);
                (0..len).map(|_| *rng.choose(ALPHABET) as char).collect()
            }
        })
        .collect()
}

/// Per-query linear scan over every identifier; the O((s + d)MN) baseline.
pub struct LinearScanMatcher<'a> {
    items: &'a [LibraryItem],
}

impl<'a> LinearScanMatcher<'a> {
    pub fn new(items: &'a [LibraryItem]) -> Self {
        LinearScanMatcher { items }
    }

    pub fn lookup(&self, query: &str) -> MatchResult {
        let q = query.as_bytes();
        let interior = [b".", q, b"."].concat();
        let finder = Finder::new(&interior);
        let mut exact = false;
        let mut resolved = BTreeSet::new();
        let mut partial = BTreeSet::new();
        for item in self.items {
            let f = item.fqn.as_bytes();
            if f.len() < q.len() {
                continue;
            }
            if f == q {
                exact = true;
                resolved.insert(item.fqn.as_str());
                continue;
            }
            let tail = f.len() - q.len();
            if f.ends_with(q) && f[tail - 1] == b'.' {
                resolved.insert(item.fqn.as_str());
            } else if (f.starts_with(q) && f[q.len()] == b'.') || finder.find(f).is_some() {
                partial.insert(item.fqn.as_str());
            }
        }
        let status = if exact {
            MatchStatus::Exact
        } else if !resolved.is_empty() || !partial.is_empty() {
            MatchStatus::Partial
        } else {
            MatchStatus::None
        };
        MatchResult {
            query: query.to_owned(),
            status,
            resolved: resolved.into_iter().map(str::to_owned).collect(),
            partial_hits: partial.into_iter().map(str::to_owned).collect(),
        }
    }
}

fn mean_len<'a, I: Iterator<Item = &'a str>>(it: I) -> f64 {
    let (sum, n) = it.fold((0usize, 0usize), |(s, n), x| (s + x.len(), n + 1));
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

/// Builds the index, verifies `m` seeded queries, and with `compare` also
/// runs the linear-scan matcher on the same queries.
pub fn run_bench(
    items: Vec<LibraryItem>,
    m: usize,
    seed: u64,
    compare: bool,
    exec: Execution,
) -> Result<BenchmarkReport, IndexError> {
    let start = Instant::now();
    let index = DependencyIndex::build(items)?;
    let build_seconds = start.elapsed().as_secs_f64();

    let queries = bench_queries(index.items(), m, seed);
    let start = Instant::now();
    let results = index.verify_batch_with(&queries, exec);
    let verify_seconds = start.elapsed().as_secs_f64();
    std::hint::black_box(&results);

    let (brute_force_seconds, brute_rate, speedup) = if compare {
        let scan = LinearScanMatcher::new(index.items());
        let start = Instant::now();
        let naive = par::map_ordered(exec, &queries, |q| scan.lookup(q));
        let secs = start.elapsed().as_secs_f64();
        std::hint::black_box(&naive);
        let rate = m as f64 / secs;
        (Some(secs), Some(rate), Some(secs / verify_seconds))
    } else {
        (None, None, None)
    };

    Ok(BenchmarkReport {
        n: index.len(),
        m,
        d: mean_len(index.items().iter().map(|i| i.fqn.as_str())),
        s: mean_len(queries.iter().map(String::as_str)),
        build_seconds,
        verify_seconds,
        queries_per_second: m as f64 / verify_seconds,
        brute_force_seconds,
        brute_force_queries_per_second: brute_rate,
        speedup,
        execution: exec.effective(),
        builder: crate::sa::builder_name().to_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::synthetic_library;

    #[test]
    fn scan_agrees_with_index() {
        let lib = synthetic_library(3_000, 11);
        let idx = DependencyIndex::build(lib.clone()).unwrap();
        let scan = LinearScanMatcher::new(idx.items());
        for q in bench_queries(idx.items(), 500, 5) {
            assert_eq!(scan.lookup(&q), idx.lookup(&q).unwrap(), "{q}");
        }
    }

    #[test]
    fn toy_smoke() {
        let lib: Vec<LibraryItem> = ["Nat.sqrt", "Real.sqrt", "Int.sqrt", "Nat.factorial", "Nat.factorization"]
            .iter()
            .map(|n| LibraryItem::new(*n))
            .collect();
        let r = run_bench(lib.clone(), 100, 1, true, Execution::Sequential).unwrap();
        assert_eq!(r.n, 5);
        assert_eq!(r.m, 100);
        assert!(r.queries_per_second.is_finite() && r.queries_per_second > 0.0);
        assert!(r.speedup.unwrap() > 0.0);
        assert_eq!(bench_queries(&lib, 100, 9), bench_queries(&lib, 100, 9));
    }
}
