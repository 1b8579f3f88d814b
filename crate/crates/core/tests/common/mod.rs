//! Reference implementations written independently of the library, for
//! comparison in tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use ddr_core::rng::SplitMix64;

/// Suffix array by sorting suffix slices.
pub fn naive_suffix_array(text: &[u8]) -> Vec<usize> {
    let mut sa: Vec<usize> = (0..text.len()).collect();
    sa.sort_by(|&a, &b| text[a..].cmp(&text[b..]));
    sa
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleMatch {
    pub status: &'static str,
    pub resolved: Vec<String>,
    pub partial_hits: Vec<String>,
}

/// Per-identifier string tests: exact equality, `.q` at the end, `q.` at the
/// start, or `.q.` inside.
pub fn oracle_lookup<S: AsRef<str>>(names: &[S], q: &str) -> OracleMatch {
    let tail = format!(".{q}");
    let head = format!("{q}.");
    let inner = format!(".{q}.");
    let mut exact = false;
    let mut resolved = BTreeSet::new();
    let mut partial = BTreeSet::new();
    for name in names {
        let f = name.as_ref();
        if f == q {
            exact = true;
        }
        if f == q || f.ends_with(&tail) {
            resolved.insert(f.to_string());
        }
        if f.starts_with(&head) || f.contains(&inner) {
            partial.insert(f.to_string());
        }
    }
    let partial_hits: Vec<String> = partial.difference(&resolved).cloned().collect();
    let status = if exact {
        "exact"
    } else if !resolved.is_empty() || !partial_hits.is_empty() {
        "partial"
    } else {
        "none"
    };
    OracleMatch {
        status,
        resolved: resolved.into_iter().collect(),
        partial_hits,
    }
}

/// Mixed query workload: existing names, trailing component runs, leading
/// component runs, unaligned substrings and random garbage.
pub fn mixed_queries(names: &[String], m: usize, seed: u64) -> Vec<String> {
    let mut rng = SplitMix64::new(seed ^ 0x5eed);
    let alphabet = b"abcdefghijklmnopqrstuvwxyzABCNZ._";
    (0..m)
        .map(|_| {
            let name = &names[rng.below(names.len())];
            let parts: Vec<&str> = name.split('.').collect();
            match rng.below(5) {
                0 => name.clone(),
                1 => parts[rng.below(parts.len())..].join("."),
                2 => parts[..1 + rng.below(parts.len())].join("."),
                3 => {
                    let b = name.as_bytes();
                    let i = rng.below(b.len());
                    let j = i + 1 + rng.below(b.len() - i);
                    String::from_utf8_lossy(&b[i..j]).into_owned()
                }
                _ => {
                    let len = 1 + rng.below(12);
                    (0..len).map(|_| alphabet[rng.below(alphabet.len())] as char).collect()
                }
            }
        })
        .collect()
}

/// True when the dot components of the shorter identifier end the longer.
pub fn oracle_ident_match(a: &str, b: &str) -> bool {
    a == b || a.ends_with(&format!(".{b}")) || b.ends_with(&format!(".{a}"))
}

/// (precision, recall, f1) with the empty-set conventions (1,1,1), (0,0,0)
/// and (0,1,0).
pub fn oracle_score(pred: &[String], gold: &[String]) -> (f64, f64, f64) {
    let p: BTreeSet<&String> = pred.iter().collect();
    let g: BTreeSet<&String> = gold.iter().collect();
    match (p.is_empty(), g.is_empty()) {
        (true, true) => return (1.0, 1.0, 1.0),
        (true, false) => return (0.0, 0.0, 0.0),
        (false, true) => return (0.0, 1.0, 0.0),
        _ => {}
    }
    let tp_p = p.iter().filter(|x| g.iter().any(|y| oracle_ident_match(x, y))).count() as f64;
    let tp_g = g.iter().filter(|y| p.iter().any(|x| oracle_ident_match(x, y))).count() as f64;
    let precision = tp_p / p.len() as f64;
    let recall = tp_g / g.len() as f64;
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    (precision, recall, f1)
}

/// Mean and population standard deviation by two passes.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
