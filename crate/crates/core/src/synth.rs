//! Seeded synthetic libraries and planted-label corpora.
//!
//! Names look like dot-qualified library identifiers: capitalised namespace
//! components followed by a snake_case leaf, 1 to 4 components deep.

use std::collections::HashSet;

use crate::dataset::CorpusSample;
use crate::index::LibraryItem;
use crate::rng::SplitMix64;

const SYLLABLES: &[&str] = &[
    "ab", "al", "an", "ar", "ba", "be", "ca", "co", "de", "di", "el", "en", "fa", "fi", "ga", "go",
    "ha", "he", "in", "is", "ka", "ko", "la", "li", "ma", "mo", "na", "ne", "or", "pa", "po", "qu",
    "ra", "re", "sa", "si", "ta", "to", "ul", "un", "va", "ve", "wa", "xe", "yo", "za", "zu", "ri",
];

fn word(rng: &mut SplitMix64) -> String {
    let n = 1 + rng.below(3);
    (0..n).map(|_| *rng.choose(SYLLABLES)).collect()
}

fn capitalised(rng: &mut SplitMix64) -> String {
    let w = word(rng);
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => w,
    }
}

fn leaf(rng: &mut SplitMix64) -> String {
    let parts = 1 + rng.below(3);
    (0..parts).map(|_| word(rng)).collect::<Vec<_>>().join("_")
}

fn depth(rng: &mut SplitMix64) -> usize {
    // 1: 5%, 2: 45%, 3: 35%, 4: 15%
    match rng.below(100) {
        0..=4 => 1,
        5..=49 => 2,
        50..=84 => 3,
        _ => 4,
    }
}

/// `n` distinct identifiers, deterministic in `seed`. Namespaces are drawn
/// from a pool of about `sqrt(n)` names so that short names collide across
/// namespaces the way real libraries do.
pub fn synthetic_library(n: usize, seed: u64) -> Vec<LibraryItem> {
    let mut rng = SplitMix64::new(seed);
    let pool_size = ((n as f64).sqrt() as usize).max(8);
    let namespaces: Vec<String> = (0..pool_size).map(|_| capitalised(&mut rng)).collect();
    let mut seen = HashSet::with_capacity(n);
    let mut items = Vec::with_capacity(n);
    while items.len() < n {
        let d = depth(&mut rng);
        let mut parts: Vec<String> = (1..d).map(|_| rng.choose(&namespaces).clone()).collect();
        parts.push(leaf(&mut rng));
        let fqn = parts.join(".");
        if seen.insert(fqn.clone()) {
            let doc = (0..2).map(|_| word(&mut rng)).collect::<Vec<_>>().join(" ");
            items.push(LibraryItem::new(fqn).with_doc(doc).with_kind("theorem"));
        }
    }
    items
}

/// A corpus sample together with the dependency list it was built from.
#[derive(Debug, Clone)]
pub struct PlantedSample {
    pub sample: CorpusSample,
    pub planted: Vec<String>,
}

/// Identifiers that resolve only to themselves: no other item ends with
/// `.` + the identifier.
pub fn self_resolving(library: &[LibraryItem]) -> Vec<String> {
    let mut proper_suffixes = HashSet::new();
    for item in library {
        let mut rest = item.fqn.as_str();
        while let Some((_, tail)) = rest.split_once('.') {
            proper_suffixes.insert(tail);
            rest = tail;
        }
    }
    library
        .iter()
        .filter(|i| !proper_suffixes.contains(i.fqn.as_str()))
        .map(|i| i.fqn.clone())
        .collect()
}

/// Synthetic statements that mention 0 to 4 planted identifiers amid
/// binders, numerals and keywords. Planted identifiers are drawn from
/// [`self_resolving`] names, so labeling must recover them exactly and in
/// order.
pub fn planted_corpus(library: &[LibraryItem], n: usize, seed: u64) -> Vec<PlantedSample> {
    let pool = self_resolving(library);
    assert!(pool.len() >= 4, "library too small to plant dependencies");
    let mut rng = SplitMix64::new(seed);
    let ops = ["+", "*", "≤", "<", "="];
    (0..n)
        .map(|i| {
            let k = rng.below(5);
            let mut planted: Vec<String> = Vec::with_capacity(k);
            while planted.len() < k {
                let c = rng.choose(&pool);
                if !planted.contains(c) {
                    planted.push(c.clone());
                }
            }
            let mut body = String::from("x");
            for dep in &planted {
                body.push_str(&format!(" {} ({dep} x {})", rng.choose(&ops), rng.below(100)));
            }
            let formal = format!("theorem thm_P (x : ℕ) (h₀ : 0 < x) :\n∀ y, {body} = y := by sorry");
            PlantedSample {
                sample: CorpusSample {
                    id: format!("s{i}"),
                    informal_statement: format!("Show that statement {i} holds."),
                    formal_statement: formal,
                    difficulty: rng.below(11) as u8,
                },
                planted,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::validate_identifier;

    #[test]
    fn library_is_valid_unique_and_seeded() {
        let lib = synthetic_library(2_000, 3);
        assert_eq!(lib.len(), 2_000);
        assert!(lib.iter().all(|i| validate_identifier(&i.fqn).is_ok()));
        let names: HashSet<&str> = lib.iter().map(|i| i.fqn.as_str()).collect();
        assert_eq!(names.len(), 2_000);
        assert_eq!(lib, synthetic_library(2_000, 3));
        assert_ne!(lib, synthetic_library(2_000, 4));
        let depths: HashSet<usize> = lib.iter().map(|i| i.fqn.split('.').count()).collect();
        assert_eq!(depths, HashSet::from([1, 2, 3, 4]));
    }

    #[test]
    fn self_resolving_excludes_shadowed_names() {
        let lib: Vec<LibraryItem> = ["a.b", "b", "c"].iter().map(|s| LibraryItem::new(*s)).collect();
        assert_eq!(self_resolving(&lib), vec!["a.b", "c"]);
    }
}
