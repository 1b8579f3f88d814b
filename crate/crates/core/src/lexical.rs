//! Lexical select-by-similarity baseline.
//!
//! A transparent stand-in for embedding retrieval: items and queries become
//! bags of lowercase words and items are ranked by cosine similarity of raw
//! term counts. It exists to give the select-top-k paradigm a reproducible
//! baseline, not to compete with learned encoders.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::index::LibraryItem;
use crate::par::{self, Execution};

/// Lowercase words of an identifier: split on `.`, `_` and camel-case
/// boundaries (`IsPrimePow` gives `is`, `prime`, `pow`; `HTTPServer` gives
/// `http`, `server`).
pub fn identifier_words(fqn: &str) -> Vec<String> {
    let mut words = Vec::new();
    for part in fqn.split(|c: char| c == '.' || c == '_' || !c.is_alphanumeric()) {
        let chars: Vec<char> = part.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (prev, cur) = (chars[i - 1], chars[i]);
            let next_lower = chars.get(i + 1).is_some_and(|c| c.is_lowercase());
            let boundary = cur.is_uppercase()
                && (prev.is_lowercase() || prev.is_numeric() || (prev.is_uppercase() && next_lower));
            if boundary {
                words.push(chars[start..i].iter().collect::<String>().to_lowercase());
                start = i;
            }
        }
        if start < chars.len() {
            words.push(chars[start..].iter().collect::<String>().to_lowercase());
        }
    }
    words
}

/// Lowercase alphanumeric runs of free text.
pub fn text_words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

type TermVector = HashMap<String, f64>;

fn vectorize(words: Vec<String>) -> (TermVector, f64) {
    let mut v = TermVector::new();
    for w in words {
        *v.entry(w).or_insert(0.0) += 1.0;
    }
    let norm = v.values().map(|x| x * x).sum::<f64>().sqrt();
    (v, norm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexicalHit {
    pub fqn: String,
    pub score: f64,
    /// The query shared no words with this item; it was ranked by name only.
    pub zero_score: bool,
}

/// Precomputed term vectors for a library.
pub struct LexicalRetriever {
    names: Vec<String>,
    vectors: Vec<(TermVector, f64)>,
    exec: Execution,
}

impl LexicalRetriever {
    pub fn new(library: &[LibraryItem]) -> Self {
        Self::with_execution(library, Execution::default())
    }

    pub fn with_execution(library: &[LibraryItem], exec: Execution) -> Self {
        let vectors = par::map_ordered(exec, library, |item| {
            let mut words = identifier_words(&item.fqn);
            if let Some(doc) = &item.doc {
                words.extend(text_words(doc));
            }
            vectorize(words)
        });
        LexicalRetriever {
            names: library.iter().map(|i| i.fqn.clone()).collect(),
            vectors,
            exec,
        }
    }

    /// Top `k` items by descending cosine similarity, ties by name.
    pub fn retrieve(&self, informal: &str, k: usize) -> Vec<LexicalHit> {
        if k == 0 {
            return Vec::new();
        }
        let (query, qnorm) = vectorize(text_words(informal));
        let scores = par::map_ordered(self.exec, &self.vectors, |(v, norm)| {
            if qnorm == 0.0 || *norm == 0.0 {
                return 0.0;
            }
            let dot: f64 = query.iter().filter_map(|(w, x)| v.get(w).map(|y| x * y)).sum();
            dot / (qnorm * norm)
        });
        let mut order: Vec<usize> = (0..self.names.len()).collect();
        order.sort_by(|&a, &b| {
            scores[b]
                .total_cmp(&scores[a])
                .then_with(|| self.names[a].cmp(&self.names[b]))
        });
        order
            .into_iter()
            .take(k)
            .map(|i| LexicalHit {
                fqn: self.names[i].clone(),
                score: scores[i],
                zero_score: scores[i] == 0.0,
            })
            .collect()
    }
}

pub fn lexical_retrieve(library: &[LibraryItem], informal: &str, k: usize) -> Vec<LexicalHit> {
    LexicalRetriever::new(library).retrieve(informal, k)
}
