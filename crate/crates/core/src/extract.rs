//! Candidate dependency extraction from Lean-style statement code.
//!
//! Identifier grammar: a segment is a letter or `_` followed by letters,
//! digits, `_`, `'` or subscript characters; a token is one or more segments
//! joined by `.`. A dot only joins when a segment character sits on its left
//! and a segment-starting character on its right, so `f.Injective}.ncard`
//! yields `f.Injective` and `ncard`, and `x.1` yields `x`.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::index::{DependencyIndex, MatchStatus};

/// Lean 4 keyword list shipped with the crate.
pub const LEAN4_KEYWORDS: &str = include_str!("../data/lean4_keywords.txt");

fn is_subscript(c: char) -> bool {
    ('\u{2080}'..='\u{209C}').contains(&c)
}

fn is_segment_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_segment_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || is_subscript(c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Lexeme {
    Ident(String),
    Sym(char),
}

fn lex(code: &str) -> Vec<Lexeme> {
    let chars: Vec<char> = code.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if is_segment_start(c) {
            let mut j = i + 1;
            loop {
                while j < chars.len() && is_segment_char(chars[j]) {
                    j += 1;
                }
                if j + 1 < chars.len() && chars[j] == '.' && is_segment_start(chars[j + 1]) {
                    j += 2;
                } else {
                    break;
                }
            }
            out.push(Lexeme::Ident(chars[i..j].iter().collect()));
            i = j;
        } else {
            out.push(Lexeme::Sym(c));
            i += 1;
        }
    }
    out
}

/// Identifier tokens in order of occurrence, repeats included.
pub fn tokenize(code: &str) -> Vec<String> {
    lex(code)
        .into_iter()
        .filter_map(|l| match l {
            Lexeme::Ident(s) => Some(s),
            Lexeme::Sym(_) => None,
        })
        .collect()
}

fn is_open(c: char) -> bool {
    matches!(c, '(' | '{' | '[' | '⦃' | '⟨')
}

fn is_close(c: char) -> bool {
    matches!(c, ')' | '}' | ']' | '⦄' | '⟩')
}

/// Single letter optionally followed by digits, subscripts or primes: the
/// shape of `n`, `x₁`, `h₀`, `a'`.
fn is_binder_style(name: &str) -> bool {
    let mut cs = name.chars();
    match cs.next() {
        Some(c) if is_segment_start(c) => {}
        _ => return false,
    }
    cs.all(|c| c.is_numeric() || c == '\'' || is_subscript(c))
}

/// Names introduced by bracketed groups before `:` inside `group`,
/// starting just after the opening bracket. Returns the index past the
/// matching close.
fn collect_group(lex: &[Lexeme], mut j: usize, names: &mut HashSet<String>) -> usize {
    let mut depth = 1;
    let mut naming = true;
    while j < lex.len() && depth > 0 {
        match &lex[j] {
            Lexeme::Sym(c) if is_open(*c) => depth += 1,
            Lexeme::Sym(c) if is_close(*c) => depth -= 1,
            Lexeme::Sym(':') if depth == 1 => naming = false,
            Lexeme::Ident(s) if depth == 1 && naming => {
                names.insert(s.clone());
            }
            _ => {}
        }
        j += 1;
    }
    j
}

/// Names bound in the statement: header binders between the declaration
/// name and the first top-level `:`, plus names bound by quantifiers,
/// lambdas, big operators and set-builder braces in the body.
fn bound_names(lex: &[Lexeme]) -> HashSet<String> {
    let mut names = HashSet::new();

    let decl = lex.iter().position(|l| {
        matches!(l, Lexeme::Ident(s) if matches!(s.as_str(), "theorem" | "lemma" | "def" | "abbrev" | "example"))
    });
    if let Some(k) = decl {
        let mut j = if lex[k] == Lexeme::Ident("example".into()) { k + 1 } else { k + 2 };
        while j < lex.len() {
            match &lex[j] {
                Lexeme::Sym(':') => break,
                Lexeme::Sym(c) if is_open(*c) => j = collect_group(lex, j + 1, &mut names),
                _ => j += 1,
            }
        }
    }

    for (k, l) in lex.iter().enumerate() {
        let binds = match l {
            Lexeme::Sym(c) => matches!(c, '∀' | '∃' | '∑' | '∏' | '⋃' | '⋂' | '⨆' | '⨅'),
            Lexeme::Ident(s) => matches!(s.as_str(), "fun" | "λ" | "Σ" | "Π"),
        };
        if binds {
            let mut j = k + 1;
            if lex.get(j) == Some(&Lexeme::Sym('!')) {
                j += 1;
            }
            while j < lex.len() {
                match &lex[j] {
                    Lexeme::Ident(s) if s != "in" => {
                        names.insert(s.clone());
                        j += 1;
                    }
                    Lexeme::Sym(c) if is_open(*c) => j = collect_group(lex, j + 1, &mut names),
                    _ => break,
                }
            }
        }
        if *l == Lexeme::Sym('{') {
            if let (Some(Lexeme::Ident(s)), Some(Lexeme::Sym(':' | '|' | '∈'))) = (lex.get(k + 1), lex.get(k + 2)) {
                names.insert(s.clone());
            }
        }
    }
    names
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub source: String,
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DropReason {
    /// No component-aligned occurrence, even after stripping a qualifier.
    Unresolved,
    /// Only leading or interior runs of library names.
    Partial,
    /// Not a valid query.
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dropped {
    pub candidate: String,
    pub reason: DropReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyList {
    pub dependencies: Vec<String>,
    pub dropped: Vec<Dropped>,
}

/// Keyword-aware candidate extractor.
#[derive(Debug, Clone)]
pub struct Extractor {
    keywords: HashSet<String>,
}

impl Default for Extractor {
    fn default() -> Self {
        Extractor::from_keyword_list(LEAN4_KEYWORDS)
    }
}

impl Extractor {
    /// One keyword per line; blank lines and `#` comments are ignored.
    pub fn from_keyword_list(text: &str) -> Self {
        let keywords = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect();
        Extractor { keywords }
    }

    pub fn from_keyword_file(path: impl AsRef<Path>) -> std::io::Result<Self> {
        Ok(Self::from_keyword_list(&std::fs::read_to_string(path)?))
    }

    pub fn is_keyword(&self, token: &str) -> bool {
        self.keywords.contains(token)
    }

    pub fn extract_candidates(&self, code: &str) -> CandidateSet {
        let lexemes = lex(code);
        let bound: HashSet<String> = bound_names(&lexemes)
            .into_iter()
            .filter(|n| is_binder_style(n))
            .collect();
        let mut seen = HashSet::new();
        let candidates = lexemes
            .into_iter()
            .filter_map(|l| match l {
                Lexeme::Ident(s) => Some(s),
                Lexeme::Sym(_) => None,
            })
            .filter(|t| !self.is_keyword(t) && !bound.contains(t))
            .filter(|t| seen.insert(t.clone()))
            .collect();
        CandidateSet {
            source: code.to_owned(),
            candidates,
        }
    }

    /// Extracts and resolves in one step.
    pub fn dependencies(&self, index: &DependencyIndex, code: &str) -> DependencyList {
        resolve_dependencies(index, &self.extract_candidates(code))
    }
}

/// Verifies each candidate. A multi-component candidate with no hit at all
/// is retried once without its leading component (`f.Injective` becomes
/// `Injective`).
pub fn resolve_dependencies(index: &DependencyIndex, cs: &CandidateSet) -> DependencyList {
    let mut out = DependencyList::default();
    let mut emitted = HashSet::new();
    for cand in &cs.candidates {
        let mut result = index.lookup(cand);
        if let Ok(r) = &result {
            if r.status == MatchStatus::None {
                if let Some((_, rest)) = cand.split_once('.') {
                    result = index.lookup(rest);
                }
            }
        }
        match result {
            Ok(r) if r.resolves() => {
                for fqn in r.resolved {
                    if emitted.insert(fqn.clone()) {
                        out.dependencies.push(fqn);
                    }
                }
            }
            Ok(r) => out.dropped.push(Dropped {
                candidate: cand.clone(),
                reason: if r.status == MatchStatus::Partial {
                    DropReason::Partial
                } else {
                    DropReason::Unresolved
                },
            }),
            Err(_) => out.dropped.push(Dropped {
                candidate: cand.clone(),
                reason: DropReason::Invalid,
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::LibraryItem;

    const EXAMPLE_3: &str =
        "theorem thm_P (n : ℕ) : {f : Fin n → Fin n | f.Injective}.ncard = n! := by sorry";

    fn dedup(v: Vec<String>) -> Vec<String> {
        let mut seen = HashSet::new();
        v.into_iter().filter(|t| seen.insert(t.clone())).collect()
    }

    fn s(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn tokenize_corpus_examples() {
        assert_eq!(
            tokenize(EXAMPLE_3),
            s(&[
                "theorem", "thm_P", "n", "ℕ", "f", "Fin", "n", "Fin", "n", "f.Injective", "ncard", "n",
                "by", "sorry"
            ])
        );
        assert_eq!(
            dedup(tokenize(EXAMPLE_3)),
            s(&["theorem", "thm_P", "n", "ℕ", "f", "Fin", "f.Injective", "ncard", "by", "sorry"])
        );
        assert_eq!(tokenize("Finset.Icc (-2) 2"), s(&["Finset.Icc"]));
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenize_edge_shapes() {
        assert_eq!(tokenize("x.1 - x.2"), s(&["x", "x"]));
        assert_eq!(tokenize("h₀ h' a_1"), s(&["h₀", "h'", "a_1"]));
        assert_eq!(tokenize("Nat.succ.inj"), s(&["Nat.succ.inj"]));
        assert_eq!(tokenize("a.b. c .d"), s(&["a.b", "c", "d"]));
        assert_eq!(tokenize("n!=m?"), s(&["n", "m"]));
    }

    #[test]
    fn candidates_drop_binders_and_keywords() {
        let ex = Extractor::default();
        assert_eq!(
            ex.extract_candidates(EXAMPLE_3).candidates,
            s(&["thm_P", "ℕ", "Fin", "f.Injective", "ncard"])
        );
        assert_eq!(ex.extract_candidates("theorem t : 1 + 1 = 2 := by sorry").candidates, s(&["t"]));
        assert!(ex.extract_candidates("theorem by sorry fun calc").candidates.is_empty());
    }

    #[test]
    fn header_binders_with_subscripts() {
        let code = "theorem thm_P\n(a : ℕ) (h₀ : a > 0) (h₁ : a + (a + 1) + (a + 2) = 55) :\na = 5 := by sorry";
        assert_eq!(Extractor::default().extract_candidates(code).candidates, s(&["thm_P", "ℕ"]));
    }

    #[test]
    fn long_binder_names_are_kept() {
        let code = "theorem foo (hx : 0 < x) : x = x := by sorry";
        assert_eq!(Extractor::default().extract_candidates(code).candidates, s(&["foo", "hx", "x"]));
    }

    #[test]
    fn custom_keywords() {
        let ex = Extractor::from_keyword_list("# comment\nfoo\n\n");
        assert!(ex.is_keyword("foo"));
        assert!(!ex.is_keyword("theorem"));
    }

    fn toy() -> DependencyIndex {
        DependencyIndex::build(
            ["Fin", "Function.Injective", "Set.ncard", "Nat.sqrt"]
                .iter()
                .map(|n| LibraryItem::new(*n))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn resolution_strips_one_qualifier() {
        let idx = toy();
        let cs = CandidateSet {
            source: String::new(),
            candidates: s(&["Fin", "f.Injective", "ncard"]),
        };
        let deps = resolve_dependencies(&idx, &cs);
        assert_eq!(deps.dependencies, s(&["Fin", "Function.Injective", "Set.ncard"]));
        assert!(deps.dropped.is_empty());

        let deps = resolve_dependencies(&idx, &CandidateSet { source: String::new(), candidates: s(&["thm_P"]) });
        assert!(deps.dependencies.is_empty());
        assert_eq!(deps.dropped, vec![Dropped { candidate: "thm_P".into(), reason: DropReason::Unresolved }]);

        let deps = resolve_dependencies(&idx, &CandidateSet { source: String::new(), candidates: vec![] });
        assert_eq!(deps, DependencyList::default());
    }

    #[test]
    fn partial_only_candidates_are_dropped() {
        let deps = resolve_dependencies(&toy(), &CandidateSet { source: String::new(), candidates: s(&["Nat", "Set"]) });
        assert!(deps.dependencies.is_empty());
        assert!(deps.dropped.iter().all(|d| d.reason == DropReason::Partial));
    }

    #[test]
    fn end_to_end_example() {
        let deps = Extractor::default().dependencies(&toy(), EXAMPLE_3);
        assert_eq!(deps.dependencies, s(&["Fin", "Function.Injective", "Set.ncard"]));
        let dropped: Vec<&str> = deps.dropped.iter().map(|d| d.candidate.as_str()).collect();
        assert_eq!(dropped, vec!["thm_P", "ℕ"]);
    }
}
