//! The dependency index: every library identifier joined by a delimiter
//! byte, plus a suffix array over that text.
//!
//! Text layout for items `f0, f1, ...` is `DELIM f0 DELIM f1 DELIM ... DELIM`.
//! Because identifiers never contain [`DELIM`], exactness and component
//! alignment become plain substring patterns:
//!
//! | pattern            | meaning                              | verdict     |
//! |--------------------|--------------------------------------|-------------|
//! | `DELIM q DELIM`    | `q` is a whole identifier            | resolves    |
//! | `. q DELIM`        | `q` is a trailing component run      | resolves    |
//! | `DELIM q .`        | `q` is a leading component run       | partial hit |
//! | `. q .`            | `q` is an interior component run     | partial hit |

use std::collections::HashSet;
use std::ops::Range;
use std::time::SystemTime;

use serde::{Deserialize, Serialize};

use crate::par::{self, Execution};
use crate::sa;

/// Separator between identifiers in the index text.
pub const DELIM: u8 = 0x01;

/// Version written to and accepted from index files.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryItem {
    pub fqn: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc: Option<String>,
}

impl LibraryItem {
    pub fn new(fqn: impl Into<String>) -> Self {
        LibraryItem {
            fqn: fqn.into(),
            kind: None,
            signature: None,
            doc: None,
        }
    }

    pub fn with_doc(mut self, doc: impl Into<String>) -> Self {
        self.doc = Some(doc.into());
        self
    }

    pub fn with_kind(mut self, kind: impl Into<String>) -> Self {
        self.kind = Some(kind.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum IdentifierProblem {
    #[error("identifier is empty")]
    Empty,
    #[error("identifier contains the delimiter byte 0x01")]
    ContainsDelimiter,
    #[error("identifier has an empty dot-component")]
    EmptyComponent,
}

/// Checks the ingest rules for a fully-qualified name.
pub fn validate_identifier(fqn: &str) -> Result<(), IdentifierProblem> {
    if fqn.is_empty() {
        return Err(IdentifierProblem::Empty);
    }
    if fqn.as_bytes().contains(&DELIM) {
        return Err(IdentifierProblem::ContainsDelimiter);
    }
    if fqn.split('.').any(str::is_empty) {
        return Err(IdentifierProblem::EmptyComponent);
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("library is empty")]
    EmptyLibrary,
    #[error("invalid identifier {fqn:?}: {reason}")]
    InvalidIdentifier {
        fqn: String,
        reason: IdentifierProblem,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PositionError {
    #[error("position {0} is a delimiter byte")]
    DelimiterPosition(usize),
    #[error("position {pos} is outside the {len}-byte text")]
    OutOfRange { pos: usize, len: usize },
}

/// A query that could not be looked up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("invalid query {query:?}: {reason}")]
pub struct QueryError {
    pub query: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchStatus {
    Exact,
    Partial,
    None,
}

impl MatchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchStatus::Exact => "exact",
            MatchStatus::Partial => "partial",
            MatchStatus::None => "none",
        }
    }
}

/// Verdict for one candidate identifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub query: String,
    pub status: MatchStatus,
    /// Items the query denotes: the exact item and every item the query is
    /// a trailing component run of. Sorted.
    pub resolved: Vec<String>,
    /// Items the query is a leading or interior component run of, minus
    /// `resolved`. Sorted.
    pub partial_hits: Vec<String>,
}

impl MatchResult {
    pub fn resolves(&self) -> bool {
        !self.resolved.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexInfo {
    pub item_count: usize,
    pub text_bytes: usize,
    /// Seconds since the Unix epoch.
    pub built_at: u64,
    pub format_version: u32,
}

/// A byte text together with its suffix array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixIndex {
    text: Vec<u8>,
    suffixes: Vec<usize>,
}

impl SuffixIndex {
    pub fn new(text: Vec<u8>) -> Self {
        let suffixes = sa::suffix_array(&text);
        SuffixIndex { text, suffixes }
    }

    /// Wraps a precomputed suffix array. The caller vouches for its order.
    pub(crate) fn from_parts(text: Vec<u8>, suffixes: Vec<usize>) -> Self {
        SuffixIndex { text, suffixes }
    }

    pub fn text(&self) -> &[u8] {
        &self.text
    }

    pub fn suffix_array(&self) -> &[usize] {
        &self.suffixes
    }

    /// Half-open range of the suffix array whose suffixes start with `pattern`.
    pub fn prefix_range(&self, pattern: &[u8]) -> Range<usize> {
        let text = &self.text;
        let cmp = |pos: usize| {
            let suffix = &text[pos..];
            suffix[..suffix.len().min(pattern.len())].cmp(pattern)
        };
        let lo = self
            .suffixes
            .partition_point(|&p| cmp(p) == std::cmp::Ordering::Less);
        let hi = lo
            + self.suffixes[lo..].partition_point(|&p| cmp(p) != std::cmp::Ordering::Greater);
        lo..hi
    }

    /// Text positions at which `pattern` occurs, in suffix order.
    pub fn occurrences(&self, pattern: &[u8]) -> &[usize] {
        &self.suffixes[self.prefix_range(pattern)]
    }
}

/// Immutable, queryable index over one library.
#[derive(Debug, Clone)]
pub struct DependencyIndex {
    suffixes: SuffixIndex,
    item_offsets: Vec<usize>,
    items: Vec<LibraryItem>,
    built_at: SystemTime,
}

impl DependencyIndex {
    /// Builds the index, logging a warning for each duplicate identifier.
    pub fn build(items: Vec<LibraryItem>) -> Result<Self, IndexError> {
        let (index, duplicates) = Self::build_reporting(items)?;
        for fqn in &duplicates {
            log::warn!("duplicate library identifier {fqn:?} ignored");
        }
        Ok(index)
    }

    /// Builds the index and returns the duplicate identifiers that were
    /// dropped (later occurrences lose to the first).
    pub fn build_reporting(items: Vec<LibraryItem>) -> Result<(Self, Vec<String>), IndexError> {
        if items.is_empty() {
            return Err(IndexError::EmptyLibrary);
        }
        for item in &items {
            validate_identifier(&item.fqn).map_err(|reason| IndexError::InvalidIdentifier {
                fqn: item.fqn.clone(),
                reason,
            })?;
        }

        let mut seen = HashSet::with_capacity(items.len());
        let mut duplicates = Vec::new();
        let mut kept = Vec::with_capacity(items.len());
        for item in items {
            if seen.contains(item.fqn.as_str()) {
                duplicates.push(item.fqn);
            } else {
                seen.insert(item.fqn.clone());
                kept.push(item);
            }
        }
        drop(seen);

        let (text, item_offsets) = layout(&kept);
        let index = DependencyIndex {
            suffixes: SuffixIndex::new(text),
            item_offsets,
            items: kept,
            built_at: SystemTime::now(),
        };
        Ok((index, duplicates))
    }

    pub(crate) fn from_parts(
        suffixes: SuffixIndex,
        item_offsets: Vec<usize>,
        items: Vec<LibraryItem>,
        built_at: SystemTime,
    ) -> Self {
        DependencyIndex {
            suffixes,
            item_offsets,
            items,
            built_at,
        }
    }

    pub fn items(&self) -> &[LibraryItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn text(&self) -> &[u8] {
        self.suffixes.text()
    }

    pub fn suffix_array(&self) -> &[usize] {
        self.suffixes.suffix_array()
    }

    pub fn item_offsets(&self) -> &[usize] {
        &self.item_offsets
    }

    pub fn suffix_index(&self) -> &SuffixIndex {
        &self.suffixes
    }

    pub fn built_at(&self) -> SystemTime {
        self.built_at
    }

    pub fn info(&self) -> IndexInfo {
        IndexInfo {
            item_count: self.items.len(),
            text_bytes: self.text().len(),
            built_at: self
                .built_at
                .duration_since(SystemTime::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            format_version: FORMAT_VERSION,
        }
    }

    pub fn prefix_range(&self, pattern: &[u8]) -> Range<usize> {
        self.suffixes.prefix_range(pattern)
    }

    /// Index of the item whose bytes cover text position `pos`.
    pub fn item_of_position(&self, pos: usize) -> Result<usize, PositionError> {
        let text = self.text();
        if pos >= text.len() {
            return Err(PositionError::OutOfRange {
                pos,
                len: text.len(),
            });
        }
        if text[pos] == DELIM {
            return Err(PositionError::DelimiterPosition(pos));
        }
        Ok(self.item_offsets.partition_point(|&start| start <= pos) - 1)
    }

    pub fn lookup(&self, query: &str) -> Result<MatchResult, QueryError> {
        self.lookup_counting(query, &mut 0)
    }

    /// `lookup`, adding the number of suffix-array binary searches to `probes`.
    fn lookup_counting(&self, query: &str, probes: &mut usize) -> Result<MatchResult, QueryError> {
        if query.is_empty() {
            return Err(QueryError {
                query: query.to_owned(),
                reason: "empty query".into(),
            });
        }
        if query.as_bytes().contains(&DELIM) {
            return Err(QueryError {
                query: query.to_owned(),
                reason: "query contains the delimiter byte".into(),
            });
        }

        let q = query.as_bytes();
        let mut pattern = Vec::with_capacity(q.len() + 2);
        let mut hits = |lead: u8, trail: u8, probes: &mut usize| -> Vec<usize> {
            pattern.clear();
            pattern.push(lead);
            pattern.extend_from_slice(q);
            pattern.push(trail);
            // lower and upper bound
            *probes += 2;
            // Skip the leading byte so the position lands inside the item.
            self.suffixes
                .occurrences(&pattern)
                .iter()
                .map(|&p| {
                    self.item_of_position(p + 1)
                        .expect("pattern occurrences start inside an item")
                })
                .collect()
        };

        let exact = hits(DELIM, DELIM, probes);
        let mut resolved = exact.clone();
        resolved.extend(hits(b'.', DELIM, probes));
        let mut partial = hits(DELIM, b'.', probes);
        partial.extend(hits(b'.', b'.', probes));

        let status = if !exact.is_empty() {
            MatchStatus::Exact
        } else if !resolved.is_empty() || !partial.is_empty() {
            MatchStatus::Partial
        } else {
            MatchStatus::None
        };

        let resolved = self.sorted_names(resolved);
        let resolved_set: HashSet<&str> = resolved.iter().map(String::as_str).collect();
        let partial_hits: Vec<String> = self
            .sorted_names(partial)
            .into_iter()
            .filter(|f| !resolved_set.contains(f.as_str()))
            .collect();
        Ok(MatchResult {
            query: query.to_owned(),
            status,
            resolved,
            partial_hits,
        })
    }

    fn sorted_names(&self, mut ids: Vec<usize>) -> Vec<String> {
        ids.sort_unstable();
        ids.dedup();
        let mut names: Vec<String> = ids.into_iter().map(|i| self.items[i].fqn.clone()).collect();
        names.sort_unstable();
        names
    }

    /// Looks up every query, positionally aligned with the input.
    pub fn verify_batch<S: AsRef<str> + Sync>(
        &self,
        queries: &[S],
    ) -> Vec<Result<MatchResult, QueryError>> {
        self.verify_batch_with(queries, Execution::default())
    }

    pub fn verify_batch_with<S: AsRef<str> + Sync>(
        &self,
        queries: &[S],
        exec: Execution,
    ) -> Vec<Result<MatchResult, QueryError>> {
        par::map_ordered(exec, queries, |q| self.lookup(q.as_ref()))
    }
}

fn layout(items: &[LibraryItem]) -> (Vec<u8>, Vec<usize>) {
    let total = 1 + items.iter().map(|i| i.fqn.len() + 1).sum::<usize>();
    let mut text = Vec::with_capacity(total);
    let mut offsets = Vec::with_capacity(items.len());
    text.push(DELIM);
    for item in items {
        offsets.push(text.len());
        text.extend_from_slice(item.fqn.as_bytes());
        text.push(DELIM);
    }
    (text, offsets)
}
