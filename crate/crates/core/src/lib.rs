//! Dependency verification for formal mathematics libraries.
//!
//! Every identifier of a library is concatenated into one delimiter-separated
//! text and indexed with a suffix array. A candidate dependency, whether it
//! comes from a language model, from extraction over formal code or from a
//! file, is then verified with a handful of binary searches over that array.
//!
//! The crate is organised around that index:
//!
//! - [`sa`] builds suffix arrays (induced sorting, with a prefix-doubling
//!   fallback behind the `sort-fallback` feature).
//! - [`index`] lays out the library text and answers lookups.
//! - [`format`] is the versioned on-disk index file.
//! - [`extract`] pulls candidate identifiers out of Lean-style statements.
//! - [`dataset`] labels informal/formal corpora and splits them by difficulty.
//! - [`eval`] scores retrieved dependencies against gold labels.
//! - [`lexical`] is a bag-of-words select-by-similarity baseline.
//! - [`bench`] and [`synth`] drive throughput measurements.
//!
//! Batch operations take an [`Execution`] so that the rayon-backed and the
//! sequential paths can be compared at runtime.

pub mod bench;
pub mod dataset;
pub mod eval;
pub mod extract;
pub mod filter;
pub mod format;
pub mod index;
pub mod lexical;
pub mod library;
pub mod par;
pub mod rng;
pub mod sa;
pub mod synth;

pub use extract::{CandidateSet, DependencyList, Extractor};
pub use filter::{filter_candidates, FilteredCandidates};
pub use format::{load_index, save_index, FormatError};
pub use index::{
    DependencyIndex, IndexError, IndexInfo, LibraryItem, MatchResult, MatchStatus, QueryError,
    SuffixIndex, DELIM,
};
pub use par::Execution;
