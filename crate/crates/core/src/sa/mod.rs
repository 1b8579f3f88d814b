//! Suffix array construction over raw bytes.
//!
//! [`suffix_array`] is the builder used by the index. It runs induced
//! sorting ([`sais`]) unless the crate is built with `sort-fallback`, in
//! which case it uses prefix doubling ([`doubling`]). Both are always
//! compiled so they can be checked against each other.

pub mod doubling;
pub mod sais;

/// Positions of all suffixes of `text`, sorted byte-lexicographically.
pub fn suffix_array(text: &[u8]) -> Vec<usize> {
    #[cfg(feature = "sort-fallback")]
    {
        doubling::suffix_array(text)
    }
    #[cfg(not(feature = "sort-fallback"))]
    {
        sais::suffix_array(text)
    }
}

/// Name of the builder selected at compile time.
pub fn builder_name() -> &'static str {
    if cfg!(feature = "sort-fallback") {
        "prefix-doubling"
    } else {
        "sa-is"
    }
}
