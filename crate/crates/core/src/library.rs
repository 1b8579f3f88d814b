//! Library ingest: JSON Lines (`{"name": ..., "kind": ..., "signature": ...,
//! "doc": ...}`) or plain text with one identifier per line.

use std::io::BufRead;

use serde::Deserialize;

use crate::index::LibraryItem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LibraryFormat {
    JsonLines,
    PlainText,
    /// JSON Lines if the first nonblank line starts with `{`.
    Auto,
}

#[derive(Debug, thiserror::Error)]
pub enum LibraryError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Deserialize)]
struct Record {
    name: String,
    #[serde(default)]
    kind: Option<String>,
    #[serde(default)]
    signature: Option<String>,
    #[serde(default)]
    doc: Option<String>,
}

/// Reads library items in file order. Blank lines are skipped; identifier
/// validity is checked later, by the index builder.
pub fn read_library<R: BufRead>(reader: R, format: LibraryFormat) -> Result<Vec<LibraryItem>, LibraryError> {
    let mut items = Vec::new();
    let mut format = format;
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if format == LibraryFormat::Auto {
            format = if trimmed.starts_with('{') {
                LibraryFormat::JsonLines
            } else {
                LibraryFormat::PlainText
            };
        }
        match format {
            LibraryFormat::PlainText => items.push(LibraryItem::new(trimmed)),
            _ => {
                let rec: Record = serde_json::from_str(trimmed).map_err(|e| LibraryError::Malformed {
                    line: n + 1,
                    reason: e.to_string(),
                })?;
                items.push(LibraryItem {
                    fqn: rec.name,
                    kind: rec.kind,
                    signature: rec.signature,
                    doc: rec.doc,
                });
            }
        }
    }
    Ok(items)
}

pub fn read_library_file(
    path: impl AsRef<std::path::Path>,
    format: LibraryFormat,
) -> Result<Vec<LibraryItem>, LibraryError> {
    let file = std::fs::File::open(path)?;
    read_library(std::io::BufReader::new(file), format)
}
