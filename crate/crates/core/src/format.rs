//! Versioned binary index file.
//!
//! All integers are little-endian:
//!
//! ```text
//! "DDRIX\x01"            magic, 6 bytes
//! u32                    format version (1)
//! u64 text_bytes, text
//! u64 sa_len, sa_len x u64 suffix positions
//! u64 item_count, item_count x u64 item offsets
//! item_count x { fqn, kind, signature, doc }
//!     each field: u32 length + UTF-8 bytes; 0xFFFFFFFF marks an absent field
//! u64                    FNV-1a 64 of every preceding byte
//! ```
//!
//! The build timestamp is not stored, so equal libraries serialize to equal
//! bytes.

use std::io::{self, Read, Write};
use std::path::Path;
use std::time::SystemTime;

use crate::index::{DependencyIndex, LibraryItem, SuffixIndex, DELIM, FORMAT_VERSION};

pub const MAGIC: &[u8; 6] = b"DDRIX\x01";
const ABSENT: u32 = u32::MAX;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("unsupported index format version {0}")]
    UnsupportedVersion(u32),
    #[error("index file is truncated")]
    TruncatedFile,
    #[error("index checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error("index file is inconsistent: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// 64-bit FNV-1a.
#[derive(Debug, Clone, Copy)]
pub struct Fnv1a(u64);

impl Default for Fnv1a {
    fn default() -> Self {
        Fnv1a(FNV_OFFSET)
    }
}

impl Fnv1a {
    pub fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }

    pub fn finish(self) -> u64 {
        self.0
    }

    pub fn hash(bytes: &[u8]) -> u64 {
        let mut h = Fnv1a::default();
        h.update(bytes);
        h.finish()
    }
}

struct HashingWriter<W> {
    inner: W,
    hash: Fnv1a,
}

impl<W: Write> HashingWriter<W> {
    fn put(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.hash.update(bytes);
        self.inner.write_all(bytes)
    }

    fn put_u32(&mut self, v: u32) -> io::Result<()> {
        self.put(&v.to_le_bytes())
    }

    fn put_u64(&mut self, v: u64) -> io::Result<()> {
        self.put(&v.to_le_bytes())
    }

    fn put_field(&mut self, field: Option<&str>) -> io::Result<()> {
        match field {
            None => self.put_u32(ABSENT),
            Some(s) => {
                let len = u32::try_from(s.len())
                    .ok()
                    .filter(|&l| l != ABSENT)
                    .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "field too long"))?;
                self.put_u32(len)?;
                self.put(s.as_bytes())
            }
        }
    }
}

pub fn save_index<W: Write>(index: &DependencyIndex, sink: W) -> io::Result<()> {
    let mut w = HashingWriter {
        inner: io::BufWriter::new(sink),
        hash: Fnv1a::default(),
    };
    w.put(MAGIC)?;
    w.put_u32(FORMAT_VERSION)?;
    w.put_u64(index.text().len() as u64)?;
    w.put(index.text())?;
    w.put_u64(index.suffix_array().len() as u64)?;
    for &p in index.suffix_array() {
        w.put_u64(p as u64)?;
    }
    w.put_u64(index.len() as u64)?;
    for &o in index.item_offsets() {
        w.put_u64(o as u64)?;
    }
    for item in index.items() {
        w.put_field(Some(&item.fqn))?;
        w.put_field(item.kind.as_deref())?;
        w.put_field(item.signature.as_deref())?;
        w.put_field(item.doc.as_deref())?;
    }
    let checksum = w.hash.finish();
    w.inner.write_all(&checksum.to_le_bytes())?;
    w.inner.flush()
}

pub fn to_bytes(index: &DependencyIndex) -> Vec<u8> {
    let mut buf = Vec::new();
    save_index(index, &mut buf).expect("writing to memory cannot fail");
    buf
}

pub fn save_index_file(index: &DependencyIndex, path: impl AsRef<Path>) -> io::Result<()> {
    save_index(index, std::fs::File::create(path)?)
}

/// Reads an index. The in-memory build timestamp is set to the load time.
pub fn load_index<R: Read>(mut source: R) -> Result<DependencyIndex, FormatError> {
    let mut buf = Vec::new();
    source.read_to_end(&mut buf)?;
    from_bytes(&buf, SystemTime::now())
}

/// Reads an index file, taking its modification time as the build time.
pub fn load_index_file(path: impl AsRef<Path>) -> Result<DependencyIndex, FormatError> {
    let path = path.as_ref();
    let buf = std::fs::read(path)?;
    let built_at = std::fs::metadata(path)
        .and_then(|m| m.modified())
        .unwrap_or_else(|_| SystemTime::now());
    from_bytes(&buf, built_at)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).ok_or(FormatError::TruncatedFile)?;
        let out = self.buf.get(self.pos..end).ok_or(FormatError::TruncatedFile)?;
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A length that must fit in the remaining bytes at `width` bytes each.
    fn count(&mut self, width: usize) -> Result<usize, FormatError> {
        let n = self.u64()?;
        let remaining = (self.buf.len() - self.pos) as u64;
        if n.checked_mul(width as u64).is_none_or(|b| b > remaining) {
            return Err(FormatError::TruncatedFile);
        }
        Ok(n as usize)
    }

    fn u64_array(&mut self, n: usize) -> Result<Vec<usize>, FormatError> {
        let bytes = self.take(n * 8)?;
        bytes
            .chunks_exact(8)
            .map(|c| {
                usize::try_from(u64::from_le_bytes(c.try_into().unwrap()))
                    .map_err(|_| FormatError::Corrupt("position exceeds address space".into()))
            })
            .collect()
    }

    /// Raw field bytes; decoding waits until the checksum has been verified.
    fn field(&mut self) -> Result<Option<&'a [u8]>, FormatError> {
        let len = self.u32()?;
        if len == ABSENT {
            return Ok(None);
        }
        self.take(len as usize).map(Some)
    }
}

fn decode(field: Option<&[u8]>) -> Result<Option<String>, FormatError> {
    field
        .map(|b| String::from_utf8(b.to_vec()).map_err(|_| FormatError::Corrupt("field is not UTF-8".into())))
        .transpose()
}

pub fn from_bytes(buf: &[u8], built_at: SystemTime) -> Result<DependencyIndex, FormatError> {
    if buf.len() < MAGIC.len() {
        return Err(if MAGIC.starts_with(buf) {
            FormatError::TruncatedFile
        } else {
            FormatError::BadMagic
        });
    }
    if &buf[..MAGIC.len()] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let mut cur = Cursor { buf, pos: MAGIC.len() };
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }

    let text_len = cur.count(1)?;
    let text = cur.take(text_len)?.to_vec();
    let sa_len = cur.count(8)?;
    let suffixes = cur.u64_array(sa_len)?;
    let item_count = cur.count(8)?;
    let offsets = cur.u64_array(item_count)?;
    let mut raw_items = Vec::with_capacity(item_count);
    for _ in 0..item_count {
        raw_items.push([cur.field()?, cur.field()?, cur.field()?, cur.field()?]);
    }
    // The checksum always occupies the last eight bytes. If the parsed
    // structure ends elsewhere, a length field is damaged and the checksum
    // over the file as written will not match.
    let body_end = buf.len().checked_sub(8).filter(|&e| e >= cur.pos).ok_or(FormatError::TruncatedFile)?;
    let stored = u64::from_le_bytes(buf[body_end..].try_into().unwrap());
    let computed = Fnv1a::hash(&buf[..body_end]);
    if body_end != cur.pos && stored == computed {
        return Err(FormatError::Corrupt("lengths disagree with the file size".into()));
    }
    if stored != computed {
        return Err(FormatError::ChecksumMismatch { stored, computed });
    }

    let mut items = Vec::with_capacity(item_count);
    for [fqn, kind, signature, doc] in raw_items {
        items.push(LibraryItem {
            fqn: decode(fqn)?.ok_or_else(|| FormatError::Corrupt("item without a name".into()))?,
            kind: decode(kind)?,
            signature: decode(signature)?,
            doc: decode(doc)?,
        });
    }

    check_layout(&text, &offsets, &items)?;
    check_suffix_array(&text, &suffixes)?;
    Ok(DependencyIndex::from_parts(
        SuffixIndex::from_parts(text, suffixes),
        offsets,
        items,
        built_at,
    ))
}

fn check_layout(text: &[u8], offsets: &[usize], items: &[LibraryItem]) -> Result<(), FormatError> {
    let corrupt = |m: &str| Err(FormatError::Corrupt(m.into()));
    if items.is_empty() {
        return corrupt("index has no items");
    }
    if text.first() != Some(&DELIM) {
        return corrupt("text does not start with the delimiter");
    }
    let mut expected = 1usize;
    for (item, &off) in items.iter().zip(offsets) {
        let end = off + item.fqn.len();
        if off != expected || text.get(off..end) != Some(item.fqn.as_bytes()) || text.get(end) != Some(&DELIM) {
            return corrupt("item offsets disagree with the text");
        }
        if crate::index::validate_identifier(&item.fqn).is_err() {
            return corrupt("stored identifier is invalid");
        }
        expected = end + 1;
    }
    if expected != text.len() {
        return corrupt("text has bytes outside any item");
    }
    Ok(())
}

fn check_suffix_array(text: &[u8], suffixes: &[usize]) -> Result<(), FormatError> {
    let corrupt = |m: &str| Err(FormatError::Corrupt(m.into()));
    if suffixes.len() != text.len() {
        return corrupt("suffix array length differs from text length");
    }
    let mut seen = vec![false; text.len()];
    for &p in suffixes {
        if p >= text.len() || std::mem::replace(&mut seen[p], true) {
            return corrupt("suffix array is not a permutation");
        }
    }
    if suffixes.windows(2).any(|w| text[w[0]..] >= text[w[1]..]) {
        return corrupt("suffix array is not sorted");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> DependencyIndex {
        DependencyIndex::build(vec![
            LibraryItem::new("Nat.sqrt").with_doc("square root"),
            LibraryItem::new("Real.sqrt").with_kind("def"),
            LibraryItem::new("Int.sqrt"),
        ])
        .unwrap()
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(Fnv1a::hash(b""), 0xcbf29ce484222325);
        assert_eq!(Fnv1a::hash(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(Fnv1a::hash(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn round_trip_preserves_items_and_bytes() {
        let idx = toy();
        let bytes = to_bytes(&idx);
        assert_eq!(&bytes[..6], MAGIC);
        let back = from_bytes(&bytes, SystemTime::now()).unwrap();
        assert_eq!(back.items(), idx.items());
        assert_eq!(back.suffix_array(), idx.suffix_array());
        assert_eq!(to_bytes(&back), bytes);
    }

    #[test]
    fn header_errors() {
        let bytes = to_bytes(&toy());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(from_bytes(&bad, SystemTime::now()), Err(FormatError::BadMagic)));
        let mut bad = bytes.clone();
        bad[6] = 2;
        assert!(matches!(
            from_bytes(&bad, SystemTime::now()),
            Err(FormatError::UnsupportedVersion(2))
        ));
        assert!(matches!(from_bytes(b"DDR", SystemTime::now()), Err(FormatError::TruncatedFile)));
        assert!(matches!(from_bytes(b"nope", SystemTime::now()), Err(FormatError::BadMagic)));
    }

    #[test]
    fn truncation_mid_suffix_array() {
        let idx = toy();
        let bytes = to_bytes(&idx);
        let sa_start = 6 + 4 + 8 + idx.text().len() + 8;
        let cut = &bytes[..sa_start + 8 * 3 + 5];
        assert!(matches!(from_bytes(cut, SystemTime::now()), Err(FormatError::TruncatedFile)));
    }

    #[test]
    fn flipped_byte_is_detected() {
        let bytes = to_bytes(&toy());
        let mut bad = bytes.clone();
        let i = 6 + 4 + 8 + 3;
        bad[i] ^= 0x20;
        assert!(matches!(
            from_bytes(&bad, SystemTime::now()),
            Err(FormatError::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn absent_fields_use_sentinel_length() {
        let idx = DependencyIndex::build(vec![LibraryItem::new("a")]).unwrap();
        let bytes = to_bytes(&idx);
        // magic, version, text(3), sa(3), items(1): then fqn "a" and three absents
        let items_at = 6 + 4 + 8 + 3 + 8 + 24 + 8 + 8;
        assert_eq!(&bytes[items_at..items_at + 5], &[1, 0, 0, 0, b'a']);
        assert_eq!(&bytes[items_at + 5..items_at + 17], &[0xFF; 12]);
        assert_eq!(bytes.len(), items_at + 17 + 8);
    }
}
