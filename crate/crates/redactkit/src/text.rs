//! Character-offset helpers. Every public offset in this crate counts
//! Unicode scalar values, not bytes; these helpers do the byte/char
//! conversions at the `&str` boundary.

/// Number of Unicode scalar values in `s`.
pub(crate) fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Byte offset of the `char_idx`-th scalar value, where `char_idx` may
/// equal the char length (yielding `s.len()`).
pub(crate) fn byte_offset(s: &str, char_idx: usize) -> Option<usize> {
    let mut count = 0usize;
    for (byte, _) in s.char_indices() {
        if count == char_idx {
            return Some(byte);
        }
        count += 1;
    }
    (char_idx == count).then_some(s.len())
}

/// Slice `s` by char offsets, end-exclusive.
pub(crate) fn slice_chars(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let b0 = byte_offset(s, start)?;
    let b1 = byte_offset(s, end)?;
    s.get(b0..b1)
}
