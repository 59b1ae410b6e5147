//! Base-level helpers. Sequences are ASCII byte strings over `A`, `T`, `C`, `G`.

use crate::{Error, Result};

/// Numeric value of a base: `A=0, T=1, C=2, G=3`. Complementary bases differ
/// only in the low bit.
#[inline]
pub fn base_value(b: u8) -> Option<u8> {
    match b {
        b'A' => Some(0),
        b'T' => Some(1),
        b'C' => Some(2),
        b'G' => Some(3),
        _ => None,
    }
}

pub const BASES: [u8; 4] = *b"ATCG";

#[inline]
pub fn base_from_value(v: u8) -> u8 {
    BASES[(v & 3) as usize]
}

#[inline]
pub fn is_base(b: u8) -> bool {
    base_value(b).is_some()
}

#[inline]
pub fn complement(b: u8) -> Option<u8> {
    base_value(b).map(|v| base_from_value(v ^ 1))
}

pub fn reverse_complement(nts: &[u8]) -> Result<Vec<u8>> {
    nts.iter()
        .enumerate()
        .rev()
        .map(|(i, &b)| complement(b).ok_or(Error::InvalidBase { base: b as char, offset: i }))
        .collect()
}

/// Longest run of one repeated symbol.
pub fn max_homopolymer_run(nts: &[u8]) -> usize {
    let mut best = 0;
    let mut run = 0;
    let mut prev = None;
    for &b in nts {
        run = if Some(b) == prev { run + 1 } else { 1 };
        prev = Some(b);
        best = best.max(run);
    }
    best
}

pub fn gc_count(nts: &[u8]) -> usize {
    nts.iter().filter(|&&b| b == b'G' || b == b'C').count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reverse_complement_examples() {
        assert_eq!(reverse_complement(b"ACGT").unwrap(), b"ACGT");
        assert_eq!(reverse_complement(b"AAT").unwrap(), b"ATT");
        assert!(matches!(reverse_complement(b"ANT"), Err(Error::InvalidBase { base: 'N', offset: 1 })));
    }

    #[test]
    fn runs() {
        assert_eq!(max_homopolymer_run(b""), 0);
        assert_eq!(max_homopolymer_run(b"ATTTCGG"), 3);
        assert_eq!(gc_count(b"ATCGGA"), 3);
    }
}
