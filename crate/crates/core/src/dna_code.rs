//! Constrained quaternary code for quantization indices.
//!
//! Codewords are concatenations of doublets from [`D1`] (no homopolymer
//! doublets, at most one G/C per doublet), with one trailing [`D2`] symbol
//! for odd lengths. A quantization index `i` in `[1, k]` may be written as
//! any dictionary entry at 1-based position `i + r*k`, `r` in `[0, m)`,
//! which breaks up long runs of equal indices; every such position is
//! congruent to `i` modulo `k`, so decoding is unambiguous.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Doublet alphabet, in dictionary order.
pub const D1: [[u8; 2]; 10] = [
    *b"AT", *b"AC", *b"AG", *b"TA", *b"TC", *b"TG", *b"CA", *b"CT", *b"GA", *b"GT",
];

/// Single-symbol alphabet, in dictionary order.
pub const D2: [u8; 4] = *b"ATCG";

/// Encoded nucleotides; always a whole number of codewords when produced by
/// [`encode_indices`].
pub type NucleotideStream = Vec<u8>;

#[inline]
fn d1_index(a: u8, b: u8) -> Option<u64> {
    D1.iter().position(|d| d[0] == a && d[1] == b).map(|p| p as u64)
}

#[inline]
fn d2_index(a: u8) -> Option<u64> {
    D2.iter().position(|&d| d == a).map(|p| p as u64)
}

/// Number of codewords of length `l`: `10^(l/2)` for even `l`,
/// `4 * 10^((l-1)/2)` for odd `l`.
pub fn dictionary_size(l: usize) -> u64 {
    let tens = 10u64.pow((l / 2) as u32);
    if l.is_multiple_of(2) {
        tens
    } else {
        4 * tens
    }
}

/// Codeword length needed to give each of `k` levels at least one codeword.
///
/// Powers of ten use `2*log10(k)` (with `k = 1` taking a single symbol);
/// otherwise an odd length is used when `4 * 10^floor(log10 k)` codewords
/// suffice, and the next even length when they do not.
pub fn codeword_length(k: u64) -> Result<usize> {
    if k == 0 {
        return Err(Error::ZeroLevels);
    }
    if k == 1 {
        return Ok(1);
    }
    let mut digits = 0u32; // floor(log10 k)
    while 10u64.pow(digits + 1) <= k {
        digits += 1;
    }
    let decade = 10u64.pow(digits);
    let l = if k == decade {
        2 * digits
    } else if k <= 4 * decade {
        2 * digits + 1
    } else {
        2 * (digits + 1)
    };
    Ok(l as usize)
}

/// Like [`codeword_length`], but lengthened until every level has at least
/// two codewords to choose from.
pub fn codeword_length_strict(k: u64) -> Result<usize> {
    let mut l = codeword_length(k)?;
    while dictionary_size(l) / k < 2 {
        l += 1;
    }
    Ok(l)
}

/// Writes the codeword at 0-based `position` of the length-`l` dictionary.
fn write_codeword(l: usize, mut position: u64, out: &mut Vec<u8>) {
    let start = out.len();
    out.resize(start + l, 0);
    let word = &mut out[start..];
    let mut end = l;
    if l % 2 == 1 {
        word[l - 1] = D2[(position % 4) as usize];
        position /= 4;
        end -= 1;
    }
    // least significant doublet is rightmost
    while end > 0 {
        let d = D1[(position % 10) as usize];
        word[end - 2] = d[0];
        word[end - 1] = d[1];
        position /= 10;
        end -= 2;
    }
}

/// 0-based dictionary position of a length-`l` gram, if it is a codeword.
fn codeword_position(gram: &[u8]) -> Option<u64> {
    let l = gram.len();
    let (pairs, tail) = gram.split_at(l - l % 2);
    let mut pos = 0u64;
    for pair in pairs.chunks_exact(2) {
        pos = pos * 10 + d1_index(pair[0], pair[1])?;
    }
    if let Some(&last) = tail.first() {
        pos = pos * 4 + d2_index(last)?;
    }
    Some(pos)
}

/// All codewords of length `l` in dictionary order.
pub fn build_dictionary(l: usize) -> Vec<String> {
    let size = dictionary_size(l);
    let mut buf = Vec::with_capacity(l);
    (0..size)
        .map(|p| {
            buf.clear();
            write_codeword(l, p, &mut buf);
            String::from_utf8(buf.clone()).expect("ASCII codeword")
        })
        .collect()
}

/// The dictionary for a given level count. Entries are computed from their
/// position on demand rather than stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Codebook {
    l: usize,
    size: u64,
    k: u32,
    m: u64,
}

impl Codebook {
    pub fn new(k: u32) -> Result<Self> {
        Self::with_length(k, codeword_length(k as u64)?)
    }

    pub fn strict(k: u32) -> Result<Self> {
        Self::with_length(k, codeword_length_strict(k as u64)?)
    }

    pub fn build(k: u32, strict_dispersion: bool) -> Result<Self> {
        if strict_dispersion {
            Self::strict(k)
        } else {
            Self::new(k)
        }
    }

    fn with_length(k: u32, l: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroLevels);
        }
        let size = dictionary_size(l);
        debug_assert!(size >= k as u64);
        Ok(Self { l, size, k, m: size / k as u64 })
    }

    /// Codeword length in nucleotides.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Dictionary size.
    pub fn size(&self) -> u64 {
        self.size
    }

    /// Number of quantization levels served.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Codewords available per level.
    pub fn m(&self) -> u64 {
        self.m
    }

    /// Entry at a 1-based dictionary position.
    pub fn entry(&self, position: u64) -> Option<String> {
        if position == 0 || position > self.size {
            return None;
        }
        let mut buf = Vec::with_capacity(self.l);
        write_codeword(self.l, position - 1, &mut buf);
        Some(String::from_utf8(buf).expect("ASCII codeword"))
    }

    pub fn entries(&self) -> Vec<String> {
        build_dictionary(self.l)
    }

    /// Appends the codeword for `index` using replica `r`.
    #[inline]
    pub fn push_codeword(&self, index: u32, r: u64, out: &mut Vec<u8>) -> Result<()> {
        if index == 0 || index > self.k {
            return Err(Error::IndexOutOfRange { index, k: self.k });
        }
        debug_assert!(r < self.m);
        write_codeword(self.l, index as u64 - 1 + r * self.k as u64, out);
        Ok(())
    }

    /// Level index of one codeword, or `None` if the gram is not in the
    /// dictionary.
    #[inline]
    pub fn index_of(&self, gram: &[u8]) -> Option<u32> {
        if gram.len() != self.l {
            return None;
        }
        let p = codeword_position(gram)?;
        // positions beyond m*k exist in the dictionary but are never emitted;
        // they still decode by congruence
        Some((p % self.k as u64) as u32 + 1)
    }
}

/// The replica-choice stream for a given seed and stream id. Independent
/// streams let subbands be encoded in parallel.
pub fn replica_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Encodes each index with a uniformly drawn replica.
pub fn encode_indices_with<R: Rng + ?Sized>(
    indices: &[u32],
    book: &Codebook,
    rng: &mut R,
) -> Result<NucleotideStream> {
    let mut out = Vec::with_capacity(indices.len() * book.l);
    for &i in indices {
        let r = if book.m > 1 { rng.random_range(0..book.m) } else { 0 };
        book.push_codeword(i, r, &mut out)?;
    }
    Ok(out)
}

/// Encodes with the replica stream derived from `seed` (stream 0).
pub fn encode_indices(indices: &[u32], book: &Codebook, seed: u64) -> Result<NucleotideStream> {
    encode_indices_with(indices, book, &mut replica_rng(seed, 0))
}

pub fn decode_sequence(nts: &[u8], book: &Codebook) -> Result<Vec<u32>> {
    if !nts.len().is_multiple_of(book.l) {
        return Err(Error::RaggedStream { len: nts.len(), l: book.l });
    }
    nts.chunks_exact(book.l)
        .enumerate()
        .map(|(n, gram)| {
            book.index_of(gram).ok_or_else(|| Error::UnknownCodeword {
                codeword: String::from_utf8_lossy(gram).into_owned(),
                offset: n * book.l,
            })
        })
        .collect()
}

/// Decodes whole codewords, substituting `fallback` for grams that are not in
/// the dictionary. Returns the indices and the codeword numbers substituted.
/// A trailing partial codeword is ignored.
pub fn decode_lenient(nts: &[u8], book: &Codebook, fallback: u32) -> (Vec<u32>, Vec<usize>) {
    let mut bad = Vec::new();
    let indices = nts
        .chunks_exact(book.l)
        .enumerate()
        .map(|(n, gram)| {
            book.index_of(gram).unwrap_or_else(|| {
                bad.push(n);
                fallback
            })
        })
        .collect();
    (indices, bad)
}
