//! Oligo layout: chunking of the encoded stream and the per-strand header.
//!
//! A body is `S | ID | OFFSET | PAYLOAD | P`: the sense nucleotide `A`, the
//! image id and chunk offset written as decimal digits in [`D1`] doublets,
//! the payload chunk, and a parity nucleotide equal to the mod-4 sum of the
//! other body bases. Primers flank the body on synthesis and are removed
//! before parsing.
//!
//! The body length must be odd: complementing a base flips the low bit of
//! its value, so a reverse-complemented odd-length body that starts with `A`
//! always has an even parity residue and can never pass as a forward read.

use serde::{Deserialize, Serialize};

use crate::dna_code::D1;
use crate::nucleotide::{base_from_value, base_value, is_base, reverse_complement};
use crate::{Error, Result};

/// Forward-strand sense marker.
pub const SENSE_FORWARD: u8 = b'A';

pub const DEFAULT_PRIMER_5: &str = "ACACGACGCTCTTCCGATCT";
pub const DEFAULT_PRIMER_3: &str = "AGATCGGAAGAGCACACGTC";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OligoLayout {
    pub sense_len: usize,
    /// Even; `id_len / 2` decimal digits.
    pub id_len: usize,
    /// Even; `offset_len / 2` decimal digits.
    pub offset_len: usize,
    pub payload_len: usize,
    pub parity_len: usize,
    pub primer_5: String,
    pub primer_3: String,
}

impl Default for OligoLayout {
    fn default() -> Self {
        Self {
            sense_len: 1,
            id_len: 4,
            offset_len: 12,
            payload_len: 73,
            parity_len: 1,
            primer_5: DEFAULT_PRIMER_5.into(),
            primer_3: DEFAULT_PRIMER_3.into(),
        }
    }
}

impl OligoLayout {
    /// Header plus payload plus parity; primers excluded.
    pub fn body_len(&self) -> usize {
        self.sense_len + self.id_len + self.offset_len + self.payload_len + self.parity_len
    }

    pub fn synthesized_len(&self) -> usize {
        self.body_len() + self.primer_5.len() + self.primer_3.len()
    }

    fn payload_start(&self) -> usize {
        self.sense_len + self.id_len + self.offset_len
    }

    /// Number of distinct chunk offsets.
    pub fn address_space(&self) -> u64 {
        10u64.saturating_pow((self.offset_len / 2) as u32)
    }

    pub fn max_image_id(&self) -> u64 {
        10u64.saturating_pow((self.id_len / 2) as u32) - 1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidLayout(m.into()));
        if self.sense_len != 1 || self.parity_len != 1 {
            return bad("sense and parity fields are one nucleotide each");
        }
        if !self.id_len.is_multiple_of(2) || !self.offset_len.is_multiple_of(2) {
            return bad("id and offset lengths must be even (decimal doublets)");
        }
        if self.offset_len == 0 || self.offset_len > 36 || self.id_len > 18 {
            return bad("offset length must be in 2..=36 and id length at most 18");
        }
        if self.payload_len == 0 {
            return bad("payload length must be positive");
        }
        if self.body_len().is_multiple_of(2) {
            return bad("body length must be odd for orientation detection");
        }
        if !self.primer_5.bytes().chain(self.primer_3.bytes()).all(is_base) {
            return bad("primers must be over A, T, C, G");
        }
        Ok(())
    }
}

/// A formatted strand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Oligo {
    pub image_id: u32,
    pub offset: u64,
    pub body: Vec<u8>,
}

impl Oligo {
    /// FASTA record id.
    pub fn record_id(&self) -> String {
        format!("{}_{}", self.image_id, self.offset)
    }

    /// Body with primers attached.
    pub fn synthesized(&self, layout: &OligoLayout) -> Vec<u8> {
        let mut s = Vec::with_capacity(layout.synthesized_len());
        s.extend_from_slice(layout.primer_5.as_bytes());
        s.extend_from_slice(&self.body);
        s.extend_from_slice(layout.primer_3.as_bytes());
        s
    }
}

/// A body recovered from a read, in forward orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedOligo {
    pub image_id: u32,
    pub offset: u64,
    pub payload: Vec<u8>,
    pub body: Vec<u8>,
    pub reverse_complemented: bool,
}

/// Why a read was not accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rejection {
    WrongLength,
    UnknownBase,
    Parity,
    Sense,
    /// ID or offset field is not a string of decimal doublets.
    Header,
}

fn push_decimal(mut value: u64, digits: usize, out: &mut Vec<u8>) {
    let start = out.len();
    out.resize(start + 2 * digits, 0);
    for d in (0..digits).rev() {
        let pair = D1[(value % 10) as usize];
        out[start + 2 * d] = pair[0];
        out[start + 2 * d + 1] = pair[1];
        value /= 10;
    }
}

fn read_decimal(field: &[u8]) -> Option<u64> {
    field.chunks_exact(2).try_fold(0u64, |acc, pair| {
        let digit = D1.iter().position(|d| d[0] == pair[0] && d[1] == pair[1])?;
        Some(acc * 10 + digit as u64)
    })
}

fn parity(bases: &[u8]) -> u8 {
    let sum: u32 = bases.iter().map(|&b| base_value(b).expect("validated base") as u32).sum();
    base_from_value((sum % 4) as u8)
}

/// Cuts `stream` into `payload_len` chunks, padding the last one by
/// repeating `padding`, and formats each chunk as an oligo body. Chunk `j`
/// gets offset `j`.
pub fn chunk_and_format(
    stream: &[u8],
    image_id: u32,
    layout: &OligoLayout,
    padding: &[u8],
) -> Result<Vec<Oligo>> {
    layout.validate()?;
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    if let Some(i) = stream.iter().position(|&b| !is_base(b)) {
        return Err(Error::InvalidBase { base: stream[i] as char, offset: i });
    }
    if padding.is_empty() || !padding.iter().all(|&b| is_base(b)) {
        return Err(Error::InvalidLayout("padding must be a non-empty nucleotide string".into()));
    }
    if image_id as u64 > layout.max_image_id() {
        return Err(Error::ImageIdTooLarge { id: image_id, digits: layout.id_len / 2 });
    }
    let needed = stream.len().div_ceil(layout.payload_len) as u64;
    if needed > layout.address_space() {
        return Err(Error::AddressSpaceExhausted { needed, available: layout.address_space() });
    }
    let body_len = layout.body_len();
    Ok(stream
        .chunks(layout.payload_len)
        .enumerate()
        .map(|(j, chunk)| {
            let mut body = Vec::with_capacity(body_len);
            body.push(SENSE_FORWARD);
            push_decimal(image_id as u64, layout.id_len / 2, &mut body);
            push_decimal(j as u64, layout.offset_len / 2, &mut body);
            body.extend_from_slice(chunk);
            body.extend(padding.iter().cycle().take(layout.payload_len - chunk.len()));
            let p = parity(&body);
            body.push(p);
            Oligo { image_id, offset: j as u64, body }
        })
        .collect())
}

fn parse_forward(body: &[u8], layout: &OligoLayout) -> Result<ParsedOligo, Rejection> {
    if body[0] != SENSE_FORWARD {
        return Err(Rejection::Sense);
    }
    let last = body.len() - 1;
    if parity(&body[..last]) != body[last] {
        return Err(Rejection::Parity);
    }
    let id_field = &body[layout.sense_len..layout.sense_len + layout.id_len];
    let offset_field = &body[layout.sense_len + layout.id_len..layout.payload_start()];
    let image_id = read_decimal(id_field).ok_or(Rejection::Header)?;
    let offset = read_decimal(offset_field).ok_or(Rejection::Header)?;
    Ok(ParsedOligo {
        image_id: image_id as u32,
        offset,
        payload: body[layout.payload_start()..last].to_vec(),
        body: body.to_vec(),
        reverse_complemented: false,
    })
}

/// Parses a primer-free read. Reads that fail in forward orientation are
/// retried reverse-complemented.
pub fn parse_oligo(read: &[u8], layout: &OligoLayout) -> Result<ParsedOligo, Rejection> {
    if read.len() != layout.body_len() {
        return Err(Rejection::WrongLength);
    }
    if !read.iter().all(|&b| is_base(b)) {
        return Err(Rejection::UnknownBase);
    }
    let forward = match parse_forward(read, layout) {
        Ok(p) => return Ok(p),
        Err(e) => e,
    };
    let rc = reverse_complement(read).expect("validated bases");
    match parse_forward(&rc, layout) {
        Ok(mut p) => {
            p.reverse_complemented = true;
            Ok(p)
        }
        Err(reverse) => Err(match (forward, reverse) {
            (Rejection::Sense, Rejection::Sense) => Rejection::Sense,
            (Rejection::Sense, r) => r,
            (f, _) => f,
        }),
    }
}
