//! Read cleaning and per-chunk selection.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ReadSet;
use crate::dna_code::replica_rng;
use crate::nucleotide::is_base;
use crate::oligo::{parse_oligo, OligoLayout, ParsedOligo, Rejection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Most frequent exact body per offset; ties go to the lexicographically
    /// smallest body.
    Frequency,
    /// A uniformly chosen parsed read per offset.
    Random,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Frequency => "frequency",
            Strategy::Random => "random",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frequency" => Ok(Strategy::Frequency),
            "random" => Ok(Strategy::Random),
            other => Err(format!("unknown strategy {other:?} (expected frequency or random)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionCounts {
    pub length: usize,
    pub unknown_base: usize,
    pub parity: usize,
    pub sense: usize,
    pub header: usize,
    /// Parsed, but the offset lies beyond the expected chunk count.
    pub out_of_range: usize,
}

impl RejectionCounts {
    pub fn record(&mut self, r: Rejection) {
        match r {
            Rejection::WrongLength => self.length += 1,
            Rejection::UnknownBase => self.unknown_base += 1,
            Rejection::Parity => self.parity += 1,
            Rejection::Sense => self.sense += 1,
            Rejection::Header => self.header += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.length + self.unknown_base + self.parity + self.sense + self.header + self.out_of_range
    }

    pub fn merge(&mut self, other: &RejectionCounts) {
        self.length += other.length;
        self.unknown_base += other.unknown_base;
        self.parity += other.parity;
        self.sense += other.sense;
        self.header += other.header;
        self.out_of_range += other.out_of_range;
    }
}

/// The body picked for one offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChosenChunk {
    pub oligo: ParsedOligo,
    /// Copies of the chosen body among the offset's parsed reads.
    pub support: usize,
    /// Parsed reads for this offset.
    pub group_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub strategy: Strategy,
    /// Indexed by offset.
    pub chosen: Vec<Option<ChosenChunk>>,
    pub rejected: RejectionCounts,
    pub missing: Vec<u64>,
    pub total_reads: usize,
}

impl SelectionReport {
    pub fn accepted_reads(&self) -> usize {
        self.chosen.iter().flatten().map(|c| c.group_size).sum()
    }

    /// Accepted reads identical to their offset's chosen body.
    pub fn chosen_copies(&self) -> usize {
        self.chosen.iter().flatten().map(|c| c.support).sum()
    }

    /// Accepted reads that differ from their offset's chosen body.
    pub fn other_copies(&self) -> usize {
        self.accepted_reads() - self.chosen_copies()
    }
}

/// Keeps reads of exactly `expected_len` bases over `A`, `T`, `C`, `G`.
pub fn filter_reads(reads: &ReadSet, expected_len: usize) -> (ReadSet, RejectionCounts) {
    let mut counts = RejectionCounts::default();
    let kept = reads
        .reads()
        .iter()
        .filter(|r| {
            if r.len() != expected_len {
                counts.length += 1;
                false
            } else if !r.iter().all(|&b| is_base(b)) {
                counts.unknown_base += 1;
                false
            } else {
                true
            }
        })
        .cloned()
        .collect();
    (ReadSet::from_reads(kept), counts)
}

/// Parses every read, groups by offset and picks one body per offset in
/// `0..chunk_count`.
pub fn select_per_chunk(
    reads: &ReadSet,
    layout: &OligoLayout,
    strategy: Strategy,
    seed: u64,
    chunk_count: usize,
) -> SelectionReport {
    let parsed: Vec<Result<ParsedOligo, Rejection>> =
        reads.reads().par_iter().map(|r| parse_oligo(r, layout)).collect();

    let mut rejected = RejectionCounts::default();
    let mut groups: Vec<Vec<ParsedOligo>> = vec![Vec::new(); chunk_count];
    for p in parsed {
        match p {
            Ok(p) if (p.offset as usize) < chunk_count && p.offset < usize::MAX as u64 => {
                groups[p.offset as usize].push(p)
            }
            Ok(_) => rejected.out_of_range += 1,
            Err(r) => rejected.record(r),
        }
    }

    let chosen: Vec<Option<ChosenChunk>> = groups
        .into_par_iter()
        .enumerate()
        .map(|(offset, group)| {
            if group.is_empty() {
                return None;
            }
            let group_size = group.len();
            let mut counts: HashMap<&[u8], usize> = HashMap::new();
            for p in &group {
                *counts.entry(p.body.as_slice()).or_default() += 1;
            }
            let pick = match strategy {
                Strategy::Frequency => {
                    let (&best, _) = counts
                        .iter()
                        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
                        .expect("non-empty group");
                    group.iter().position(|p| p.body == best).unwrap()
                }
                Strategy::Random => replica_rng(seed, offset as u64).random_range(0..group_size),
            };
            let support = counts[group[pick].body.as_slice()];
            let oligo = group.into_iter().nth(pick).unwrap();
            Some(ChosenChunk { oligo, support, group_size })
        })
        .collect();

    let missing = chosen
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_none())
        .map(|(i, _)| i as u64)
        .collect();
    SelectionReport { strategy, chosen, rejected, missing, total_reads: reads.len() }
}
