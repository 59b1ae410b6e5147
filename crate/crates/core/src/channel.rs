//! Amplification and sequencing channel.
//!
//! Every oligo is copied a Poisson-distributed number of times. Each copy is
//! read base by base: an insertion of a random base may precede the base,
//! then the base is deleted, substituted by one of the three other bases, or
//! kept. Finally the copy is reverse-complemented with probability
//! `p_revcomp`. Reads are primer-free bodies.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dna_code::replica_rng;
use crate::nucleotide::{base_from_value, base_value, reverse_complement, BASES};
use crate::oligo::Oligo;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    /// Mean copies per oligo.
    pub mean_coverage: f64,
    pub p_sub: f64,
    pub p_ins: f64,
    pub p_del: f64,
    pub p_revcomp: f64,
    pub seed: u64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self { mean_coverage: 100.0, p_sub: 0.005, p_ins: 0.0005, p_del: 0.0005, p_revcomp: 0.5, seed: 0x5eed }
    }
}

impl ChannelParams {
    /// A channel that returns `coverage` exact forward copies on average.
    pub fn noiseless(mean_coverage: f64, seed: u64) -> Self {
        Self { mean_coverage, p_sub: 0.0, p_ins: 0.0, p_del: 0.0, p_revcomp: 0.0, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [("p_sub", self.p_sub), ("p_ins", self.p_ins), ("p_del", self.p_del), ("p_revcomp", self.p_revcomp)];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidChannel(format!("{name} = {p} is not a probability")));
            }
        }
        if self.p_sub + self.p_del > 1.0 {
            return Err(Error::InvalidChannel("p_sub + p_del exceeds 1".into()));
        }
        if !self.mean_coverage.is_finite() || self.mean_coverage <= 0.0 {
            return Err(Error::InvalidChannel(format!("mean coverage {} must be positive", self.mean_coverage)));
        }
        Ok(())
    }
}

/// Diagnostics for one read; never consulted by the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReadProvenance {
    /// Position of the source oligo in the input list.
    pub origin: usize,
    pub substitutions: u32,
    pub insertions: u32,
    pub deletions: u32,
    pub reverse_complemented: bool,
}

/// Sequenced reads plus their hidden provenance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReadSet {
    reads: Vec<Vec<u8>>,
    provenance: Vec<ReadProvenance>,
}

impl ReadSet {
    /// Reads with unknown provenance (e.g. loaded from FASTA).
    pub fn from_reads(reads: Vec<Vec<u8>>) -> Self {
        Self { reads, provenance: Vec::new() }
    }

    pub fn reads(&self) -> &[Vec<u8>] {
        &self.reads
    }

    pub fn into_reads(self) -> Vec<Vec<u8>> {
        self.reads
    }

    /// Empty when the reads were not simulated.
    pub fn provenance(&self) -> &[ReadProvenance] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.reads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reads.is_empty()
    }
}

fn sequence_copy(body: &[u8], params: &ChannelParams, rng: &mut ChaCha8Rng, prov: &mut ReadProvenance) -> Vec<u8> {
    let mut out = Vec::with_capacity(body.len() + 4);
    for &b in body {
        if params.p_ins > 0.0 && rng.random_bool(params.p_ins) {
            out.push(BASES[rng.random_range(0..4)]);
            prov.insertions += 1;
        }
        let u: f64 = rng.random();
        if u < params.p_del {
            prov.deletions += 1;
        } else if u < params.p_del + params.p_sub {
            // one of the three other bases
            let v = base_value(b).unwrap_or(0);
            let shift = rng.random_range(1..4u8);
            out.push(base_from_value((v + shift) & 3));
            prov.substitutions += 1;
        } else {
            out.push(b);
        }
    }
    if params.p_revcomp > 0.0 && rng.random_bool(params.p_revcomp) {
        prov.reverse_complemented = true;
        reverse_complement(&out).expect("channel emits valid bases")
    } else {
        out
    }
}

/// Simulates amplification and sequencing of `oligos`. Output order follows
/// the input order; each oligo uses its own random stream so the result is
/// independent of thread count.
pub fn amplify_and_sequence(oligos: &[Oligo], params: &ChannelParams) -> Result<ReadSet> {
    params.validate()?;
    let poisson = Poisson::new(params.mean_coverage).map_err(|e| Error::InvalidChannel(e.to_string()))?;
    let per_oligo: Vec<(Vec<Vec<u8>>, Vec<ReadProvenance>)> = oligos
        .par_iter()
        .enumerate()
        .map(|(origin, oligo)| {
            let mut rng = replica_rng(params.seed, origin as u64);
            let copies = poisson.sample(&mut rng) as usize;
            let mut reads = Vec::with_capacity(copies);
            let mut prov = Vec::with_capacity(copies);
            for _ in 0..copies {
                let mut p = ReadProvenance { origin, ..Default::default() };
                reads.push(sequence_copy(&oligo.body, params, &mut rng, &mut p));
                prov.push(p);
            }
            (reads, prov)
        })
        .collect();
    let mut set = ReadSet::default();
    for (reads, prov) in per_oligo {
        set.reads.extend(reads);
        set.provenance.extend(prov);
    }
    Ok(set)
}

/// Fixed-coverage variant: exactly `copies` reads per oligo.
pub fn sequence_fixed(oligos: &[Oligo], copies: usize, params: &ChannelParams) -> Result<ReadSet> {
    params.validate()?;
    let mut set = ReadSet::default();
    for (origin, oligo) in oligos.iter().enumerate() {
        let mut rng = replica_rng(params.seed, origin as u64);
        for _ in 0..copies {
            let mut p = ReadProvenance { origin, ..Default::default() };
            set.reads.push(sequence_copy(&oligo.body, params, &mut rng, &mut p));
            set.provenance.push(p);
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oligos(n: usize) -> Vec<Oligo> {
        (0..n)
            .map(|i| Oligo { image_id: 0, offset: i as u64, body: b"ATCGGATCAGTACGAT".repeat(6)[..91].to_vec() })
            .collect()
    }

    #[test]
    fn noiseless_copies_are_exact() {
        let src = oligos(3);
        let reads = sequence_fixed(&src, 5, &ChannelParams::noiseless(5.0, 1)).unwrap();
        assert_eq!(reads.len(), 15);
        for (r, p) in reads.reads().iter().zip(reads.provenance()) {
            assert_eq!(r, &src[p.origin].body);
        }
    }

    #[test]
    fn full_deletion_empties_reads() {
        let params = ChannelParams { p_del: 1.0, p_sub: 0.0, p_ins: 0.0, ..ChannelParams::default() };
        let reads = amplify_and_sequence(&oligos(4), &params).unwrap();
        assert!(!reads.is_empty());
        assert!(reads.reads().iter().all(Vec::is_empty));
    }

    #[test]
    fn deterministic_given_seed() {
        let params = ChannelParams { mean_coverage: 20.0, p_sub: 0.05, p_ins: 0.01, p_del: 0.01, ..Default::default() };
        let a = amplify_and_sequence(&oligos(10), &params).unwrap();
        let b = amplify_and_sequence(&oligos(10), &params).unwrap();
        assert_eq!(a, b);
        let c = amplify_and_sequence(&oligos(10), &ChannelParams { seed: 99, ..params }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_params() {
        let bad = ChannelParams { p_sub: 1.5, ..Default::default() };
        assert!(matches!(amplify_and_sequence(&oligos(1), &bad), Err(Error::InvalidChannel(_))));
        let bad = ChannelParams { mean_coverage: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
