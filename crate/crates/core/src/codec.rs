//! End-to-end encoder and decoder.
//!
//! Encoding: level shift, wavelet transform, nucleotide allocation,
//! quantization, DNA coding of each subband, concatenation and chunking into
//! oligos. Everything the decoder needs beyond the reads travels in a
//! [`SidecarMetadata`] file.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocate::{allocate_refined, AllocationResult};
use crate::channel::ReadSet;
use crate::consensus::{filter_reads, select_per_chunk, SelectionReport, Strategy};
use crate::dna_code::{decode_lenient, encode_indices_with, replica_rng, Codebook};
use crate::oligo::{chunk_and_format, Oligo, OligoLayout};
use crate::quantize::{dequantize_subband, quantize_subband, QuantizedSubband, QuantizerSpec};
use crate::transform::{forward_dwt, inverse_dwt, subband_layout, subband_weights, ImagePlane, Orientation, Subband, SubbandId, SubbandSet};
use crate::{Error, Result, Scalar};

pub const FORMAT_VERSION: u32 = 1;
pub const BIT_DEPTH: u32 = 8;
const LEVEL_SHIFT: f64 = 128.0;
/// Marks nucleotides of chunks that were never recovered; never a codeword
/// symbol, so such codewords decode to the fallback index.
const MISSING: u8 = b'N';

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateTarget {
    /// Total payload nucleotides.
    Nucleotides(u64),
    /// Input bits per payload nucleotide.
    BitsPerNt(f64),
}

impl RateTarget {
    pub fn budget(&self, pixels: usize) -> Result<u64> {
        match *self {
            RateTarget::Nucleotides(0) => Err(Error::InvalidTarget("zero nucleotide budget".into())),
            RateTarget::Nucleotides(n) => Ok(n),
            RateTarget::BitsPerNt(r) if r > 0.0 && r.is_finite() => {
                Ok(((pixels as f64 * BIT_DEPTH as f64) / r).floor() as u64)
            }
            RateTarget::BitsPerNt(r) => Err(Error::InvalidTarget(format!("{r} bits/nt"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodeConfig {
    pub levels: usize,
    /// Seed of the replica-choice streams.
    pub seed: u64,
    pub image_id: u32,
    /// Lengthen codewords until every level has at least two replicas.
    pub strict_dispersion: bool,
    /// Step-grid refinement passes of the allocator.
    pub refinement_rounds: usize,
    pub layout: OligoLayout,
}

impl Default for EncodeConfig {
    fn default() -> Self {
        Self {
            levels: 3,
            seed: 0x0d1a_5eed,
            image_id: 0,
            strict_dispersion: false,
            refinement_rounds: 6,
            layout: OligoLayout::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubbandMeta {
    pub level: usize,
    pub orientation: Orientation,
    pub width: usize,
    pub height: usize,
    pub q: f64,
    pub min_index: i64,
    pub k: u32,
    /// Codeword length; redundant with `k`, checked on load.
    pub l: usize,
    /// Start of this subband in the concatenated stream, in nucleotides.
    pub stream_offset: u64,
    pub stream_len: u64,
    /// First and last chunk offsets touched by this subband.
    pub first_chunk: u64,
    pub last_chunk: u64,
}

impl SubbandMeta {
    pub fn id(&self) -> SubbandId {
        SubbandId { level: self.level, orientation: self.orientation }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarMetadata {
    pub format_version: u32,
    pub width: usize,
    pub height: usize,
    pub bit_depth: u32,
    pub levels: usize,
    pub image_id: u32,
    pub seed: u64,
    pub strict_dispersion: bool,
    /// Unpadded stream length in nucleotides.
    pub stream_len: u64,
    pub chunk_count: u64,
    pub layout: OligoLayout,
    pub subbands: Vec<SubbandMeta>,
}

impl SidecarMetadata {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Metadata(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let meta: Self = toml::from_str(text).map_err(|e| Error::Metadata(e.to_string()))?;
        meta.validate()?;
        Ok(meta)
    }

    pub fn codebook(&self, band: &SubbandMeta) -> Result<Codebook> {
        Codebook::build(band.k, self.strict_dispersion)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Metadata(m));
        if self.format_version != FORMAT_VERSION {
            return bad(format!("format version {} (expected {FORMAT_VERSION})", self.format_version));
        }
        if self.bit_depth != BIT_DEPTH {
            return bad(format!("bit depth {} unsupported", self.bit_depth));
        }
        self.layout.validate()?;
        let layout = subband_layout(self.width, self.height, self.levels)?;
        if layout.len() != self.subbands.len() {
            return bad(format!("{} subbands listed, geometry needs {}", self.subbands.len(), layout.len()));
        }
        let mut offset = 0;
        for (g, b) in layout.iter().zip(&self.subbands) {
            if g.id != b.id() || g.width != b.width || g.height != b.height {
                return bad(format!("subband {} does not match the image geometry", b.id()));
            }
            let book = self.codebook(b)?;
            if book.l() != b.l {
                return bad(format!("subband {}: k={} implies l={}, file says {}", b.id(), b.k, book.l(), b.l));
            }
            if b.stream_offset != offset || b.stream_len != (b.width * b.height * b.l) as u64 {
                return bad(format!("subband {}: inconsistent stream extent", b.id()));
            }
            if !b.q.is_finite() || b.q <= 0.0 {
                return bad(format!("subband {}: bad step {}", b.id(), b.q));
            }
            offset += b.stream_len;
        }
        if offset != self.stream_len {
            return bad("stream length does not match subband extents".into());
        }
        if self.chunk_count != self.stream_len.div_ceil(self.layout.payload_len as u64) {
            return bad("chunk count does not match stream length".into());
        }
        Ok(())
    }

    /// The step sizes in subband order.
    pub fn steps<T: Scalar>(&self) -> Vec<T> {
        self.subbands.iter().map(|b| T::lit(b.q)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct EncodedImage<T> {
    pub oligos: Vec<Oligo>,
    pub metadata: SidecarMetadata,
    pub allocation: AllocationResult<T>,
    pub quantized: Vec<QuantizedSubband<T>>,
}

fn shifted<T: Scalar>(image: &ImagePlane<T>, by: f64) -> ImagePlane<T> {
    let d = T::lit(by);
    ImagePlane { width: image.width, height: image.height, samples: image.samples.iter().map(|&s| s + d).collect() }
}

/// Rounds and clamps to the 8-bit range, in the sample type.
fn to_pixels<T: Scalar>(image: &ImagePlane<T>) -> ImagePlane<T> {
    ImagePlane {
        width: image.width,
        height: image.height,
        samples: image.to_u8().into_iter().map(|p| T::lit(p as f64)).collect(),
    }
}

pub fn encode_image<T: Scalar>(
    image: &ImagePlane<T>,
    target: RateTarget,
    config: &EncodeConfig,
) -> Result<EncodedImage<T>> {
    config.layout.validate()?;
    let budget = target.budget(image.len())?;
    let set = forward_dwt(&shifted(image, -LEVEL_SHIFT), config.levels)?;
    let weights: Vec<T> = subband_weights(config.levels, image.width, image.height)?.into_iter().map(|(_, w)| w).collect();
    let (_, allocation) =
        allocate_refined(&set, &weights, budget, config.strict_dispersion, config.refinement_rounds)?;

    let coded: Vec<(QuantizedSubband<T>, Codebook, Vec<u8>)> = set
        .subbands
        .par_iter()
        .zip(allocation.steps.par_iter())
        .enumerate()
        .map(|(b, (band, &q))| {
            let qsb = quantize_subband(&band.coeffs, band.width, band.height, q)?;
            let book = Codebook::build(qsb.spec.k, config.strict_dispersion)?;
            let nts = encode_indices_with(&qsb.indices, &book, &mut replica_rng(config.seed, b as u64))?;
            Ok((qsb, book, nts))
        })
        .collect::<Result<_>>()?;

    let payload = config.layout.payload_len as u64;
    let mut stream = Vec::with_capacity(allocation.rate_nts as usize);
    let mut subbands = Vec::with_capacity(coded.len());
    for (band, (qsb, book, nts)) in set.subbands.iter().zip(&coded) {
        let start = stream.len() as u64;
        stream.extend_from_slice(nts);
        let end = stream.len() as u64;
        subbands.push(SubbandMeta {
            level: band.id.level,
            orientation: band.id.orientation,
            width: band.width,
            height: band.height,
            q: qsb.spec.q.as_f64(),
            min_index: qsb.spec.min_index,
            k: qsb.spec.k,
            l: book.l(),
            stream_offset: start,
            stream_len: end - start,
            first_chunk: start / payload,
            last_chunk: end.saturating_sub(1) / payload,
        });
    }
    debug_assert_eq!(stream.len() as u64, allocation.rate_nts);

    let (_, last_book, _) = coded.last().expect("at least one subband");
    let mut padding = Vec::new();
    last_book.push_codeword(1, 0, &mut padding)?;
    let oligos = chunk_and_format(&stream, config.image_id, &config.layout, &padding)?;

    let metadata = SidecarMetadata {
        format_version: FORMAT_VERSION,
        width: image.width,
        height: image.height,
        bit_depth: BIT_DEPTH,
        levels: config.levels,
        image_id: config.image_id,
        seed: config.seed,
        strict_dispersion: config.strict_dispersion,
        stream_len: stream.len() as u64,
        chunk_count: oligos.len() as u64,
        layout: config.layout.clone(),
        subbands,
    };
    Ok(EncodedImage { oligos, metadata, allocation, quantized: coded.into_iter().map(|c| c.0).collect() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Infinite when the images are identical.
    pub psnr_db: f64,
    pub mse: f64,
    pub input_bits: u64,
    /// Input bits per payload nucleotide.
    pub coding_potential_bits_per_nt: f64,
    /// Input bits per body nucleotide (primers excluded).
    pub net_information_density: f64,
    pub oligo_count: usize,
    pub payload_nts: u64,
    pub body_nts: u64,
    /// Including primers.
    pub total_nts: u64,
}

pub fn psnr<T: Scalar>(original: &ImagePlane<T>, reconstructed: &ImagePlane<T>) -> Result<(f64, f64)> {
    if original.width != reconstructed.width || original.height != reconstructed.height {
        return Err(Error::GeometryMismatch(format!(
            "{}x{} vs {}x{}",
            original.width, original.height, reconstructed.width, reconstructed.height
        )));
    }
    let sse: f64 = original
        .samples
        .iter()
        .zip(&reconstructed.samples)
        .map(|(&a, &b)| {
            let d = a.as_f64() - b.as_f64();
            d * d
        })
        .sum();
    let mse = sse / original.len() as f64;
    let peak = ((1u32 << BIT_DEPTH) - 1) as f64;
    Ok((10.0 * (peak * peak / mse).log10(), mse))
}

pub fn compute_metrics<T: Scalar>(
    original: &ImagePlane<T>,
    reconstructed: &ImagePlane<T>,
    oligo_count: usize,
    layout: &OligoLayout,
) -> Result<MetricsReport> {
    let (psnr_db, mse) = psnr(original, reconstructed)?;
    let input_bits = original.len() as u64 * BIT_DEPTH as u64;
    let payload_nts = (oligo_count * layout.payload_len) as u64;
    let body_nts = (oligo_count * layout.body_len()) as u64;
    let ratio = |nts: u64| if nts == 0 { f64::INFINITY } else { input_bits as f64 / nts as f64 };
    Ok(MetricsReport {
        psnr_db,
        mse,
        input_bits,
        coding_potential_bits_per_nt: ratio(payload_nts),
        net_information_density: ratio(body_nts),
        oligo_count,
        payload_nts,
        body_nts,
        total_nts: (oligo_count * layout.synthesized_len()) as u64,
    })
}

#[derive(Debug, Clone)]
pub struct DecodeOutput<T> {
    /// Rounded, clamped reconstruction.
    pub image: ImagePlane<T>,
    pub report: SelectionReport,
    /// Codewords replaced by index 1, per subband in subband order.
    pub substituted: Vec<Vec<usize>>,
}

impl<T: Scalar> DecodeOutput<T> {
    pub fn substituted_count(&self) -> usize {
        self.substituted.iter().map(Vec::len).sum()
    }
}

/// Rebuilds the image from the concatenated (unpadded) stream.
pub fn decode_stream<T: Scalar>(stream: &[u8], meta: &SidecarMetadata) -> Result<(ImagePlane<T>, Vec<Vec<usize>>)> {
    meta.validate()?;
    if stream.len() as u64 != meta.stream_len {
        return Err(Error::Metadata(format!("stream has {} nt, expected {}", stream.len(), meta.stream_len)));
    }
    let decoded: Vec<(Subband<T>, Vec<usize>)> = meta
        .subbands
        .par_iter()
        .map(|b| {
            let book = meta.codebook(b)?;
            let nts = &stream[b.stream_offset as usize..(b.stream_offset + b.stream_len) as usize];
            let (indices, bad) = decode_lenient(nts, &book, 1);
            let qsb = QuantizedSubband {
                spec: QuantizerSpec { q: T::lit(b.q), min_index: b.min_index, k: b.k },
                width: b.width,
                height: b.height,
                indices,
            };
            let coeffs = dequantize_subband(&qsb)?;
            Ok((Subband { id: b.id(), width: b.width, height: b.height, coeffs }, bad))
        })
        .collect::<Result<_>>()?;
    let (subbands, substituted): (Vec<_>, Vec<_>) = decoded.into_iter().unzip();
    let set = SubbandSet { width: meta.width, height: meta.height, levels: meta.levels, subbands };
    let image = shifted(&inverse_dwt(&set)?, LEVEL_SHIFT);
    Ok((to_pixels(&image), substituted))
}

/// Cleans and selects reads, reassembles the stream and decodes it. Lost or
/// corrupt codewords decode to index 1 and are reported, never fatal.
pub fn decode_image<T: Scalar>(
    reads: &ReadSet,
    meta: &SidecarMetadata,
    strategy: Strategy,
    seed: u64,
) -> Result<DecodeOutput<T>> {
    meta.validate()?;
    let layout = &meta.layout;
    let (filtered, filter_counts) = filter_reads(reads, layout.body_len());
    let mut report = select_per_chunk(&filtered, layout, strategy, seed, meta.chunk_count as usize);
    report.rejected.merge(&filter_counts);
    report.total_reads = reads.len();

    let mut stream = Vec::with_capacity(meta.chunk_count as usize * layout.payload_len);
    for chunk in &report.chosen {
        match chunk {
            Some(c) => stream.extend_from_slice(&c.oligo.payload),
            None => stream.extend(std::iter::repeat_n(MISSING, layout.payload_len)),
        }
    }
    stream.truncate(meta.stream_len as usize);
    let (image, substituted) = decode_stream(&stream, meta)?;
    Ok(DecodeOutput { image, report, substituted })
}

impl ReadSet {
    /// Error-free single copies of each oligo body.
    pub fn from_oligos(oligos: &[Oligo]) -> Self {
        ReadSet::from_reads(oligos.iter().map(|o| o.body.clone()).collect())
    }
}

/// Reconstruction from quantization alone (no DNA layer), using the steps in
/// `meta`.
pub fn quantization_only<T: Scalar>(image: &ImagePlane<T>, meta: &SidecarMetadata) -> Result<ImagePlane<T>> {
    let mut set = forward_dwt(&shifted(image, -LEVEL_SHIFT), meta.levels)?;
    for (band, q) in set.subbands.iter_mut().zip(meta.steps::<T>()) {
        let qsb = quantize_subband(&band.coeffs, band.width, band.height, q)?;
        band.coeffs = dequantize_subband(&qsb)?;
    }
    Ok(to_pixels(&shifted(&inverse_dwt(&set)?, LEVEL_SHIFT)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub target_bits_per_nt: f64,
    /// Achieved coding potential.
    pub bits_per_nt: f64,
    pub psnr_db: f64,
    pub oligo_count: usize,
}

/// Encodes at each target and decodes the oligos noiselessly. Points are
/// returned in increasing target rate order.
pub fn rd_sweep<T: Scalar>(image: &ImagePlane<T>, targets: &[f64], config: &EncodeConfig) -> Result<Vec<SweepPoint>> {
    let mut targets = targets.to_vec();
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap());
    targets
        .iter()
        .map(|&t| {
            let enc = encode_image(image, RateTarget::BitsPerNt(t), config)?;
            let out = decode_image::<T>(&ReadSet::from_oligos(&enc.oligos), &enc.metadata, Strategy::Frequency, 0)?;
            let m = compute_metrics(image, &out.image, enc.oligos.len(), &config.layout)?;
            Ok(SweepPoint {
                target_bits_per_nt: t,
                bits_per_nt: m.coding_potential_bits_per_nt,
                psnr_db: m.psnr_db,
                oligo_count: m.oligo_count,
            })
        })
        .collect()
}
