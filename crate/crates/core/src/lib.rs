//! Grayscale image storage on synthetic DNA.
//!
//! The pipeline compresses an image with a 9/7 wavelet transform and
//! per-subband uniform quantization, maps quantization indices onto a
//! constrained quaternary code (no `AA`/`TT`/`CC`/`GG` doublets, bounded GC
//! content, pseudorandom one-to-many codeword choice), cuts the nucleotide
//! stream into fixed-length oligos, and decodes noisy sequencing reads back
//! into an image.
//!
//! The numerical stages ([`transform`], [`quantize`], [`allocate`], [`codec`])
//! are generic over the sample type through [`Scalar`]; the aliases below pin
//! the common `f64` and `f32` instantiations.
//!
//! ```
//! use dnapix::{decode_image, encode_image, EncodeConfig, Image, RateTarget, ReadSet, Strategy};
//!
//! let pixels: Vec<f64> = (0..64 * 64).map(|i| ((i % 64) * 4) as f64).collect();
//! let image = Image::new(64, 64, pixels).unwrap();
//! let encoded = encode_image(&image, RateTarget::BitsPerNt(2.0), &EncodeConfig::default()).unwrap();
//! let reads = ReadSet::from_oligos(&encoded.oligos);
//! let decoded = decode_image::<f64>(&reads, &encoded.metadata, Strategy::Frequency, 0).unwrap();
//! assert_eq!(decoded.image.width, 64);
//! ```

pub mod allocate;
pub mod channel;
pub mod codec;
pub mod consensus;
pub mod dna_code;
mod error;
pub mod fasta;
pub mod nucleotide;
pub mod oligo;
pub mod pgm;
pub mod quantize;
mod scalar;
pub mod transform;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use allocate::{allocate, build_rd_points, AllocationResult, RdPoint};
pub use channel::{amplify_and_sequence, ChannelParams, ReadSet};
pub use codec::{
    compute_metrics, decode_image, encode_image, rd_sweep, DecodeOutput, EncodeConfig,
    EncodedImage, MetricsReport, RateTarget, SidecarMetadata,
};
pub use consensus::{filter_reads, select_per_chunk, SelectionReport, Strategy};
pub use dna_code::{build_dictionary, codeword_length, Codebook};
pub use nucleotide::reverse_complement;
pub use oligo::{chunk_and_format, parse_oligo, Oligo, OligoLayout, ParsedOligo, Rejection};
pub use quantize::{dequantize_subband, quantize_subband, QuantizedSubband, QuantizerSpec};
pub use transform::{
    forward_dwt, inverse_dwt, subband_weights, ImagePlane, Orientation, Subband, SubbandId,
    SubbandSet,
};

/// Double-precision image plane.
pub type Image = ImagePlane<f64>;
/// Single-precision image plane.
pub type Image32 = ImagePlane<f32>;
/// Double-precision wavelet decomposition.
pub type Subbands = SubbandSet<f64>;
/// Single-precision wavelet decomposition.
pub type Subbands32 = SubbandSet<f32>;
/// Double-precision quantized subband.
pub type Quantized = QuantizedSubband<f64>;
/// Double-precision rate-distortion point.
pub type RdPointF64 = RdPoint<f64>;
/// Double-precision allocation outcome.
pub type Allocation = AllocationResult<f64>;
/// Double-precision encoder output.
pub type Encoded = EncodedImage<f64>;
