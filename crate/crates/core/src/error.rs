use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image {width}x{height} is too small for {levels} decomposition levels")]
    DimensionTooSmall {
        width: usize,
        height: usize,
        levels: usize,
    },
    #[error("subband geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("quantization step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("non-finite coefficient at position {0}")]
    NonFiniteCoefficient(usize),
    #[error("quantization index {index} outside [1, {k}]")]
    IndexOutOfRange { index: u32, k: u32 },
    #[error("quantization level count must be at least 1")]
    ZeroLevels,
    #[error("quantization step grid is empty")]
    EmptyGrid,
    #[error("budget of {budget} nt is below the minimum achievable rate of {minimum} nt")]
    InfeasibleBudget { budget: u64, minimum: u64 },
    #[error("invalid rate target: {0}")]
    InvalidTarget(String),
    #[error("unknown codeword {codeword:?} at nucleotide offset {offset}")]
    UnknownCodeword { codeword: String, offset: usize },
    #[error("stream length {len} is not a multiple of codeword length {l}")]
    RaggedStream { len: usize, l: usize },
    #[error("invalid nucleotide {base:?} at offset {offset}")]
    InvalidBase { base: char, offset: usize },
    #[error("invalid oligo layout: {0}")]
    InvalidLayout(String),
    #[error("address space exhausted: {needed} chunks but only {available} offsets")]
    AddressSpaceExhausted { needed: u64, available: u64 },
    #[error("image id {id} does not fit in {digits} decimal digits")]
    ImageIdTooLarge { id: u32, digits: usize },
    #[error("nothing to encode: empty nucleotide stream")]
    EmptyStream,
    #[error("invalid channel parameters: {0}")]
    InvalidChannel(String),
    #[error("metadata: {0}")]
    Metadata(String),
    #[error("PGM: {0}")]
    Pgm(String),
    #[error("FASTA: {0}")]
    Fasta(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
