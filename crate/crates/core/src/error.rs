use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] io::Error),

    /// Input that violates a documented precondition (caller error).
    #[error("validation error: {0}")]
    Validation(String),

    /// Encoded bytes that cannot have been produced by the matching encoder.
    #[error("corrupt data: {0}")]
    Corrupt(String),

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { expected: u16, found: u16 },

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("components at positions {index} and {} are not strictly increasing ({prev} then {next})", index + 1)]
    NotAscending { index: usize, prev: u32, next: u32 },

    #[error("component {component} out of range for dimension {dim}")]
    ComponentOutOfRange { component: u32, dim: u32 },

    #[error("dimension {0} exceeds the 16-bit component limit of 65536")]
    UnsupportedDimension(u32),

    #[error("value {value} does not fit fixed-point u8 with {frac_bits} fractional bits; needs frac_bits <= {required}")]
    FixedPointOverflow {
        value: f32,
        frac_bits: u8,
        required: i32,
    },

    #[error("permutation is not a bijection: {0}")]
    NotBijective(String),
}

impl Error {
    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::Corrupt(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
