//! Compressed forward indexes for learned sparse retrieval.

pub mod bitstream;
pub mod bytecodec;
pub mod dotvbyte;
pub mod error;
mod format;
pub mod index;
pub mod model;
pub mod query;
pub mod report;
pub mod rgb;
pub mod synth;
pub mod verify;

pub use error::{Error, Result};
pub use index::{build_index, full_scan_topk, Codec, CompressedForwardIndex, Hit, Scorer, TopK};
pub use model::{
    build_uncompressed, from_gaps, to_gaps, ForwardIndex, GapStream, SparseDataset, SparseVector,
    ValueFormat,
};
pub use query::DenseQuery;
pub use rgb::{apply_permutation, rgb_reorder, BisectionConfig, Permutation};
pub use synth::{generate, GenSpec, Preset};
