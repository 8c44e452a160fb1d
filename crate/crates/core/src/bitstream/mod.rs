//! Bit-granular codecs over per-document gap streams.
//!
//! Each document is encoded into its own byte-padded [`BitBuffer`]; the
//! document's component count is stored by the index, not in the bitstream.
//! Because these codes only represent positive integers, the first gap is
//! written as `gap + 1` and shifted back on decode.

mod bits;
pub mod codes;

pub use bits::{BitBuffer, BitReader, BitWriter};

use crate::error::{Error, Result};
use crate::model::GapStream;

pub const DEFAULT_ZETA_K: u8 = 2;
pub const MAX_ZETA_K: u8 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitCodec {
    Gamma,
    Delta,
    Zeta { k: u8 },
}

impl BitCodec {
    pub fn zeta(k: u8) -> Result<Self> {
        if !(1..=MAX_ZETA_K).contains(&k) {
            return Err(Error::validation(format!(
                "zeta k must be in 1..={MAX_ZETA_K}, got {k}"
            )));
        }
        Ok(BitCodec::Zeta { k })
    }

    #[inline]
    fn write(self, x: u64, w: &mut BitWriter) {
        match self {
            BitCodec::Gamma => codes::gamma_encode(x, w),
            BitCodec::Delta => codes::delta_encode(x, w),
            BitCodec::Zeta { k } => codes::zeta_encode(x, k as u32, w),
        }
    }

    #[inline]
    fn read(self, r: &mut BitReader) -> Result<u64> {
        match self {
            BitCodec::Gamma => codes::gamma_decode(r),
            BitCodec::Delta => codes::delta_decode(r),
            BitCodec::Zeta { k } => codes::zeta_decode(r, k as u32),
        }
    }

    pub fn codeword_len(self, x: u64) -> u32 {
        match self {
            BitCodec::Gamma => codes::gamma_len(x),
            BitCodec::Delta => codes::delta_len(x),
            BitCodec::Zeta { k } => codes::zeta_len(x, k as u32),
        }
    }
}

pub fn encode_doc(gaps: &GapStream, codec: BitCodec) -> BitBuffer {
    let mut w = BitWriter::new();
    encode_doc_into(gaps.as_slice(), codec, &mut w);
    w.finish()
}

fn encode_doc_into(gaps: &[u32], codec: BitCodec, w: &mut BitWriter) {
    if let Some((&first, rest)) = gaps.split_first() {
        codec.write(first as u64 + 1, w);
        for &g in rest {
            codec.write(g as u64, w);
        }
    }
}

/// Decodes exactly `nnz` gaps. Trailing pad bits are ignored.
pub fn decode_doc(bytes: &[u8], nnz: usize, codec: BitCodec) -> Result<GapStream> {
    let mut out = Vec::with_capacity(nnz);
    decode_doc_into(bytes, nnz, codec, &mut out)?;
    Ok(GapStream::from_raw(out))
}

/// Like [`decode_doc`], reusing the caller's buffer.
pub fn decode_doc_into(bytes: &[u8], nnz: usize, codec: BitCodec, out: &mut Vec<u32>) -> Result<()> {
    out.clear();
    let mut r = BitReader::new(bytes);
    for i in 0..nnz {
        let mut x = codec.read(&mut r)?;
        if i == 0 {
            x -= 1;
        }
        if x > u32::MAX as u64 {
            return Err(Error::corrupt(format!("decoded gap {x} exceeds 32 bits")));
        }
        out.push(x as u32);
    }
    Ok(())
}

/// Size in bits of the encoded document before byte padding.
pub fn encoded_bits(gaps: &[u32], codec: BitCodec) -> u64 {
    gaps.iter()
        .enumerate()
        .map(|(i, &g)| codec.codeword_len(g as u64 + (i == 0) as u64) as u64)
        .sum()
}
