//! Classic variable-byte codes: seven payload bits per byte, least
//! significant group first, with the high bit set on every byte except the
//! last. Gaps are encoded as-is since zero is representable.

use crate::error::{Error, Result};
use crate::model::GapStream;

/// Values at or above this bound need a fourth byte and are rejected: 16-bit
/// gaps never need more than three.
pub const VBYTE_LIMIT: u32 = 1 << 21;

#[inline]
pub fn vbyte_encode(mut x: u32, out: &mut Vec<u8>) {
    assert!(x < VBYTE_LIMIT, "vbyte value {x} needs more than 3 bytes");
    while x >= 0x80 {
        out.push((x as u8 & 0x7F) | 0x80);
        x >>= 7;
    }
    out.push(x as u8);
}

/// Decodes the codeword starting at `pos`, returning the value and the
/// position just past it. Evaluates Σ (bᵢ mod 2⁷)·2^(7i).
#[inline]
pub fn vbyte_decode(bytes: &[u8], pos: usize) -> Result<(u32, usize)> {
    let mut value = 0u32;
    for i in 0..3 {
        let Some(&b) = bytes.get(pos + i) else {
            return Err(Error::corrupt(format!(
                "vbyte codeword at {pos} runs past end of buffer"
            )));
        };
        value |= ((b & 0x7F) as u32) << (7 * i);
        if b & 0x80 == 0 {
            return Ok((value, pos + i + 1));
        }
    }
    Err(Error::corrupt(format!(
        "vbyte codeword at {pos} longer than 3 bytes"
    )))
}

pub fn encode_doc(gaps: &GapStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(gaps.len() + gaps.len() / 2);
    for &g in gaps.as_slice() {
        vbyte_encode(g, &mut out);
    }
    out
}

pub fn decode_doc_into(bytes: &[u8], nnz: usize, out: &mut Vec<u32>) -> Result<()> {
    out.clear();
    let mut pos = 0;
    for _ in 0..nnz {
        let (v, next) = vbyte_decode(bytes, pos)?;
        out.push(v);
        pos = next;
    }
    if pos != bytes.len() {
        return Err(Error::corrupt(format!(
            "{} bytes left after decoding {nnz} vbyte values",
            bytes.len() - pos
        )));
    }
    Ok(())
}

pub fn decode_doc(bytes: &[u8], nnz: usize) -> Result<GapStream> {
    let mut out = Vec::with_capacity(nnz);
    decode_doc_into(bytes, nnz, &mut out)?;
    Ok(GapStream::from_raw(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enc(x: u32) -> Vec<u8> {
        let mut v = Vec::new();
        vbyte_encode(x, &mut v);
        v
    }

    #[test]
    fn codewords() {
        assert_eq!(enc(0), [0x00]);
        assert_eq!(enc(127), [0x7F]);
        assert_eq!(enc(128), [0x80, 0x01]);
        assert_eq!(enc(300), [0xAC, 0x02]);
        assert_eq!(vbyte_decode(&[0xAC, 0x02], 0).unwrap(), (300, 2));
    }

    #[test]
    fn exhaustive_round_trip() {
        let mut buf = Vec::new();
        for x in 0..VBYTE_LIMIT {
            buf.clear();
            vbyte_encode(x, &mut buf);
            let expected_len = match x {
                0..=0x7F => 1,
                0x80..=0x3FFF => 2,
                _ => 3,
            };
            assert_eq!(buf.len(), expected_len);
            assert_eq!(*buf.last().unwrap() & 0x80, 0);
            assert_eq!(vbyte_decode(&buf, 0).unwrap(), (x, buf.len()));
        }
    }

    #[test]
    fn unterminated() {
        assert!(vbyte_decode(&[0x80], 0).is_err());
        assert!(vbyte_decode(&[0x80, 0x80, 0x80, 0x01], 0).is_err());
        assert!(decode_doc(&[0x01, 0x02], 1).is_err());
    }

    #[test]
    fn doc_round_trip() {
        let g = GapStream::from_raw(vec![0, 1, 127, 128, 300, 65535]);
        let b = encode_doc(&g);
        assert_eq!(decode_doc(&b, 6).unwrap(), g);
    }
}
