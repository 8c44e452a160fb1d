//! StreamVByte: 2-bit length controls packed four to a byte, stored apart
//! from the little-endian data bytes.
//!
//! In the per-document layout used by the index, each document owns its
//! control bytes; a trailing partial quad leaves its unused control bits
//! zero. [`StreamLayout`] instead packs all documents into one continuous
//! stream, where a control byte may straddle two documents.

use crate::error::{Error, Result};
use crate::model::{GapStream, ValueFormat};
use crate::query::{dot_sequential, DenseQuery};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SvbBlock {
    pub controls: Vec<u8>,
    pub data: Vec<u8>,
}

impl SvbBlock {
    pub fn encoded_len(&self) -> usize {
        self.controls.len() + self.data.len()
    }

    /// Control bytes followed by data bytes, the layout stored in the index.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&self.controls);
        out.extend_from_slice(&self.data);
        out
    }
}

pub fn control_len(nnz: usize) -> usize {
    nnz.div_ceil(4)
}

#[inline]
fn byte_len(x: u32) -> usize {
    match x {
        0..=0xFF => 1,
        0x100..=0xFFFF => 2,
        0x1_0000..=0xFF_FFFF => 3,
        _ => 4,
    }
}

fn push_values(values: &[u32], block: &mut SvbBlock, first_slot: usize) {
    for (i, &x) in values.iter().enumerate() {
        let slot = first_slot + i;
        if slot % 4 == 0 {
            block.controls.push(0);
        }
        let n = byte_len(x);
        *block.controls.last_mut().unwrap() |= ((n - 1) as u8) << (2 * (slot % 4));
        block.data.extend_from_slice(&x.to_le_bytes()[..n]);
    }
}

pub fn encode_doc(gaps: &GapStream) -> SvbBlock {
    let mut block = SvbBlock {
        controls: Vec::with_capacity(control_len(gaps.len())),
        data: Vec::with_capacity(gaps.len() * 2),
    };
    push_values(gaps.as_slice(), &mut block, 0);
    block
}

/// Data bytes implied by each control byte.
const QUAD_LEN: [u8; 256] = {
    let mut t = [0u8; 256];
    let mut c = 0;
    while c < 256 {
        t[c] = ((c & 3) + ((c >> 2) & 3) + ((c >> 4) & 3) + ((c >> 6) & 3) + 4) as u8;
        c += 1;
    }
    t
};

/// Byte shuffle moving the packed values of one quad into four u32 lanes;
/// 0x80 entries zero the lane byte.
const SHUFFLE: [[u8; 16]; 256] = {
    let mut t = [[0x80u8; 16]; 256];
    let mut c = 0;
    while c < 256 {
        let mut src = 0u8;
        let mut lane = 0;
        while lane < 4 {
            let n = ((c >> (2 * lane)) & 3) + 1;
            let mut b = 0;
            while b < n {
                t[c][4 * lane + b] = src;
                src += 1;
                b += 1;
            }
            lane += 1;
        }
        c += 1;
    }
    t
};

/// Checks a per-document block of `nnz` values and splits it into controls
/// and data.
pub fn split_doc(bytes: &[u8], nnz: usize) -> Result<(&[u8], &[u8])> {
    let nc = control_len(nnz);
    if bytes.len() < nc {
        return Err(Error::corrupt(format!(
            "streamvbyte block of {} bytes too short for {nc} control bytes",
            bytes.len()
        )));
    }
    let (controls, data) = bytes.split_at(nc);
    let rem = nnz % 4;
    let mut expected: usize = controls.iter().map(|&c| QUAD_LEN[c as usize] as usize).sum();
    if rem != 0 {
        let last = *controls.last().unwrap();
        if last >> (2 * rem) != 0 {
            return Err(Error::corrupt("nonzero padding bits in final control byte"));
        }
        // padding slots are counted as 1-byte values by the table
        expected -= 4 - rem;
    }
    if data.len() != expected {
        return Err(Error::corrupt(format!(
            "streamvbyte controls imply {expected} data bytes, found {}",
            data.len()
        )));
    }
    Ok((controls, data))
}

/// Reference decoder: walks the control bits one value at a time.
pub fn decode_scalar(controls: &[u8], data: &[u8], nnz: usize, out: &mut Vec<u32>) {
    out.clear();
    out.reserve(nnz);
    let mut pos = 0;
    for i in 0..nnz {
        let n = ((controls[i / 4] >> (2 * (i % 4))) & 3) as usize + 1;
        let mut le = [0u8; 4];
        le[..n].copy_from_slice(&data[pos..pos + n]);
        out.push(u32::from_le_bytes(le));
        pos += n;
    }
}

/// Shuffle-table decoder; uses SSSE3 where available and falls back to
/// [`decode_scalar`] otherwise. Inputs must have passed [`split_doc`].
pub fn decode_vectorized(controls: &[u8], data: &[u8], nnz: usize, out: &mut Vec<u32>) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("ssse3") {
            // SAFETY: feature checked above; lengths validated by split_doc.
            unsafe { decode_ssse3(controls, data, nnz, out) };
            return;
        }
    }
    decode_table(controls, data, nnz, out);
}

/// Portable version of the shuffle decode, applying the same tables.
pub fn decode_table(controls: &[u8], data: &[u8], nnz: usize, out: &mut Vec<u32>) {
    out.clear();
    out.resize(nnz.next_multiple_of(4), 0);
    let mut pos = 0;
    for (q, &c) in controls.iter().enumerate() {
        let mut window = [0u8; 16];
        let avail = (data.len() - pos).min(16);
        window[..avail].copy_from_slice(&data[pos..pos + avail]);
        let mask = &SHUFFLE[c as usize];
        let mut lanes = [0u8; 16];
        for (dst, &m) in lanes.iter_mut().zip(mask) {
            *dst = if m & 0x80 != 0 { 0 } else { window[m as usize] };
        }
        for lane in 0..4 {
            out[4 * q + lane] = u32::from_le_bytes(lanes[4 * lane..4 * lane + 4].try_into().unwrap());
        }
        pos += QUAD_LEN[c as usize] as usize;
    }
    out.truncate(nnz);
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "ssse3")]
unsafe fn decode_ssse3(controls: &[u8], data: &[u8], nnz: usize, out: &mut Vec<u32>) {
    use std::arch::x86_64::*;

    out.clear();
    out.reserve(nnz.next_multiple_of(4));
    let dst = out.as_mut_ptr();
    let mut pos = 0;
    for (q, &c) in controls.iter().enumerate() {
        let v = if pos + 16 <= data.len() {
            _mm_loadu_si128(data.as_ptr().add(pos) as *const __m128i)
        } else {
            let mut window = [0u8; 16];
            let avail = data.len() - pos;
            window[..avail].copy_from_slice(&data[pos..]);
            _mm_loadu_si128(window.as_ptr() as *const __m128i)
        };
        let mask = _mm_loadu_si128(SHUFFLE[c as usize].as_ptr() as *const __m128i);
        _mm_storeu_si128(dst.add(4 * q) as *mut __m128i, _mm_shuffle_epi8(v, mask));
        pos += QUAD_LEN[c as usize] as usize;
    }
    out.set_len(nnz);
}

/// Checked per-document decode into gaps.
pub fn decode_doc(bytes: &[u8], nnz: usize) -> Result<GapStream> {
    let (controls, data) = split_doc(bytes, nnz)?;
    let mut out = Vec::new();
    decode_vectorized(controls, data, nnz, &mut out);
    Ok(GapStream::from_raw(out))
}

/// Decode-then-multiply dot product: decodes every gap into `scratch`,
/// prefix-sums in place, then accumulates left to right.
pub fn dot_buffered(
    bytes: &[u8],
    nnz: usize,
    doc_values: &[u8],
    fmt: ValueFormat,
    q: &DenseQuery,
    scratch: &mut Vec<u32>,
) -> Result<f32> {
    let (controls, data) = split_doc(bytes, nnz)?;
    decode_vectorized(controls, data, nnz, scratch);
    prefix_sum_checked(scratch, q.dim())?;
    Ok(dot_sequential(scratch, doc_values, fmt, q))
}

/// Turns gaps into absolute IDs, failing if the last ID reaches `dim`.
#[inline]
pub(crate) fn prefix_sum_checked(ids: &mut [u32], dim: u32) -> Result<()> {
    let mut acc = 0u64;
    for x in ids.iter_mut() {
        acc += *x as u64;
        *x = acc as u32;
    }
    if !ids.is_empty() && acc >= dim as u64 {
        return Err(Error::ComponentOutOfRange {
            component: acc.min(u32::MAX as u64) as u32,
            dim,
        });
    }
    Ok(())
}

/// All documents in one continuous StreamVByte stream, with control bytes
/// shared across document boundaries.
#[derive(Debug, Clone, Default)]
pub struct StreamLayout {
    pub block: SvbBlock,
    /// Index of each document's first value in the stream, plus a final
    /// entry for the total.
    pub value_starts: Vec<usize>,
    /// Data offset of the quad containing each document's first value.
    quad_data_starts: Vec<usize>,
}

impl StreamLayout {
    pub fn encode<'a>(docs: impl IntoIterator<Item = &'a GapStream>) -> Self {
        let mut layout = StreamLayout::default();
        let mut slot = 0;
        for g in docs {
            layout.value_starts.push(slot);
            let quad_start = slot / 4;
            // data offset at the start of the quad = bytes of the values before it
            let mut off = layout.block.data.len();
            let mut back = slot;
            while back > quad_start * 4 {
                back -= 1;
                let c = layout.block.controls[back / 4];
                off -= ((c >> (2 * (back % 4))) & 3) as usize + 1;
            }
            layout.quad_data_starts.push(off);
            push_values(g.as_slice(), &mut layout.block, slot);
            slot += g.len();
        }
        layout.value_starts.push(slot);
        layout
    }

    pub fn total_bytes(&self) -> usize {
        self.block.encoded_len()
    }

    /// Decodes document `i`, returning its gaps and how many values belonging
    /// to the previous document had to be decoded and discarded first.
    pub fn decode_doc(&self, i: usize) -> (GapStream, usize) {
        let start = self.value_starts[i];
        let end = self.value_starts[i + 1];
        let first_quad = start / 4;
        let wasted = start - first_quad * 4;
        let mut pos = self.quad_data_starts[i];
        let mut out = Vec::with_capacity(end - start);
        for slot in first_quad * 4..end {
            let n = ((self.block.controls[slot / 4] >> (2 * (slot % 4))) & 3) as usize + 1;
            if slot >= start {
                let mut le = [0u8; 4];
                le[..n].copy_from_slice(&self.block.data[pos..pos + n]);
                out.push(u32::from_le_bytes(le));
            }
            pos += n;
        }
        (GapStream::from_raw(out), wasted)
    }
}
