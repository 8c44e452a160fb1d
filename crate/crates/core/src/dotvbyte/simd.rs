#![cfg(target_arch = "x86_64")]

use std::arch::x86_64::*;

use super::{group_len, DocView, SHUFFLE};
use crate::model::ValueFormat;
use crate::query::DenseQuery;

/// Loads the 16 bytes starting at `pos`, zero-padding past the end of `data`.
/// Bytes beyond the group are never selected by the shuffle masks.
#[inline(always)]
unsafe fn load_group(data: &[u8], pos: usize) -> __m128i {
    if pos + 16 <= data.len() {
        _mm_loadu_si128(data.as_ptr().add(pos) as *const __m128i)
    } else {
        let mut window = [0u8; 16];
        let avail = data.len() - pos;
        window[..avail].copy_from_slice(&data[pos..]);
        _mm_loadu_si128(window.as_ptr() as *const __m128i)
    }
}

/// Broadcasts u16 lane 7 to every lane.
const LAST_LANE: [u8; 16] = [14, 15, 14, 15, 14, 15, 14, 15, 14, 15, 14, 15, 14, 15, 14, 15];

/// Expands one group into eight u16 lanes and turns them into absolute IDs:
/// inclusive prefix sum across lanes plus the running carry, which stays
/// broadcast in a vector register between groups.
#[inline(always)]
unsafe fn decode_group(data: &[u8], pos: usize, control: u8, carry: &mut __m128i) -> __m128i {
    let raw = load_group(data, pos);
    let mask = _mm_loadu_si128(SHUFFLE[control as usize].as_ptr() as *const __m128i);
    let mut x = _mm_shuffle_epi8(raw, mask);
    x = _mm_add_epi16(x, _mm_slli_si128::<2>(x));
    x = _mm_add_epi16(x, _mm_slli_si128::<4>(x));
    x = _mm_add_epi16(x, _mm_slli_si128::<8>(x));
    x = _mm_add_epi16(x, *carry);
    *carry = _mm_shuffle_epi8(x, _mm_loadu_si128(LAST_LANE.as_ptr() as *const __m128i));
    x
}

#[inline(always)]
unsafe fn last_id(carry: __m128i) -> u32 {
    _mm_extract_epi16::<0>(carry) as u16 as u32
}

#[target_feature(enable = "ssse3")]
pub(super) unsafe fn decode_groups_ssse3(doc: &DocView, out: &mut Vec<u32>) {
    let data = doc.readable();
    let mut pos = 0;
    let mut carry = _mm_setzero_si128();
    let mut lanes = [0u16; 8];
    for &c in doc.controls() {
        let ids = decode_group(data, pos, c, &mut carry);
        _mm_storeu_si128(lanes.as_mut_ptr() as *mut __m128i, ids);
        out.extend(lanes.iter().map(|&x| x as u32));
        pos += group_len(c);
    }
}

/// Shuffle decode with a scalar gather-multiply per lane.
#[target_feature(enable = "ssse3")]
pub(super) unsafe fn dot_groups_ssse3(
    doc: &DocView,
    values: &[u8],
    fmt: ValueFormat,
    q: &DenseQuery,
) -> ([f32; 8], u32) {
    let qp = q.padded();
    let data = doc.readable();
    let mut acc = [0.0f32; 8];
    let mut ids = [0u16; 8];
    let mut pos = 0;
    let mut carry = _mm_setzero_si128();
    for (g, &c) in doc.controls().iter().enumerate() {
        let x = decode_group(data, pos, c, &mut carry);
        _mm_storeu_si128(ids.as_mut_ptr() as *mut __m128i, x);
        for j in 0..8 {
            acc[j] += fmt.read(values, 8 * g + j) * qp[ids[j] as usize];
        }
        pos += group_len(c);
    }
    (acc, last_id(carry))
}

/// Fully fused group kernel: shuffle decode, prefix sum, 8-wide gather,
/// value conversion, multiply, and lane-wise add.
#[target_feature(enable = "avx2,f16c,ssse3")]
pub(super) unsafe fn dot_groups_avx2(
    doc: &DocView,
    values: &[u8],
    fmt: ValueFormat,
    q: &DenseQuery,
) -> ([f32; 8], u32) {
    let qp = q.padded().as_ptr();
    let data = doc.readable();
    let vp = values.as_ptr();
    let scale = _mm256_set1_ps(fmt.fixed_scale());
    let mut acc = _mm256_setzero_ps();
    let mut pos = 0;
    let mut carry = _mm_setzero_si128();
    for (g, &c) in doc.controls().iter().enumerate() {
        let ids = decode_group(data, pos, c, &mut carry);
        let gathered = _mm256_i32gather_ps::<4>(qp, _mm256_cvtepu16_epi32(ids));
        let vals = load_values(vp, g, fmt, scale);
        acc = _mm256_add_ps(acc, _mm256_mul_ps(vals, gathered));
        pos += group_len(c);
    }
    let mut lanes = [0.0f32; 8];
    _mm256_storeu_ps(lanes.as_mut_ptr(), acc);
    (lanes, last_id(carry))
}

/// Converts the eight stored values of group `g` to f32 lanes.
#[inline(always)]
unsafe fn load_values(vp: *const u8, g: usize, fmt: ValueFormat, scale: __m256) -> __m256 {
    match fmt {
        ValueFormat::F32 => _mm256_loadu_ps(vp.add(32 * g) as *const f32),
        ValueFormat::F16 => _mm256_cvtph_ps(_mm_loadu_si128(vp.add(16 * g) as *const __m128i)),
        ValueFormat::FixedU8 { .. } => {
            let bytes = _mm_loadl_epi64(vp.add(8 * g) as *const __m128i);
            _mm256_mul_ps(_mm256_cvtepi32_ps(_mm256_cvtepu8_epi32(bytes)), scale)
        }
    }
}

/// The same gather-multiply-add over uncompressed little-endian u16 IDs,
/// covering the first `8 * (nnz / 8)` components.
#[target_feature(enable = "avx2,f16c")]
pub(super) unsafe fn dot_raw_avx2(ids: &[u8], values: &[u8], fmt: ValueFormat, q: &DenseQuery) -> [f32; 8] {
    let qp = q.padded().as_ptr();
    let vp = values.as_ptr();
    let scale = _mm256_set1_ps(fmt.fixed_scale());
    let mut acc = _mm256_setzero_ps();
    for g in 0..ids.len() / 16 {
        let raw = _mm_loadu_si128(ids.as_ptr().add(16 * g) as *const __m128i);
        let gathered = _mm256_i32gather_ps::<4>(qp, _mm256_cvtepu16_epi32(raw));
        acc = _mm256_add_ps(acc, _mm256_mul_ps(load_values(vp, g, fmt, scale), gathered));
    }
    let mut lanes = [0.0f32; 8];
    _mm256_storeu_ps(lanes.as_mut_ptr(), acc);
    lanes
}
