//! DotVByte: a byte codec for 16-bit gap streams with one control bit per
//! gap and a fused inner-product kernel.
//!
//! A document with `nnz` components is stored as
//!
//! ```text
//! [nnz / 8 control bytes][data bytes][(nnz % 8) × u16 tail]
//! ```
//!
//! Gaps are grouped eight at a time. Bit `j` of a group's control byte is 0
//! when gap `j` fits in one data byte and 1 when it needs two
//! (little-endian), so a group's data length is `8 + popcount(control)`.
//! The `nnz % 8` components that do not fill a group are stored as raw
//! absolute 16-bit IDs, which keeps every document aligned to whole control
//! bytes: no control byte is ever shared with a neighbouring document.
//!
//! The dot product never materializes decoded IDs. Per group it expands the
//! data bytes into eight u16 lanes with a shuffle selected by the control
//! byte, prefix-sums the lanes plus the carry from the previous group,
//! gathers the query at those IDs, converts the eight document values to
//! f32, and adds the products into eight lane accumulators. The lanes are
//! reduced in order 0..8 at the end of the document and the tail is added
//! last. [`Kernel::Scalar`] follows exactly the same arithmetic, so every
//! kernel returns bit-identical results.

mod simd;
mod table;

use crate::error::{Error, Result};
use crate::model::{GapStream, ValueFormat};
use crate::query::DenseQuery;

pub(crate) use table::{group_len, SHUFFLE};

/// An owned encoded document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DotVByteDoc {
    pub controls: Vec<u8>,
    pub data: Vec<u8>,
    pub tail: Vec<u16>,
    pub nnz: usize,
}

impl DotVByteDoc {
    pub fn encoded_len(&self) -> usize {
        self.controls.len() + self.data.len() + 2 * self.tail.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&self.controls);
        out.extend_from_slice(&self.data);
        for t in &self.tail {
            out.extend_from_slice(&t.to_le_bytes());
        }
        out
    }

    pub fn view(&self) -> DocView<'_> {
        DocView {
            controls: &self.controls,
            data: &self.data,
            readable: &self.data,
            tail: TailRef::Owned(&self.tail),
            nnz: self.nnz,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum TailRef<'a> {
    Bytes(&'a [u8]),
    Owned(&'a [u16]),
}

/// A structurally validated, borrowed document.
#[derive(Debug, Clone, Copy)]
pub struct DocView<'a> {
    controls: &'a [u8],
    data: &'a [u8],
    /// `data` plus whatever bytes follow it in the buffer it was parsed
    /// from; vector loads may read ahead into them.
    readable: &'a [u8],
    tail: TailRef<'a>,
    nnz: usize,
}

impl<'a> DocView<'a> {
    /// Splits a stored document, checking that the byte count matches what
    /// `nnz` and the control bytes imply.
    pub fn parse(bytes: &'a [u8], nnz: usize) -> Result<Self> {
        Self::parse_in(bytes, 0, bytes.len(), nnz)
    }

    /// Like [`DocView::parse`] for the document stored at `buf[start..end]`,
    /// letting vector loads read past its end into the rest of `buf`.
    pub fn parse_in(buf: &'a [u8], start: usize, end: usize, nnz: usize) -> Result<Self> {
        let bytes = &buf[start..end];
        let groups = nnz / 8;
        if bytes.len() < groups {
            return Err(Error::corrupt(format!(
                "dotvbyte document of {} bytes too short for {groups} control bytes",
                bytes.len()
            )));
        }
        let (controls, rest) = bytes.split_at(groups);
        let data_len: usize = controls.iter().map(|&c| group_len(c)).sum();
        let tail_len = 2 * (nnz % 8);
        if rest.len() != data_len + tail_len {
            return Err(Error::corrupt(format!(
                "dotvbyte document has {} payload bytes, controls imply {}",
                rest.len(),
                data_len + tail_len
            )));
        }
        let (data, tail) = rest.split_at(data_len);
        Ok(DocView {
            controls,
            data,
            readable: &buf[start + groups..],
            tail: TailRef::Bytes(tail),
            nnz,
        })
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn controls(&self) -> &'a [u8] {
        self.controls
    }

    pub fn data(&self) -> &'a [u8] {
        self.data
    }

    pub(crate) fn readable(&self) -> &'a [u8] {
        self.readable
    }

    pub fn tail_len(&self) -> usize {
        self.nnz % 8
    }

    #[inline(always)]
    pub fn tail_id(&self, i: usize) -> u16 {
        match self.tail {
            TailRef::Bytes(b) => u16::from_le_bytes([b[2 * i], b[2 * i + 1]]),
            TailRef::Owned(t) => t[i],
        }
    }
}

pub fn encode_doc(gaps: &GapStream) -> Result<DotVByteDoc> {
    let g = gaps.as_slice();
    if let Some((i, &x)) = g.iter().enumerate().find(|(_, &x)| x > u16::MAX as u32) {
        return Err(Error::validation(format!(
            "gap {x} at position {i} does not fit in 16 bits"
        )));
    }
    let nnz = g.len();
    let groups = nnz / 8;
    let mut doc = DotVByteDoc {
        controls: Vec::with_capacity(groups),
        data: Vec::with_capacity(groups * 10),
        tail: Vec::with_capacity(nnz % 8),
        nnz,
    };
    for chunk in g[..groups * 8].chunks_exact(8) {
        let mut control = 0u8;
        for (j, &x) in chunk.iter().enumerate() {
            if x < 256 {
                doc.data.push(x as u8);
            } else {
                control |= 1 << j;
                doc.data.extend_from_slice(&(x as u16).to_le_bytes());
            }
        }
        doc.controls.push(control);
    }
    let mut id: u64 = g[..groups * 8].iter().map(|&x| x as u64).sum();
    for &x in &g[groups * 8..] {
        id += x as u64;
        if id > u16::MAX as u64 {
            return Err(Error::validation(format!(
                "component {id} does not fit in 16 bits"
            )));
        }
        doc.tail.push(id as u16);
    }
    Ok(doc)
}

/// Which decode/dot implementation to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// Walks control bits one gap at a time.
    Scalar,
    /// SSSE3 shuffle decode with scalar gather.
    Ssse3,
    /// SSSE3 shuffle decode, AVX2 gather, F16C value conversion.
    Avx2,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Scalar => "scalar",
            Kernel::Ssse3 => "ssse3",
            Kernel::Avx2 => "avx2",
        }
    }

    /// Best kernel supported by the running CPU.
    pub fn detect() -> Kernel {
        #[cfg(target_arch = "x86_64")]
        {
            if std::arch::is_x86_feature_detected!("avx2")
                && std::arch::is_x86_feature_detected!("f16c")
            {
                return Kernel::Avx2;
            }
            if std::arch::is_x86_feature_detected!("ssse3") {
                return Kernel::Ssse3;
            }
        }
        Kernel::Scalar
    }

    /// This kernel, or the best supported one if the CPU lacks it.
    pub fn supported(self) -> Kernel {
        let best = Kernel::detect();
        if self as u8 <= best as u8 {
            self
        } else {
            best
        }
    }

    /// Every kernel usable on this CPU, scalar first.
    pub fn available() -> Vec<Kernel> {
        let best = Kernel::detect();
        [Kernel::Scalar, Kernel::Ssse3, Kernel::Avx2]
            .into_iter()
            .filter(|k| *k as u8 <= best as u8)
            .collect()
    }
}

/// Decodes a document into ascending absolute IDs with the given kernel,
/// verifying order and the dimension bound.
pub fn decode_with(kernel: Kernel, doc: &DocView, dim: u32, out: &mut Vec<u32>) -> Result<()> {
    out.clear();
    out.reserve(doc.nnz);
    match kernel.supported() {
        Kernel::Scalar => decode_groups_scalar(doc, out),
        #[cfg(target_arch = "x86_64")]
        Kernel::Ssse3 | Kernel::Avx2 => unsafe { simd::decode_groups_ssse3(doc, out) },
        #[cfg(not(target_arch = "x86_64"))]
        _ => decode_groups_scalar(doc, out),
    }
    for i in 0..doc.tail_len() {
        out.push(doc.tail_id(i) as u32);
    }
    check_ids(out, dim)
}

pub fn decode(doc: &DocView, dim: u32) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    decode_with(Kernel::detect(), doc, dim, &mut out)?;
    Ok(out)
}

fn check_ids(ids: &[u32], dim: u32) -> Result<()> {
    crate::model::check_ascending(ids).map_err(|e| Error::corrupt(e.to_string()))?;
    match ids.last() {
        Some(&c) if c >= dim => Err(Error::ComponentOutOfRange { component: c, dim }),
        _ => Ok(()),
    }
}

fn decode_groups_scalar(doc: &DocView, out: &mut Vec<u32>) {
    let mut pos = 0;
    let mut carry = 0u32;
    for &c in doc.controls {
        for j in 0..8 {
            let gap = if (c >> j) & 1 == 1 {
                let g = u16::from_le_bytes([doc.data[pos], doc.data[pos + 1]]);
                pos += 2;
                g
            } else {
                pos += 1;
                doc.data[pos - 1] as u16
            };
            carry += gap as u32;
            out.push(carry);
        }
    }
}

/// Fused dot product using the best available kernel.
pub fn dot(doc: &DocView, values: &[u8], fmt: ValueFormat, q: &DenseQuery) -> Result<f32> {
    dot_with(Kernel::detect(), doc, values, fmt, q)
}

pub fn dot_with(
    kernel: Kernel,
    doc: &DocView,
    values: &[u8],
    fmt: ValueFormat,
    q: &DenseQuery,
) -> Result<f32> {
    if values.len() != doc.nnz * fmt.bytes_per_value() {
        return Err(Error::corrupt(format!(
            "{} value bytes for {} components in {fmt:?}",
            values.len(),
            doc.nnz
        )));
    }
    let (lanes, last) = match kernel.supported() {
        Kernel::Scalar => dot_groups_scalar(doc, values, fmt, q),
        #[cfg(target_arch = "x86_64")]
        Kernel::Ssse3 => unsafe { simd::dot_groups_ssse3(doc, values, fmt, q) },
        #[cfg(target_arch = "x86_64")]
        Kernel::Avx2 => unsafe { simd::dot_groups_avx2(doc, values, fmt, q) },
        #[cfg(not(target_arch = "x86_64"))]
        _ => dot_groups_scalar(doc, values, fmt, q),
    };
    if !doc.controls.is_empty() && last >= q.dim() {
        return Err(Error::ComponentOutOfRange {
            component: last,
            dim: q.dim(),
        });
    }
    let tail = dot_tail(doc, values, fmt, q)?;
    Ok(reduce_lanes(&lanes) + tail)
}

/// Lane sums for uncompressed u16 IDs laid out like DotVByte groups: lane
/// `j` accumulates components `8g + j` over every full group `g`.
pub(crate) fn raw_group_lanes(kernel: Kernel, ids: &[u8], values: &[u8], fmt: ValueFormat, q: &DenseQuery) -> [f32; 8] {
    debug_assert_eq!(ids.len() / 2 * fmt.bytes_per_value(), values.len());
    #[cfg(target_arch = "x86_64")]
    if kernel.supported() == Kernel::Avx2 {
        // SAFETY: feature checked by `supported`; the gather indices are u16
        // and the padded query covers the whole u16 range.
        return unsafe { simd::dot_raw_avx2(ids, values, fmt, q) };
    }
    let _ = kernel;
    let qp = q.padded();
    let mut lanes = [0.0f32; 8];
    for g in 0..ids.len() / 16 {
        for (j, lane) in lanes.iter_mut().enumerate() {
            let i = 8 * g + j;
            let id = u16::from_le_bytes([ids[2 * i], ids[2 * i + 1]]) as usize;
            *lane += fmt.read(values, i) * qp[id];
        }
    }
    lanes
}

#[inline(always)]
pub(crate) fn reduce_lanes(lanes: &[f32; 8]) -> f32 {
    let mut s = 0.0f32;
    for &l in lanes {
        s += l;
    }
    s
}

#[inline(always)]
pub(crate) fn dot_tail(doc: &DocView, values: &[u8], fmt: ValueFormat, q: &DenseQuery) -> Result<f32> {
    let base = doc.controls.len() * 8;
    let mut acc = 0.0f32;
    for i in 0..doc.tail_len() {
        let c = doc.tail_id(i);
        if c as u32 >= q.dim() {
            return Err(Error::ComponentOutOfRange {
                component: c as u32,
                dim: q.dim(),
            });
        }
        acc += fmt.read(values, base + i) * q.get(c);
    }
    Ok(acc)
}

/// Reference group kernel: eight lane accumulators, one gap at a time.
/// Returns the lanes and the last decoded ID.
fn dot_groups_scalar(doc: &DocView, values: &[u8], fmt: ValueFormat, q: &DenseQuery) -> ([f32; 8], u32) {
    let qp = q.padded();
    let mut lanes = [0.0f32; 8];
    let mut pos = 0;
    let mut carry = 0u16;
    for (g, &c) in doc.controls.iter().enumerate() {
        for (j, lane) in lanes.iter_mut().enumerate() {
            let gap = if (c >> j) & 1 == 1 {
                let x = u16::from_le_bytes([doc.data[pos], doc.data[pos + 1]]);
                pos += 2;
                x
            } else {
                pos += 1;
                doc.data[pos - 1] as u16
            };
            carry = carry.wrapping_add(gap);
            *lane += fmt.read(values, 8 * g + j) * qp[carry as usize];
        }
    }
    (lanes, carry as u32)
}

/// Per-document size breakdown in bits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SizeBreakdown {
    pub control_bits: u64,
    pub data_bits: u64,
    pub tail_bits: u64,
}

impl SizeBreakdown {
    pub fn of(doc: &DocView) -> Self {
        SizeBreakdown {
            control_bits: 8 * doc.controls.len() as u64,
            data_bits: 8 * doc.data.len() as u64,
            tail_bits: 16 * doc.tail_len() as u64,
        }
    }

    pub fn total(&self) -> u64 {
        self.control_bits + self.data_bits + self.tail_bits
    }
}

impl std::ops::AddAssign for SizeBreakdown {
    fn add_assign(&mut self, o: Self) {
        self.control_bits += o.control_bits;
        self.data_bits += o.data_bits;
        self.tail_bits += o.tail_bits;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{from_gaps, to_gaps, SparseVector};
    use proptest::prelude::*;

    fn enc(components: &[u32]) -> (DotVByteDoc, Vec<u8>) {
        let d = encode_doc(&to_gaps(components).unwrap()).unwrap();
        let b = d.to_bytes();
        (d, b)
    }

    #[test]
    fn eight_small_gaps_take_nine_bits_each() {
        let doc = encode_doc(&GapStream::from_raw(vec![0, 1, 1, 1, 1, 1, 1, 1])).unwrap();
        assert_eq!(doc.controls, [0x00]);
        assert_eq!(doc.data.len(), 8);
        assert!(doc.tail.is_empty());
        assert_eq!(doc.encoded_len() * 8, 9 * 8);
    }

    #[test]
    fn wide_first_gap() {
        let doc = encode_doc(&GapStream::from_raw(vec![300, 1, 1, 1, 1, 1, 1, 1])).unwrap();
        assert_eq!(doc.controls, [0x01]);
        assert_eq!(doc.data.len(), 9);
        assert_eq!(&doc.data[..2], &300u16.to_le_bytes());
    }

    #[test]
    fn eleven_components_leave_three_raw() {
        let c: Vec<u32> = vec![1, 4, 9, 16, 25, 36, 49, 64, 81, 100, 121];
        let (doc, bytes) = enc(&c);
        assert_eq!(doc.controls.len(), 1);
        assert_eq!(doc.tail, [81, 100, 121]);
        let view = DocView::parse(&bytes, 11).unwrap();
        for k in Kernel::available() {
            let mut out = Vec::new();
            decode_with(k, &view, 30522, &mut out).unwrap();
            assert_eq!(out, c);
        }
    }

    #[test]
    fn group_prefix_sum() {
        let bytes = [0x00, 3, 4, 3, 1, 1, 1, 1, 1];
        let view = DocView::parse(&bytes, 8).unwrap();
        for k in Kernel::available() {
            let mut out = Vec::new();
            decode_with(k, &view, 100, &mut out).unwrap();
            assert_eq!(out, [3, 7, 10, 11, 12, 13, 14, 15]);
        }
    }

    #[test]
    fn empty_doc() {
        let view = DocView::parse(&[], 0).unwrap();
        assert!(decode(&view, 10).unwrap().is_empty());
        let q = DenseQuery::zeros(10).unwrap();
        assert_eq!(dot(&view, &[], ValueFormat::F32, &q).unwrap(), 0.0);
    }

    #[test]
    fn tail_only_dot() {
        let (_, bytes) = enc(&[2, 5]);
        let view = DocView::parse(&bytes, 2).unwrap();
        let q = DenseQuery::from_sparse(&SparseVector::new(vec![2, 5], vec![3.0, 0.5]).unwrap(), 10).unwrap();
        let mut vals = Vec::new();
        ValueFormat::F32.encode_into(&[1.0, 2.0], &mut vals).unwrap();
        for k in Kernel::available() {
            assert_eq!(dot_with(k, &view, &vals, ValueFormat::F32, &q).unwrap(), 4.0);
        }
        let zero = DenseQuery::zeros(10).unwrap();
        assert_eq!(dot(&view, &vals, ValueFormat::F32, &zero).unwrap(), 0.0);
    }

    #[test]
    fn parse_rejects_bad_lengths() {
        let (_, bytes) = enc(&(0..11).collect::<Vec<_>>());
        assert!(DocView::parse(&bytes, 11).is_ok());
        let mut padded = vec![0xEE; 3];
        padded.extend_from_slice(&bytes);
        padded.extend_from_slice(&[0xEE; 20]);
        let view = DocView::parse_in(&padded, 3, 3 + bytes.len(), 11).unwrap();
        assert_eq!(view.readable().len(), padded.len() - 4);
        for k in Kernel::available() {
            let mut out = Vec::new();
            decode_with(k, &view, 1 << 16, &mut out).unwrap();
            assert_eq!(out, decode(&DocView::parse(&bytes, 11).unwrap(), 1 << 16).unwrap());
        }
        assert!(DocView::parse(&bytes[..bytes.len() - 1], 11).is_err());
        assert!(DocView::parse(&bytes, 12).is_err());
        let mut flipped = bytes.clone();
        flipped[0] = 0x01; // claims one more data byte than present
        assert!(DocView::parse(&flipped, 11).is_err());
    }

    #[test]
    fn decode_rejects_out_of_range_and_disorder() {
        let (_, bytes) = enc(&(0..9).collect::<Vec<_>>());
        let view = DocView::parse(&bytes, 9).unwrap();
        assert!(decode(&view, 8).is_err());
        assert!(decode(&view, 9).is_ok());

        let mut bad = bytes.clone();
        let n = bad.len();
        bad[n - 2..].copy_from_slice(&3u16.to_le_bytes()); // tail id below last group id
        let view = DocView::parse(&bad, 9).unwrap();
        for k in Kernel::available() {
            let mut out = Vec::new();
            assert!(decode_with(k, &view, 100, &mut out).is_err());
        }
    }

    #[test]
    fn rejects_wide_gaps() {
        assert!(encode_doc(&GapStream::from_raw(vec![65536])).is_err());
        assert!(encode_doc(&GapStream::from_raw(vec![65535])).is_ok());
        assert!(encode_doc(&GapStream::from_raw(vec![65535, 1])).is_err());
    }

    #[test]
    fn max_gap_and_last_component() {
        let mut c: Vec<u32> = (0..15).collect();
        c.push(65535); // gap of 65521 inside the second group
        let (_, bytes) = enc(&c);
        let view = DocView::parse(&bytes, 16).unwrap();
        for k in Kernel::available() {
            let mut out = Vec::new();
            decode_with(k, &view, 65536, &mut out).unwrap();
            assert_eq!(out, c);
        }
        let c = vec![0, 65535];
        let (_, bytes) = enc(&c);
        assert_eq!(decode(&DocView::parse(&bytes, 2).unwrap(), 65536).unwrap(), c);
    }

    fn sparse_strategy() -> impl Strategy<Value = Vec<u32>> {
        prop_oneof![
            proptest::collection::btree_set(0u32..65536, 0..400),
            proptest::collection::btree_set(0u32..300, 0..40),
        ]
        .prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn round_trip_all_kernels(c in sparse_strategy()) {
            let g = to_gaps(&c).unwrap();
            let doc = encode_doc(&g).unwrap();
            let bytes = doc.to_bytes();
            let view = DocView::parse(&bytes, c.len()).unwrap();
            prop_assert_eq!(doc.controls.len(), c.len() / 8);
            prop_assert_eq!(doc.tail.len(), c.len() % 8);
            for k in Kernel::available() {
                let mut out = Vec::new();
                decode_with(k, &view, 65536, &mut out).unwrap();
                prop_assert_eq!(&out, &from_gaps(&g, 65536).unwrap());
            }
            let mut out = Vec::new();
            decode_with(Kernel::Scalar, &doc.view(), 65536, &mut out).unwrap();
            prop_assert_eq!(out, c);
        }

        #[test]
        fn kernels_bit_identical(
            c in sparse_strategy(),
            seed in any::<u64>(),
            which in 0usize..3,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let fmt = [ValueFormat::F32, ValueFormat::F16, ValueFormat::FixedU8 { frac_bits: 5 }][which];
            let vals: Vec<f32> = c.iter().map(|_| rng.random_range(0.0..7.0)).collect();
            let mut vb = Vec::new();
            fmt.encode_into(&vals, &mut vb).unwrap();
            let qc: Vec<(u32, f32)> = (0..50).map(|_| (rng.random_range(0..65536), rng.random_range(0.0..3.0))).collect();
            let mut qc = qc;
            qc.sort_by_key(|p| p.0);
            qc.dedup_by_key(|p| p.0);
            let q = DenseQuery::from_sparse(&SparseVector::from_pairs(qc).unwrap(), 65536).unwrap();
            let bytes = encode_doc(&to_gaps(&c).unwrap()).unwrap().to_bytes();
            let view = DocView::parse(&bytes, c.len()).unwrap();
            let reference = dot_with(Kernel::Scalar, &view, &vb, fmt, &q).unwrap();
            for k in Kernel::available() {
                prop_assert_eq!(dot_with(k, &view, &vb, fmt, &q).unwrap().to_bits(), reference.to_bits());
            }
        }
    }
}
