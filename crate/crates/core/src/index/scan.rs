use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use super::{Codec, CompressedForwardIndex};
use crate::bitstream;
use crate::bytecodec::{svb, vbyte};
use crate::dotvbyte::{self, Kernel};
use crate::error::{Error, Result};
use crate::model::ValueFormat;
use crate::query::{dot_sequential, DenseQuery};

/// Computes document/query inner products with the index's codec kernel.
/// Holds the decode buffer reused by the buffered codecs.
pub struct Scorer<'a> {
    index: &'a CompressedForwardIndex,
    kernel: Kernel,
    scratch: Vec<u32>,
}

impl<'a> Scorer<'a> {
    pub fn new(index: &'a CompressedForwardIndex) -> Self {
        Self::with_kernel(index, Kernel::detect())
    }

    /// Forces the kernel used by DotVByte and uncompressed indexes; the
    /// buffered codecs ignore it.
    pub fn with_kernel(index: &'a CompressedForwardIndex, kernel: Kernel) -> Self {
        Scorer {
            index,
            kernel: kernel.supported(),
            scratch: Vec::with_capacity(1024),
        }
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn score(&mut self, doc: usize, q: &DenseQuery) -> Result<f32> {
        let idx = self.index;
        if q.dim() != idx.dim() {
            return Err(Error::validation(format!(
                "query dimension {} does not match index dimension {}",
                q.dim(),
                idx.dim()
            )));
        }
        let payload = idx.doc_payload(doc);
        let nnz = idx.nnz(doc);
        let values = idx.doc_values(doc);
        let fmt = idx.value_format();
        match idx.codec() {
            Codec::Raw => Ok(dot_raw(self.kernel, payload, values, fmt, q)),
            Codec::DotVByte => {
                let view = idx.doc_view(doc)?;
                dotvbyte::dot_with(self.kernel, &view, values, fmt, q)
            }
            Codec::StreamVByte => svb::dot_buffered(payload, nnz, values, fmt, q, &mut self.scratch),
            Codec::VByte => {
                vbyte::decode_doc_into(payload, nnz, &mut self.scratch)?;
                svb::prefix_sum_checked(&mut self.scratch, q.dim())?;
                Ok(dot_sequential(&self.scratch, values, fmt, q))
            }
            Codec::Gamma | Codec::Delta | Codec::Zeta { .. } => {
                let bc = match idx.codec() {
                    Codec::Gamma => bitstream::BitCodec::Gamma,
                    Codec::Delta => bitstream::BitCodec::Delta,
                    Codec::Zeta { k } => bitstream::BitCodec::Zeta { k },
                    _ => unreachable!(),
                };
                bitstream::decode_doc_into(payload, nnz, bc, &mut self.scratch)?;
                svb::prefix_sum_checked(&mut self.scratch, q.dim())?;
                Ok(dot_sequential(&self.scratch, values, fmt, q))
            }
        }
    }

    /// Scores every document into `out`.
    pub fn score_all(&mut self, q: &DenseQuery, out: &mut Vec<f32>) -> Result<()> {
        out.clear();
        out.reserve(self.index.len());
        for i in 0..self.index.len() {
            out.push(self.score(i, q)?);
        }
        Ok(())
    }
}

/// Uncompressed components, accumulated with the same lane layout as the
/// DotVByte kernel so the two produce identical scores.
fn dot_raw(kernel: Kernel, payload: &[u8], values: &[u8], fmt: ValueFormat, q: &DenseQuery) -> f32 {
    let qp = q.padded();
    let nnz = payload.len() / 2;
    let full = nnz / 8 * 8;
    let lanes = dotvbyte::raw_group_lanes(kernel, &payload[..2 * full], &values[..full * fmt.bytes_per_value()], fmt, q);
    let mut tail = 0.0f32;
    for i in full..nnz {
        let id = u16::from_le_bytes([payload[2 * i], payload[2 * i + 1]]) as usize;
        tail += fmt.read(values, i) * qp[id];
    }
    dotvbyte::reduce_lanes(&lanes) + tail
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub doc: u32,
    pub score: f32,
}

impl Hit {
    /// Ranking order: higher score first, then lower document ID.
    fn rank_cmp(&self, other: &Hit) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then(self.doc.cmp(&other.doc))
    }
}

// Heap order: the worst-ranked hit sits on top.
struct Worst(Hit);

impl PartialEq for Worst {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Worst {}
impl PartialOrd for Worst {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Worst {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.rank_cmp(&o.0)
    }
}

#[derive(Debug, Clone)]
pub struct TopK {
    pub hits: Vec<Hit>,
    pub elapsed: Duration,
}

/// Scores every document and keeps the `k` best, highest score first with
/// ties broken by ascending document ID.
pub fn full_scan_topk(index: &CompressedForwardIndex, q: &DenseQuery, k: usize) -> Result<TopK> {
    full_scan_topk_with(&mut Scorer::new(index), q, k)
}

pub fn full_scan_topk_with(scorer: &mut Scorer, q: &DenseQuery, k: usize) -> Result<TopK> {
    if k < 1 {
        return Err(Error::validation("k must be at least 1"));
    }
    let start = Instant::now();
    let mut heap: BinaryHeap<Worst> = BinaryHeap::with_capacity(k + 1);
    for doc in 0..scorer.index.len() {
        let hit = Hit {
            doc: doc as u32,
            score: scorer.score(doc, q)?,
        };
        if heap.len() < k {
            heap.push(Worst(hit));
        } else if hit.rank_cmp(&heap.peek().unwrap().0) == Ordering::Less {
            heap.pop();
            heap.push(Worst(hit));
        }
    }
    let elapsed = start.elapsed();
    let mut hits: Vec<Hit> = heap.into_iter().map(|w| w.0).collect();
    hits.sort_by(Hit::rank_cmp);
    Ok(TopK { hits, elapsed })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::build_index;
    use crate::model::{SparseDataset, SparseVector};

    fn ds() -> SparseDataset {
        let mut docs = Vec::new();
        for i in 0..10u32 {
            let c: Vec<u32> = (0..9).map(|j| j * 3 + i % 2).collect();
            let v = vec![if i == 7 { 2.0 } else { 1.0 }; 9];
            docs.push(SparseVector::new(c, v).unwrap());
        }
        SparseDataset::from_docs(100, docs).unwrap()
    }

    #[test]
    fn unique_max_first() {
        let q = SparseVector::new((0..30).collect(), vec![1.0; 30]).unwrap();
        let dq = DenseQuery::from_sparse(&q, 100).unwrap();
        for codec in Codec::ALL_DEFAULT {
            let idx = build_index(&ds(), codec, ValueFormat::F32, None).unwrap();
            let top = full_scan_topk(&idx, &dq, 1).unwrap();
            assert_eq!(top.hits[0].doc, 7, "{codec}");
            assert_eq!(top.hits[0].score, 18.0);
        }
    }

    #[test]
    fn k_at_least_n_sorts_everything() {
        let q = SparseVector::new(vec![0, 3], vec![1.0, 1.0]).unwrap();
        let dq = DenseQuery::from_sparse(&q, 100).unwrap();
        let idx = build_index(&ds(), Codec::DotVByte, ValueFormat::F32, None).unwrap();
        let top = full_scan_topk(&idx, &dq, 50).unwrap();
        assert_eq!(top.hits.len(), 10);
        let docs: Vec<u32> = top.hits.iter().map(|h| h.doc).collect();
        // even docs match both query terms, doc 7 is odd and matches none
        assert_eq!(docs, [0, 2, 4, 6, 8, 1, 3, 5, 7, 9]);
        assert!(full_scan_topk(&idx, &dq, 0).is_err());
    }

    #[test]
    fn raw_and_dotvbyte_scores_identical() {
        let q = SparseVector::new((0..30).step_by(2).collect(), vec![0.3; 15]).unwrap();
        let dq = DenseQuery::from_sparse(&q, 100).unwrap();
        let raw = build_index(&ds(), Codec::Raw, ValueFormat::F32, None).unwrap();
        let dvb = build_index(&ds(), Codec::DotVByte, ValueFormat::F32, None).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        Scorer::with_kernel(&raw, Kernel::Scalar).score_all(&dq, &mut a).unwrap();
        for kernel in Kernel::available() {
            Scorer::with_kernel(&raw, kernel).score_all(&dq, &mut b).unwrap();
            assert_eq!(a, b);
            Scorer::with_kernel(&dvb, kernel).score_all(&dq, &mut b).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn raw_kernels_agree_on_every_format() {
        let ds = crate::synth::generate(&crate::synth::Preset::SpladeLike.docs(50, 8)).unwrap();
        let qv = crate::synth::generate(&crate::synth::Preset::SpladeLike.queries(1, 8)).unwrap();
        let dq = DenseQuery::from_sparse(&qv[0], ds.dim()).unwrap();
        let fixed = ValueFormat::fixed_u8_for(ds.max_value()).unwrap();
        for fmt in [ValueFormat::F32, ValueFormat::F16, fixed] {
            let raw = build_index(&ds, Codec::Raw, fmt, None).unwrap();
            let dvb = build_index(&ds, Codec::DotVByte, fmt, None).unwrap();
            let (mut a, mut b) = (Vec::new(), Vec::new());
            Scorer::with_kernel(&raw, Kernel::Scalar).score_all(&dq, &mut a).unwrap();
            assert!(a.iter().any(|&x| x > 0.0));
            for kernel in Kernel::available() {
                Scorer::with_kernel(&raw, kernel).score_all(&dq, &mut b).unwrap();
                assert_eq!(a, b, "{fmt} {kernel:?}");
                Scorer::with_kernel(&dvb, kernel).score_all(&dq, &mut b).unwrap();
                assert_eq!(a, b, "{fmt} {kernel:?}");
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let idx = build_index(&ds(), Codec::Raw, ValueFormat::F32, None).unwrap();
        let dq = DenseQuery::zeros(50).unwrap();
        assert!(Scorer::new(&idx).score(0, &dq).is_err());
    }
}
