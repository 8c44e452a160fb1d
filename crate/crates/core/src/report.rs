//! Size and scan-time reports, top-k run files, and their JSON forms.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bytecodec::svb::StreamLayout;
use crate::dotvbyte::Kernel;
use crate::error::{Error, Result};
use crate::index::{full_scan_topk_with, Codec, CompressedForwardIndex, Hit, Scorer};
use crate::model::{to_gaps, SparseDataset};
use crate::query::DenseQuery;
use crate::rgb::Permutation;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub schema_version: u32,
    pub codec: String,
    pub zeta_k: Option<u8>,
    pub value_format: String,
    pub reordered: bool,
    pub docs: usize,
    pub total_nnz: u64,
    pub bits_per_component: f64,
    pub control_bits: u64,
    pub data_bits: u64,
    pub tail_bits: u64,
    pub values_bytes: u64,
    pub total_index_bytes: u64,
    /// StreamVByte only: bits per component when control bytes are shared
    /// across document boundaries instead of aligned per document.
    pub stream_bits_per_component: Option<f64>,
}

impl SizeReport {
    pub fn of(index: &CompressedForwardIndex, reordered: bool) -> Result<Self> {
        let bits = index.component_bits()?;
        let total_nnz = index.total_nnz();
        let stream_bits_per_component = match index.codec() {
            Codec::StreamVByte if total_nnz > 0 => {
                let gaps = (0..index.len())
                    .map(|i| to_gaps(&index.doc_components(i)?))
                    .collect::<Result<Vec<_>>>()?;
                let layout = StreamLayout::encode(&gaps);
                Some(8.0 * layout.total_bytes() as f64 / total_nnz as f64)
            }
            _ => None,
        };
        Ok(SizeReport {
            schema_version: REPORT_SCHEMA_VERSION,
            codec: index.codec().name().to_string(),
            zeta_k: match index.codec() {
                Codec::Zeta { k } => Some(k),
                _ => None,
            },
            value_format: index.value_format().to_string(),
            reordered,
            docs: index.len(),
            total_nnz,
            bits_per_component: index.bits_per_component(),
            control_bits: bits.control_bits,
            data_bits: bits.data_bits,
            tail_bits: bits.tail_bits,
            values_bytes: index.value_bytes() as u64,
            total_index_bytes: index.to_bytes().len() as u64,
            stream_bits_per_component,
        })
    }
}

pub fn size_table(reports: &[SizeReport]) -> String {
    let mut out = format!(
        "{:<14} {:>5} {:>8} {:>12} {:>10} {:>10} {:>10} {:>12} {:>12}\n",
        "codec", "rgb", "bits/c", "total nnz", "ctrl bits", "data bits", "tail bits", "value bytes", "index bytes"
    );
    for r in reports {
        let codec = match r.zeta_k {
            Some(k) => format!("zeta(k={k})"),
            None => r.codec.clone(),
        };
        let _ = writeln!(
            out,
            "{:<14} {:>5} {:>8.3} {:>12} {:>10} {:>10} {:>10} {:>12} {:>12}",
            codec,
            if r.reordered { "yes" } else { "no" },
            r.bits_per_component,
            r.total_nnz,
            r.control_bits,
            r.data_bits,
            r.tail_bits,
            r.values_bytes,
            r.total_index_bytes
        );
        if let Some(s) = r.stream_bits_per_component {
            let _ = writeln!(out, "{:<14} {:>5} {:>8.3}   (shared control stream)", "", "", s);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    pub k: usize,
    pub runs: usize,
    pub warmup: usize,
    pub kernel: Kernel,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            k: 10,
            runs: 3,
            warmup: 1,
            kernel: Kernel::detect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema_version: u32,
    pub codec: String,
    pub zeta_k: Option<u8>,
    pub value_format: String,
    pub kernel: String,
    pub docs: usize,
    pub queries: usize,
    pub k: usize,
    pub runs: usize,
    pub warmup: usize,
    pub parallel: bool,
    /// Per-query scan time, averaged over the measured runs.
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
    /// Scan time of all queries, averaged over runs, and the max−min
    /// range across runs.
    pub total_ms: f64,
    pub total_spread_ms: f64,
    /// Time spent remapping and densifying queries, per run.
    pub densify_ms: f64,
    pub topk_checksum: String,
}

/// Runs every query through a full scan `warmup + runs` times and reports
/// the measured runs. Returns the top-k lists of the last run.
pub fn measure_scan(
    index: &CompressedForwardIndex,
    queries: &SparseDataset,
    perm: Option<&Permutation>,
    opts: &ScanOptions,
) -> Result<(ScanReport, Vec<Vec<Hit>>)> {
    if opts.runs == 0 {
        return Err(Error::validation("at least one measured run is required"));
    }
    if queries.is_empty() {
        return Err(Error::validation("no queries"));
    }
    if queries.dim() != index.dim() {
        return Err(Error::validation(format!(
            "queries have dimension {}, index has {}",
            queries.dim(),
            index.dim()
        )));
    }
    let mut scorer = Scorer::with_kernel(index, opts.kernel);
    let mut dense = DenseQuery::zeros(index.dim())?;
    let nq = queries.len();
    let mut per_query = vec![Duration::ZERO; nq];
    let mut run_totals = Vec::with_capacity(opts.runs);
    let mut densify = Duration::ZERO;
    let mut last = Vec::with_capacity(nq);
    for run in 0..opts.warmup + opts.runs {
        let measured = run >= opts.warmup;
        let mut total = Duration::ZERO;
        last.clear();
        for (qi, q) in queries.docs().iter().enumerate() {
            let t = Instant::now();
            match perm {
                Some(p) => dense.reload(&p.apply_vector(q)?)?,
                None => dense.reload(q)?,
            }
            let dt = t.elapsed();
            let top = full_scan_topk_with(&mut scorer, &dense, opts.k)?;
            if measured {
                densify += dt;
                per_query[qi] += top.elapsed;
                total += top.elapsed;
            }
            last.push(top.hits);
        }
        if measured {
            run_totals.push(ms(total));
        }
    }
    let runs = opts.runs as f64;
    let mut times: Vec<f64> = per_query.iter().map(|d| ms(*d) / runs).collect();
    times.sort_by(f64::total_cmp);
    let report = ScanReport {
        schema_version: REPORT_SCHEMA_VERSION,
        codec: index.codec().name().to_string(),
        zeta_k: match index.codec() {
            Codec::Zeta { k } => Some(k),
            _ => None,
        },
        value_format: index.value_format().to_string(),
        kernel: scorer.kernel().name().to_string(),
        docs: index.len(),
        queries: nq,
        k: opts.k,
        runs: opts.runs,
        warmup: opts.warmup,
        parallel: false,
        mean_ms: times.iter().sum::<f64>() / nq as f64,
        median_ms: percentile(&times, 0.5),
        p95_ms: percentile(&times, 0.95),
        total_ms: run_totals.iter().sum::<f64>() / runs,
        total_spread_ms: run_totals.iter().copied().fold(f64::MIN, f64::max)
            - run_totals.iter().copied().fold(f64::MAX, f64::min),
        densify_ms: ms(densify) / runs,
        topk_checksum: topk_checksum(&last),
    };
    Ok((report, last))
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// CRC-32 of every query's ranked document IDs, as hex.
pub fn topk_checksum(lists: &[Vec<Hit>]) -> String {
    let mut h = crc32fast::Hasher::new();
    for (q, hits) in lists.iter().enumerate() {
        h.update(&(q as u32).to_le_bytes());
        h.update(&(hits.len() as u32).to_le_bytes());
        for hit in hits {
            h.update(&hit.doc.to_le_bytes());
        }
    }
    format!("{:08x}", h.finalize())
}

pub fn scan_table(reports: &[ScanReport]) -> String {
    let mut out = format!(
        "{:<14} {:<7} {:>8} {:>10} {:>10} {:>10} {:>12} {:>10}\n",
        "codec", "kernel", "queries", "mean ms", "median ms", "p95 ms", "total ms", "checksum"
    );
    for r in reports {
        let codec = match r.zeta_k {
            Some(k) => format!("zeta(k={k})"),
            None => r.codec.clone(),
        };
        let _ = writeln!(
            out,
            "{:<14} {:<7} {:>8} {:>10.3} {:>10.3} {:>10.3} {:>12.2} {:>10}",
            codec, r.kernel, r.queries, r.mean_ms, r.median_ms, r.p95_ms, r.total_ms, r.topk_checksum
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub query: u32,
    pub doc: u32,
    pub rank: u32,
    pub score: f32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFile {
    pub schema_version: u32,
    pub codec: String,
    pub k: usize,
    pub results: Vec<RunEntry>,
}

impl RunFile {
    pub fn new(codec: Codec, k: usize, lists: &[Vec<Hit>]) -> Self {
        let results = lists
            .iter()
            .enumerate()
            .flat_map(|(q, hits)| {
                hits.iter().enumerate().map(move |(rank, h)| RunEntry {
                    query: q as u32,
                    doc: h.doc,
                    rank: rank as u32 + 1,
                    score: h.score,
                })
            })
            .collect();
        RunFile {
            schema_version: REPORT_SCHEMA_VERSION,
            codec: codec.name().to_string(),
            k,
            results,
        }
    }

    /// Ranked hits per query, for queries `0..queries`.
    pub fn lists(&self, queries: usize) -> Vec<Vec<Hit>> {
        let mut out = vec![Vec::new(); queries];
        for e in &self.results {
            if let Some(list) = out.get_mut(e.query as usize) {
                list.push(Hit {
                    doc: e.doc,
                    score: e.score,
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::build_index;
    use crate::model::{SparseVector, ValueFormat};

    fn ds() -> SparseDataset {
        let docs = (0..64u32)
            .map(|i| {
                let c: Vec<u32> = (0..9 + i % 5).map(|j| j * 3 + i % 3).collect();
                let v = c.iter().map(|&x| 1.0 + (x * i % 7) as f32).collect();
                SparseVector::new(c, v).unwrap()
            })
            .collect();
        SparseDataset::from_docs(100, docs).unwrap()
    }

    #[test]
    fn size_report_items_add_up() {
        for codec in Codec::ALL_DEFAULT {
            let idx = build_index(&ds(), codec, ValueFormat::F16, None).unwrap();
            let r = SizeReport::of(&idx, false).unwrap();
            let total = r.control_bits + r.data_bits + r.tail_bits;
            assert_eq!(total as f64 / r.total_nnz as f64, r.bits_per_component);
            assert_eq!(r.total_index_bytes, idx.to_bytes().len() as u64);
            assert_eq!(r.stream_bits_per_component.is_some(), codec == Codec::StreamVByte);
        }
        let raw = SizeReport::of(&build_index(&ds(), Codec::Raw, ValueFormat::F32, None).unwrap(), false).unwrap();
        assert_eq!(raw.bits_per_component, 16.0);
        let json = serde_json::to_string(&raw).unwrap();
        assert!(json.contains("\"schema_version\":1"));
        assert!(size_table(&[raw]).contains("16.000"));
    }

    #[test]
    fn scan_report_checksums_agree_across_codecs() {
        let data = ds();
        let queries = SparseDataset::from_docs(100, data.docs()[..5].to_vec()).unwrap();
        let opts = ScanOptions {
            k: 3,
            runs: 2,
            warmup: 1,
            ..Default::default()
        };
        let mut sums = Vec::new();
        for codec in [Codec::Raw, Codec::StreamVByte, Codec::DotVByte] {
            let idx = build_index(&data, codec, ValueFormat::F32, None).unwrap();
            let (r, lists) = measure_scan(&idx, &queries, None, &opts).unwrap();
            assert_eq!(r.queries, 5);
            assert!(r.p95_ms >= r.median_ms);
            assert_eq!(lists.len(), 5);
            let run = RunFile::new(codec, 3, &lists);
            assert_eq!(run.results.len(), 15);
            assert_eq!(run.lists(5), lists);
            sums.push(r.topk_checksum);
        }
        assert!(sums.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn percentile_nearest_rank() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.5), 10.0);
        assert_eq!(percentile(&v, 0.95), 19.0);
        assert_eq!(percentile(&[3.0], 0.95), 3.0);
    }
}
