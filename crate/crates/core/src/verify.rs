//! Self-checks run against a concrete dataset: codec round trips, SIMD versus
//! scalar agreement, dot products against an f64 oracle, reordering
//! invariants, and ranking agreement across codecs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bytecodec::svb;
use crate::dotvbyte::{self, DocView, Kernel};
use crate::error::Result;
use crate::index::{build_index, full_scan_topk_with, Codec, CompressedForwardIndex, Hit, Scorer};
use crate::model::{SparseDataset, SparseVector, ValueFormat};
use crate::query::DenseQuery;
use crate::report::REPORT_SCHEMA_VERSION;
use crate::rgb::{apply_permutation, rgb_reorder_traced, BisectionConfig, Permutation};

/// Relative slack on top of the analytic quantization bound.
pub const DOT_REL_TOLERANCE: f64 = 1e-4;
/// Allowed relative gap between vectorized and scalar fused dot products.
pub const KERNEL_REL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, failures: Vec<String>, total: usize) {
        let passed = failures.is_empty();
        let detail = if passed {
            format!("{total} checked")
        } else {
            let shown: Vec<_> = failures.iter().take(3).cloned().collect();
            format!("{} of {total} failed: {}", failures.len(), shown.join("; "))
        };
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    pub fn table(&self) -> String {
        self.checks
            .iter()
            .map(|c| format!("{} {:<44} {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub codecs: Vec<Codec>,
    /// Random (document, query) pairs per codec and value format.
    pub oracle_pairs: usize,
    /// Queries for the cross-codec ranking check.
    pub topk_queries: usize,
    pub k: usize,
    pub rgb: bool,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        let mut codecs = Codec::ALL_DEFAULT.to_vec();
        codecs.extend([1, 3, 4].map(|k| Codec::Zeta { k }));
        VerifyOptions {
            codecs,
            oracle_pairs: 1000,
            topk_queries: 20,
            k: 10,
            rgb: true,
            seed: 0,
        }
    }
}

/// The value formats exercised for a dataset: F32, F16, and the most precise
/// fixed-point format that fits its largest value.
pub fn value_formats(ds: &SparseDataset) -> Vec<ValueFormat> {
    let mut v = vec![ValueFormat::F32, ValueFormat::F16];
    if let Ok(f) = ValueFormat::fixed_u8_for(ds.max_value()) {
        v.push(f);
    }
    v
}

/// Exact f64 inner product of a document (as stored in `fmt`) and a query,
/// plus the error the check allows: the worst-case quantization error of
/// every stored value, plus [`DOT_REL_TOLERANCE`] relative to the magnitude.
pub fn oracle_dot(doc: &SparseVector, q: &DenseQuery, fmt: ValueFormat) -> (f64, f64) {
    let qs = q.as_slice();
    let (mut exact, mut magnitude, mut quant) = (0.0f64, 0.0f64, 0.0f64);
    for (c, v) in doc.iter() {
        let qv = qs[c as usize] as f64;
        exact += v as f64 * qv;
        magnitude += (v as f64 * qv).abs();
        quant += fmt.max_abs_error(v) * qv.abs();
    }
    (exact, quant + DOT_REL_TOLERANCE * magnitude + f64::MIN_POSITIVE)
}

/// Whether two top-k lists agree once ties are adjudicated in f64: every
/// document present in only one list must score within `tol` of the k-th
/// best oracle score.
pub fn topk_agree(a: &[Hit], b: &[Hit], oracle: &[f64], k: usize, tol: f64) -> bool {
    let want = k.min(oracle.len());
    if a.len() != want || b.len() != want {
        return false;
    }
    if want == 0 {
        return true;
    }
    let mut sorted = oracle.to_vec();
    sorted.sort_by(|x, y| y.total_cmp(x));
    let kth = sorted[want - 1];
    let in_list = |list: &[Hit], d: u32| list.iter().any(|h| h.doc == d);
    a.iter()
        .filter(|h| !in_list(b, h.doc))
        .chain(b.iter().filter(|h| !in_list(a, h.doc)))
        .all(|h| (oracle[h.doc as usize] - kth).abs() <= tol)
}

/// Runs every check on `ds`.
pub fn verify_dataset(ds: &SparseDataset, opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport {
        schema_version: REPORT_SCHEMA_VERSION,
        checks: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let queries = sample_queries(ds, opts.oracle_pairs.max(opts.topk_queries), &mut rng)?;

    for &codec in &opts.codecs {
        let idx = build_index(ds, codec, ValueFormat::F32, None)?;
        report.push(format!("round-trip {codec}"), round_trip_failures(ds, &idx), ds.len());
    }
    if opts.codecs.contains(&Codec::StreamVByte) {
        let idx = build_index(ds, Codec::StreamVByte, ValueFormat::F32, None)?;
        report.push("svb vector=scalar decode", svb_decode_failures(&idx), ds.len());
    }
    if opts.codecs.contains(&Codec::DotVByte) {
        for fmt in value_formats(ds) {
            let idx = build_index(ds, Codec::DotVByte, fmt, None)?;
            report.push(
                format!("dotvbyte vector=scalar {fmt}"),
                dotvbyte_kernel_failures(&idx, &queries, &mut rng)?,
                ds.len(),
            );
        }
    }
    if !ds.is_empty() {
        for &codec in &opts.codecs {
            for fmt in value_formats(ds) {
                let idx = build_index(ds, codec, fmt, None)?;
                let failures = oracle_failures(ds, &idx, &queries, opts.oracle_pairs, &mut rng)?;
                report.push(format!("oracle dot {codec} {fmt}"), failures, opts.oracle_pairs);
            }
        }
        let failures = topk_failures(ds, &queries[..opts.topk_queries.min(queries.len())], opts)?;
        report.push(format!("top-{} agreement", opts.k), failures, opts.topk_queries);
    }
    if opts.rgb && !ds.is_empty() {
        let (perm, trace) = rgb_reorder_traced(ds, &BisectionConfig::default())?;
        let mut failures = Vec::new();
        for (i, l) in trace.levels.iter().enumerate() {
            if l.costs.windows(2).any(|w| w[1] > w[0]) {
                failures.push(format!("level {i} (depth {}) cost rose", l.depth));
            }
        }
        report.push("rgb cost monotone", failures, trace.levels.len());

        let mut failures = Vec::new();
        let permuted = apply_permutation(ds, &perm)?;
        if apply_permutation(&permuted, &perm.inverse())? != *ds {
            failures.push("inverse does not restore the dataset".to_string());
        }
        let idx = build_index(ds, Codec::DotVByte, ValueFormat::F32, Some(&perm))?;
        if idx.to_dataset()? != permuted {
            failures.push("reordered index does not decode to the permuted dataset".to_string());
        }
        report.push("rgb permutation", failures, 2);
    }
    Ok(report)
}

/// Checks that `idx` stores `ds`, remapped by `perm` when given: identical
/// components and values within the format's quantization error.
pub fn check_index_matches(ds: &SparseDataset, idx: &CompressedForwardIndex, perm: Option<&Permutation>) -> Result<Check> {
    let expected = match perm {
        Some(p) => apply_permutation(ds, p)?,
        None => ds.clone(),
    };
    let mut failures = Vec::new();
    if idx.len() != expected.len() || idx.dim() != expected.dim() {
        failures.push(format!(
            "index holds {} documents of dimension {}, dataset {} of dimension {}",
            idx.len(),
            idx.dim(),
            expected.len(),
            expected.dim()
        ));
    } else {
        let fmt = idx.value_format();
        for (i, want) in expected.docs().iter().enumerate() {
            let got = idx.doc(i)?;
            if got.components() != want.components() {
                failures.push(format!("doc {i}: components differ"));
            } else if got
                .values()
                .iter()
                .zip(want.values())
                .any(|(g, w)| (*g as f64 - *w as f64).abs() > fmt.max_abs_error(*w))
            {
                failures.push(format!("doc {i}: values outside {fmt} error"));
            }
        }
    }
    let mut report = VerifyReport::default();
    report.push("index matches dataset", failures, expected.len());
    Ok(report.checks.pop().unwrap())
}

fn sample_queries(ds: &SparseDataset, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<DenseQuery>> {
    if ds.is_empty() {
        return Ok(Vec::new());
    }
    // a query is a document's support with fresh random weights
    (0..n)
        .map(|_| {
            let src = &ds[rng.random_range(0..ds.len())];
            let vals = (0..src.nnz()).map(|_| rng.random_range(0.0..2.0f32)).collect();
            DenseQuery::from_sparse(&SparseVector::new(src.components().to_vec(), vals)?, ds.dim())
        })
        .collect()
}

fn round_trip_failures(ds: &SparseDataset, idx: &CompressedForwardIndex) -> Vec<String> {
    let mut failures = Vec::new();
    for (i, doc) in ds.docs().iter().enumerate() {
        match idx.doc_components(i) {
            Ok(c) if c == doc.components() => {}
            Ok(_) => failures.push(format!("doc {i} decodes to different components")),
            Err(e) => failures.push(format!("doc {i}: {e}")),
        }
    }
    let bytes = idx.to_bytes();
    match CompressedForwardIndex::from_bytes(&bytes) {
        Ok(back) if back.to_bytes() == bytes => {}
        Ok(_) => failures.push("index file does not round-trip byte-identically".to_string()),
        Err(e) => failures.push(format!("index file: {e}")),
    }
    failures
}

fn svb_decode_failures(idx: &CompressedForwardIndex) -> Vec<String> {
    let mut failures = Vec::new();
    let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..idx.len() {
        let Ok((controls, data)) = svb::split_doc(idx.doc_payload(i), idx.nnz(i)) else {
            failures.push(format!("doc {i}: malformed block"));
            continue;
        };
        svb::decode_scalar(controls, data, idx.nnz(i), &mut a);
        svb::decode_vectorized(controls, data, idx.nnz(i), &mut b);
        svb::decode_table(controls, data, idx.nnz(i), &mut c);
        if a != b || a != c {
            failures.push(format!("doc {i}"));
        }
    }
    failures
}

fn dotvbyte_kernel_failures(
    idx: &CompressedForwardIndex,
    queries: &[DenseQuery],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<String>> {
    let mut failures = Vec::new();
    let (mut reference, mut other) = (Vec::new(), Vec::new());
    for i in 0..idx.len() {
        let view = DocView::parse(idx.doc_payload(i), idx.nnz(i))?;
        dotvbyte::decode_with(Kernel::Scalar, &view, idx.dim(), &mut reference)?;
        let q = &queries[rng.random_range(0..queries.len())];
        let base = dotvbyte::dot_with(Kernel::Scalar, &view, idx.doc_values(i), idx.value_format(), q)? as f64;
        for kernel in Kernel::available() {
            dotvbyte::decode_with(kernel, &view, idx.dim(), &mut other)?;
            if other != reference {
                failures.push(format!("doc {i}: {} decode differs", kernel.name()));
            }
            let got = dotvbyte::dot_with(kernel, &view, idx.doc_values(i), idx.value_format(), q)? as f64;
            if (got - base).abs() > KERNEL_REL_TOLERANCE * base.abs() {
                failures.push(format!("doc {i}: {} dot {got} vs scalar {base}", kernel.name()));
            }
        }
    }
    Ok(failures)
}

fn oracle_failures(
    ds: &SparseDataset,
    idx: &CompressedForwardIndex,
    queries: &[DenseQuery],
    pairs: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<String>> {
    let mut scorer = Scorer::new(idx);
    let mut failures = Vec::new();
    for _ in 0..pairs {
        let d = rng.random_range(0..ds.len());
        let q = &queries[rng.random_range(0..queries.len())];
        let got = scorer.score(d, q)? as f64;
        let (exact, tol) = oracle_dot(&ds[d], q, idx.value_format());
        if (got - exact).abs() > tol {
            failures.push(format!("doc {d}: {got} vs {exact} (tolerance {tol:.3e})"));
        }
    }
    Ok(failures)
}

fn topk_failures(ds: &SparseDataset, queries: &[DenseQuery], opts: &VerifyOptions) -> Result<Vec<String>> {
    let codecs = [Codec::Raw, Codec::StreamVByte, Codec::DotVByte];
    let indexes = codecs
        .iter()
        .map(|&c| build_index(ds, c, ValueFormat::F32, None))
        .collect::<Result<Vec<_>>>()?;
    let mut failures = Vec::new();
    for (qi, q) in queries.iter().enumerate() {
        let oracle: Vec<f64> = ds.docs().iter().map(|d| oracle_dot(d, q, ValueFormat::F32).0).collect();
        let lists = indexes
            .iter()
            .map(|idx| full_scan_topk_with(&mut Scorer::new(idx), q, opts.k).map(|t| t.hits))
            .collect::<Result<Vec<_>>>()?;
        let kth = {
            let mut s = oracle.clone();
            s.sort_by(|a, b| b.total_cmp(a));
            s[opts.k.min(s.len()) - 1]
        };
        let tol = DOT_REL_TOLERANCE * kth.abs().max(1e-6);
        for (c, list) in codecs.iter().zip(&lists).skip(1) {
            if !topk_agree(&lists[0], list, &oracle, opts.k, tol) {
                failures.push(format!("query {qi}: {c} disagrees with raw"));
            }
        }
    }
    Ok(failures)
}
