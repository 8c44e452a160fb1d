//! Shared fixtures for the benchmarks.

use sparsefwd_core::{generate, DenseQuery, Preset, SparseDataset};

pub const SEED: u64 = 42;

/// A splade-like dataset and densified queries for it.
pub fn splade_fixture(docs: usize, queries: usize) -> (SparseDataset, Vec<DenseQuery>) {
    let ds = generate(&Preset::SpladeLike.docs(docs, SEED)).expect("valid preset");
    let qs = generate(&Preset::SpladeLike.queries(queries, SEED)).expect("valid preset");
    let dense = qs
        .docs()
        .iter()
        .map(|q| DenseQuery::from_sparse(q, qs.dim()).expect("query within dimension"))
        .collect();
    (ds, dense)
}
