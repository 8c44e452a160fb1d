use crate::model::SparseDataset;

/// Documents (query vertices) over the component IDs they touch (data
/// vertices). Data vertices are the distinct observed IDs, renumbered densely
/// in ascending order of their original ID.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BipartiteGraph {
    num_data: usize,
    /// Query vertex `q` touches `query_adj[query_offsets[q]..query_offsets[q + 1]]`.
    query_offsets: Vec<usize>,
    query_adj: Vec<u32>,
    /// The transpose: data vertex `v` is touched by these documents.
    data_offsets: Vec<usize>,
    data_adj: Vec<u32>,
    /// Data vertex → original component ID.
    original: Vec<u32>,
}

/// Builds the document/component graph of `ds`.
pub fn build_graph(ds: &SparseDataset) -> BipartiteGraph {
    let dim = ds.dim() as usize;
    let mut dense = vec![u32::MAX; dim];
    for doc in ds.docs() {
        for &c in doc.components() {
            dense[c as usize] = 0;
        }
    }
    let mut original = Vec::new();
    for (c, slot) in dense.iter_mut().enumerate() {
        if *slot == 0 {
            *slot = original.len() as u32;
            original.push(c as u32);
        }
    }
    let num_data = original.len();

    let mut query_offsets = Vec::with_capacity(ds.len() + 1);
    let mut query_adj = Vec::with_capacity(ds.total_nnz());
    let mut degree = vec![0usize; num_data];
    query_offsets.push(0);
    for doc in ds.docs() {
        // components are strictly ascending, so adjacency is already deduplicated
        for &c in doc.components() {
            let v = dense[c as usize];
            query_adj.push(v);
            degree[v as usize] += 1;
        }
        query_offsets.push(query_adj.len());
    }

    let mut data_offsets = Vec::with_capacity(num_data + 1);
    data_offsets.push(0);
    for d in &degree {
        data_offsets.push(data_offsets.last().unwrap() + d);
    }
    let mut fill = data_offsets[..num_data].to_vec();
    let mut data_adj = vec![0u32; query_adj.len()];
    for q in 0..ds.len() {
        for &v in &query_adj[query_offsets[q]..query_offsets[q + 1]] {
            data_adj[fill[v as usize]] = q as u32;
            fill[v as usize] += 1;
        }
    }

    BipartiteGraph {
        num_data,
        query_offsets,
        query_adj,
        data_offsets,
        data_adj,
        original,
    }
}

impl BipartiteGraph {
    pub fn num_data(&self) -> usize {
        self.num_data
    }

    pub fn num_queries(&self) -> usize {
        self.query_offsets.len().saturating_sub(1)
    }

    pub fn num_edges(&self) -> usize {
        self.query_adj.len()
    }

    /// Data vertices touched by document `q`.
    pub fn neighbors(&self, q: usize) -> &[u32] {
        &self.query_adj[self.query_offsets[q]..self.query_offsets[q + 1]]
    }

    /// Documents touching data vertex `v`.
    pub fn documents(&self, v: usize) -> &[u32] {
        &self.data_adj[self.data_offsets[v]..self.data_offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.data_offsets[v + 1] - self.data_offsets[v]
    }

    /// Original component ID of data vertex `v`.
    pub fn original_id(&self, v: usize) -> u32 {
        self.original[v]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SparseVector;

    fn vec(c: &[u32]) -> SparseVector {
        SparseVector::new(c.to_vec(), vec![1.0; c.len()]).unwrap()
    }

    #[test]
    fn two_docs_share_a_component() {
        let ds = SparseDataset::from_docs(10, vec![vec(&[1, 5]), vec(&[5, 9])]).unwrap();
        let g = build_graph(&ds);
        assert_eq!(g.num_data(), 3);
        assert_eq!(g.num_queries(), 2);
        assert_eq!(g.original_id(1), 5);
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.documents(1), &[0, 1]);
        assert_eq!(g.neighbors(1), &[1, 2]);
        assert_eq!(g.num_edges(), ds.total_nnz());
    }

    #[test]
    fn empty_dataset() {
        let g = build_graph(&SparseDataset::new(100));
        assert_eq!(g.num_data(), 0);
        assert_eq!(g.num_queries(), 0);
        assert_eq!(g.num_edges(), 0);
    }
}
