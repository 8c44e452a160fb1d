//! Sparse vectors, datasets, and the uncompressed forward index.

mod forward;
mod gaps;
pub mod io;
mod values;

pub use forward::{build_uncompressed, ForwardIndex};
pub use gaps::{from_gaps, to_gaps, GapStream};
pub use values::{dequantize, quantize, ValueFormat};

use crate::error::{Error, Result};

/// Largest supported dimension: every component must fit in 16 bits.
pub const MAX_DIM: u32 = 1 << 16;

/// The nonzero coordinates of one vector, components in ascending order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    components: Vec<u32>,
    values: Vec<f32>,
}

impl SparseVector {
    /// Builds a vector from already-sorted parts, checking every invariant
    /// except the dimension bound (see [`SparseVector::check_dim`]).
    pub fn new(components: Vec<u32>, values: Vec<f32>) -> Result<Self> {
        if components.len() != values.len() {
            return Err(Error::validation(format!(
                "{} components but {} values",
                components.len(),
                values.len()
            )));
        }
        check_ascending(&components)?;
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::validation(format!(
                "value {v} at position {i} is negative or not finite"
            )));
        }
        Ok(SparseVector { components, values })
    }

    /// Builds a vector from unordered `(component, value)` pairs.
    pub fn from_pairs(mut pairs: Vec<(u32, f32)>) -> Result<Self> {
        pairs.sort_by_key(|p| p.0);
        let (components, values) = pairs.into_iter().unzip();
        Self::new(components, values)
    }

    pub fn components(&self) -> &[u32] {
        &self.components
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f32)> + '_ {
        self.components
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    pub fn max_value(&self) -> f32 {
        self.values.iter().copied().fold(0.0, f32::max)
    }

    pub fn check_dim(&self, dim: u32) -> Result<()> {
        match self.components.last() {
            Some(&c) if c >= dim => Err(Error::ComponentOutOfRange { component: c, dim }),
            _ => Ok(()),
        }
    }

    /// Exact inner product in f64, used as the reference everything else is
    /// checked against.
    pub fn dot_f64(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0f64;
        while i < self.nnz() && j < other.nnz() {
            match self.components[i].cmp(&other.components[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] as f64 * other.values[j] as f64;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

pub(crate) fn check_ascending(components: &[u32]) -> Result<()> {
    for (i, w) in components.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::NotAscending {
                index: i,
                prev: w[0],
                next: w[1],
            });
        }
    }
    Ok(())
}

/// An ordered collection of sparse vectors over a fixed dimension.
/// A document's identifier is its position.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset {
    dim: u32,
    docs: Vec<SparseVector>,
}

impl SparseDataset {
    pub fn new(dim: u32) -> Self {
        SparseDataset {
            dim,
            docs: Vec::new(),
        }
    }

    pub fn from_docs(dim: u32, docs: Vec<SparseVector>) -> Result<Self> {
        for d in &docs {
            d.check_dim(dim)?;
        }
        Ok(SparseDataset { dim, docs })
    }

    pub fn push(&mut self, doc: SparseVector) -> Result<()> {
        doc.check_dim(self.dim)?;
        self.docs.push(doc);
        Ok(())
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn docs(&self) -> &[SparseVector] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn total_nnz(&self) -> usize {
        self.docs.iter().map(SparseVector::nnz).sum()
    }

    pub fn max_value(&self) -> f32 {
        self.docs.iter().map(SparseVector::max_value).fold(0.0, f32::max)
    }

    pub fn into_docs(self) -> Vec<SparseVector> {
        self.docs
    }
}

impl std::ops::Index<usize> for SparseDataset {
    type Output = SparseVector;

    fn index(&self, i: usize) -> &SparseVector {
        &self.docs[i]
    }
}
