use super::{SparseDataset, SparseVector, ValueFormat, MAX_DIM};
use crate::error::{Error, Result};

/// The uncompressed baseline: 16-bit components, values in a [`ValueFormat`],
/// and an offsets directory with `n + 1` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardIndex {
    dim: u32,
    components: Vec<u16>,
    values: Vec<u8>,
    value_format: ValueFormat,
    offsets: Vec<usize>,
}

pub fn build_uncompressed(ds: &SparseDataset, fmt: ValueFormat) -> Result<ForwardIndex> {
    if ds.dim() > MAX_DIM {
        return Err(Error::UnsupportedDimension(ds.dim()));
    }
    fmt.check_feasible(ds.max_value())?;
    let total = ds.total_nnz();
    let mut components = Vec::with_capacity(total);
    let mut values = Vec::with_capacity(total * fmt.bytes_per_value());
    let mut offsets = Vec::with_capacity(ds.len() + 1);
    offsets.push(0);
    for doc in ds.docs() {
        components.extend(doc.components().iter().map(|&c| c as u16));
        fmt.encode_into(doc.values(), &mut values)?;
        offsets.push(components.len());
    }
    Ok(ForwardIndex {
        dim: ds.dim(),
        components,
        values,
        value_format: fmt,
        offsets,
    })
}

impl ForwardIndex {
    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn components(&self) -> &[u16] {
        &self.components
    }

    pub fn value_format(&self) -> ValueFormat {
        self.value_format
    }

    pub fn doc_components(&self, i: usize) -> &[u16] {
        &self.components[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn doc_values(&self, i: usize) -> &[u8] {
        let w = self.value_format.bytes_per_value();
        &self.values[self.offsets[i] * w..self.offsets[i + 1] * w]
    }

    pub fn doc(&self, i: usize) -> SparseVector {
        let components = self.doc_components(i).iter().map(|&c| c as u32).collect();
        let values = self.value_format.decode_all(self.doc_values(i));
        SparseVector { components, values }
    }

    pub fn component_bits(&self) -> u64 {
        16 * self.components.len() as u64
    }

    /// 16.0 for any non-empty index.
    pub fn bits_per_component(&self) -> f64 {
        if self.components.is_empty() {
            return 0.0;
        }
        self.component_bits() as f64 / self.components.len() as f64
    }
}
