use crate::error::{Error, Result};
use crate::model::{SparseVector, ValueFormat, MAX_DIM};

/// A query expanded to a dense array so kernels can gather by component ID.
///
/// Storage always spans the full 16-bit ID space with zeros past `dim`, so a
/// gather with any `u16` index stays in bounds even on corrupt input.
#[derive(Clone)]
pub struct DenseQuery {
    dim: u32,
    buffer: Box<[f32; MAX_DIM as usize]>,
}

impl std::fmt::Debug for DenseQuery {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DenseQuery")
            .field("dim", &self.dim)
            .field("nnz", &self.as_slice().iter().filter(|v| **v != 0.0).count())
            .finish()
    }
}

impl DenseQuery {
    pub fn zeros(dim: u32) -> Result<Self> {
        if dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        let buffer: Box<[f32; MAX_DIM as usize]> = vec![0.0f32; MAX_DIM as usize]
            .into_boxed_slice()
            .try_into()
            .unwrap();
        Ok(DenseQuery { dim, buffer })
    }

    pub fn from_sparse(q: &SparseVector, dim: u32) -> Result<Self> {
        q.check_dim(dim)?;
        let mut dense = Self::zeros(dim)?;
        for (c, v) in q.iter() {
            dense.buffer[c as usize] = v;
        }
        Ok(dense)
    }

    /// Resets to zero and loads `q`, reusing the allocation.
    pub fn reload(&mut self, q: &SparseVector) -> Result<()> {
        q.check_dim(self.dim)?;
        self.buffer.fill(0.0);
        for (c, v) in q.iter() {
            self.buffer[c as usize] = v;
        }
        Ok(())
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.buffer[..self.dim as usize]
    }

    #[inline(always)]
    pub(crate) fn padded(&self) -> &[f32; MAX_DIM as usize] {
        &self.buffer
    }

    #[inline(always)]
    pub fn get(&self, component: u16) -> f32 {
        self.buffer[component as usize]
    }
}

/// Left-to-right f32 accumulation of `value[j] * q[component[j]]`. Callers
/// must have checked every component against the dimension.
#[inline]
pub(crate) fn dot_sequential(
    components: &[u32],
    values: &[u8],
    fmt: ValueFormat,
    q: &DenseQuery,
) -> f32 {
    let q = q.padded();
    let mut acc = 0.0f32;
    match fmt {
        ValueFormat::F32 => {
            for (&c, v) in components.iter().zip(values.chunks_exact(4)) {
                let v = f32::from_le_bytes(v.try_into().unwrap());
                acc += v * q[c as u16 as usize];
            }
        }
        ValueFormat::F16 => {
            for (&c, v) in components.iter().zip(values.chunks_exact(2)) {
                let v = half::f16::from_le_bytes([v[0], v[1]]).to_f32();
                acc += v * q[c as u16 as usize];
            }
        }
        ValueFormat::FixedU8 { .. } => {
            let scale = fmt.fixed_scale();
            for (&c, &v) in components.iter().zip(values) {
                acc += v as f32 * scale * q[c as u16 as usize];
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_layout() {
        let q = SparseVector::new(vec![2, 5], vec![3.0, 0.5]).unwrap();
        let d = DenseQuery::from_sparse(&q, 10).unwrap();
        assert_eq!(d.as_slice().len(), 10);
        assert_eq!(d.as_slice()[2], 3.0);
        assert_eq!(d.as_slice().iter().filter(|v| **v != 0.0).count(), 2);
        assert!(DenseQuery::from_sparse(&q, 5).is_err());
        assert!(DenseQuery::zeros(MAX_DIM + 1).is_err());
    }

    #[test]
    fn sequential_two_terms() {
        let q = SparseVector::new(vec![2, 5], vec![3.0, 0.5]).unwrap();
        let d = DenseQuery::from_sparse(&q, 10).unwrap();
        let mut vals = Vec::new();
        ValueFormat::F32.encode_into(&[1.0, 2.0], &mut vals).unwrap();
        assert_eq!(dot_sequential(&[2, 5], &vals, ValueFormat::F32, &d), 4.0);
    }
}
