use std::path::Path;

use crate::error::{Error, Result};
use crate::format::{self, Cursor};
use crate::model::{SparseDataset, SparseVector};

pub const PERMUTATION_MAGIC: [u8; 4] = *b"PRM1";

/// A bijection on component IDs `[0, d)`, stored as old ID → new ID.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<u32>,
}

impl Permutation {
    pub fn identity(dim: u32) -> Self {
        Permutation {
            forward: (0..dim).collect(),
        }
    }

    pub fn new(forward: Vec<u32>) -> Result<Self> {
        let n = forward.len();
        let mut seen = vec![false; n];
        for (old, &new) in forward.iter().enumerate() {
            if new as usize >= n {
                return Err(Error::NotBijective(format!(
                    "{old} maps to {new}, outside [0, {n})"
                )));
            }
            if std::mem::replace(&mut seen[new as usize], true) {
                return Err(Error::NotBijective(format!("{new} is the image of two IDs")));
            }
        }
        Ok(Permutation { forward })
    }

    pub fn dim(&self) -> u32 {
        self.forward.len() as u32
    }

    pub fn forward(&self) -> &[u32] {
        &self.forward
    }

    #[inline]
    pub fn map(&self, old: u32) -> u32 {
        self.forward[old as usize]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.forward.len()];
        for (old, &new) in self.forward.iter().enumerate() {
            inv[new as usize] = old as u32;
        }
        Permutation { forward: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// Remaps a vector's components and re-sorts its pairs by new ID; values
    /// travel with their components.
    pub fn apply_vector(&self, v: &SparseVector) -> Result<SparseVector> {
        v.check_dim(self.dim())?;
        let mut pairs: Vec<(u32, f32)> = v.iter().map(|(c, x)| (self.map(c), x)).collect();
        pairs.sort_unstable_by_key(|p| p.0);
        let (components, values) = pairs.into_iter().unzip();
        SparseVector::new(components, values)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 4 * self.forward.len() + format::FOOTER_LEN);
        out.extend_from_slice(&PERMUTATION_MAGIC);
        format::put_u32(&mut out, self.dim());
        for &x in &self.forward {
            format::put_u32(&mut out, x);
        }
        format::append_footer(&mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor::new(bytes);
        cur.magic(PERMUTATION_MAGIC)?;
        let d = cur.u32()?;
        let d = cur.count(d as u64, 4)?;
        let forward = (0..d).map(|_| cur.u32()).collect::<Result<Vec<_>>>()?;
        cur.finish()?;
        Permutation::new(forward)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        format::write_file(path.as_ref(), &self.to_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Applies `perm` to every vector of `ds`.
pub fn apply_permutation(ds: &SparseDataset, perm: &Permutation) -> Result<SparseDataset> {
    if perm.dim() != ds.dim() {
        return Err(Error::NotBijective(format!(
            "permutation over {} IDs applied to dimension {}",
            perm.dim(),
            ds.dim()
        )));
    }
    let docs = ds
        .docs()
        .iter()
        .map(|d| perm.apply_vector(d))
        .collect::<Result<Vec<_>>>()?;
    SparseDataset::from_docs(ds.dim(), docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bijection_checks() {
        assert!(Permutation::new(vec![1, 0, 2]).is_ok());
        assert!(Permutation::new(vec![1, 1, 2]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn reversal_swaps_pairs() {
        let ds = SparseDataset::from_docs(
            2,
            vec![SparseVector::new(vec![0, 1], vec![1.0, 2.0]).unwrap()],
        )
        .unwrap();
        let rev = Permutation::new(vec![1, 0]).unwrap();
        let out = apply_permutation(&ds, &rev).unwrap();
        assert_eq!(out[0].components(), &[0, 1]);
        assert_eq!(out[0].values(), &[2.0, 1.0]);
        assert_eq!(apply_permutation(&out, &rev.inverse()).unwrap(), ds);
    }

    #[test]
    fn identity_is_noop() {
        let ds = SparseDataset::from_docs(
            10,
            vec![SparseVector::new(vec![3, 7], vec![1.0, 2.0]).unwrap()],
        )
        .unwrap();
        assert_eq!(apply_permutation(&ds, &Permutation::identity(10)).unwrap(), ds);
        assert!(apply_permutation(&ds, &Permutation::identity(9)).is_err());
    }

    #[test]
    fn file_round_trip() {
        let p = Permutation::new(vec![2, 0, 1, 3]).unwrap();
        let bytes = p.to_bytes();
        assert_eq!(&bytes[..4], b"PRM1");
        let back = Permutation::from_bytes(&bytes).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_bytes(), bytes);
        let mut bad = bytes.clone();
        bad[8] = 1; // 2 -> 1 duplicates another image; caught by checksum first
        assert!(Permutation::from_bytes(&bad).is_err());
    }
}
