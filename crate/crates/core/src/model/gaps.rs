use crate::error::{Error, Result};

/// Gap representation of an ascending component list.
///
/// The first gap is the absolute first component (it may be 0); every later
/// gap is the difference to the previous component and is therefore >= 1.
/// Bit codecs, which cannot encode 0, shift the first gap by one internally.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GapStream(Vec<u32>);

impl GapStream {
    /// Wraps raw gaps without validation. Decoders use this and rely on
    /// [`from_gaps`] to reject streams that are out of range.
    pub fn from_raw(gaps: Vec<u32>) -> Self {
        GapStream(gaps)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }
}

impl AsRef<[u32]> for GapStream {
    fn as_ref(&self) -> &[u32] {
        &self.0
    }
}

pub fn to_gaps(components: &[u32]) -> Result<GapStream> {
    let mut gaps = Vec::with_capacity(components.len());
    let mut prev = None;
    for (i, &c) in components.iter().enumerate() {
        match prev {
            None => gaps.push(c),
            Some(p) if c > p => gaps.push(c - p),
            Some(p) => {
                return Err(Error::NotAscending {
                    index: i - 1,
                    prev: p,
                    next: c,
                })
            }
        }
        prev = Some(c);
    }
    Ok(GapStream(gaps))
}

/// Prefix-sums `gaps` back into component IDs, rejecting any stream whose
/// sums reach `dim` or whose non-leading gaps are zero.
pub fn from_gaps(gaps: &GapStream, dim: u32) -> Result<Vec<u32>> {
    let mut out = Vec::with_capacity(gaps.len());
    let mut acc: u64 = 0;
    for (i, &g) in gaps.0.iter().enumerate() {
        if i > 0 && g == 0 {
            return Err(Error::corrupt(format!("zero gap at position {i}")));
        }
        acc += g as u64;
        if acc >= dim as u64 {
            return Err(Error::corrupt(format!(
                "prefix sum {acc} at position {i} exceeds dimension {dim}"
            )));
        }
        out.push(acc as u32);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_examples() {
        assert_eq!(to_gaps(&[3, 7, 10]).unwrap().as_slice(), &[3, 4, 3]);
        assert_eq!(to_gaps(&[0]).unwrap().as_slice(), &[0]);
        let g = GapStream::from_raw(vec![3, 4, 3]);
        assert_eq!(from_gaps(&g, 30522).unwrap(), vec![3, 7, 10]);
        assert_eq!(from_gaps(&GapStream::from_raw(vec![0]), 1).unwrap(), vec![0]);
    }

    #[test]
    fn consecutive_ids() {
        let c: Vec<u32> = (0..119).collect();
        let g = to_gaps(&c).unwrap();
        assert_eq!(g.as_slice()[0], 0);
        assert!(g.as_slice()[1..].iter().all(|&x| x == 1));
        assert_eq!(from_gaps(&g, 30522).unwrap(), c);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            to_gaps(&[1, 5, 5]),
            Err(Error::NotAscending { index: 1, prev: 5, next: 5 })
        ));
        assert!(from_gaps(&GapStream::from_raw(vec![5, 5]), 10).is_err());
        assert!(from_gaps(&GapStream::from_raw(vec![10]), 10).is_err());
        assert!(from_gaps(&GapStream::from_raw(vec![1, 0]), 10).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(set in proptest::collection::btree_set(0u32..65536, 0..387)) {
            let c: Vec<u32> = set.into_iter().collect();
            let g = to_gaps(&c).unwrap();
            prop_assert!(g.as_slice().iter().skip(1).all(|&x| x >= 1));
            prop_assert_eq!(from_gaps(&g, 65536).unwrap(), c);
        }
    }
}
