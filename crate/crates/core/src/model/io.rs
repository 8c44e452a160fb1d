//! Binary dataset files and JSON-lines ingestion.
//!
//! Layout (little-endian): `SPF1`, version `u16 = 1`, `dim: u32`,
//! `count: u64`, then per vector `nnz: u32`, `nnz × u32` ascending
//! components, `nnz × f32` values. Queries use the same layout.

use std::io::BufRead;
use std::path::Path;

use serde::Deserialize;

use super::{SparseDataset, SparseVector};
use crate::error::{Error, Result};
use crate::format::{self, Cursor};

pub const DATASET_MAGIC: [u8; 4] = *b"SPF1";
pub const DATASET_VERSION: u16 = 1;

pub fn dataset_to_bytes(ds: &SparseDataset) -> Vec<u8> {
    let mut out = Vec::with_capacity(18 + ds.total_nnz() * 8 + ds.len() * 4 + format::FOOTER_LEN);
    out.extend_from_slice(&DATASET_MAGIC);
    format::put_u16(&mut out, DATASET_VERSION);
    format::put_u32(&mut out, ds.dim());
    format::put_u64(&mut out, ds.len() as u64);
    for doc in ds.docs() {
        format::put_u32(&mut out, doc.nnz() as u32);
        for &c in doc.components() {
            format::put_u32(&mut out, c);
        }
        for &v in doc.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    format::append_footer(&mut out);
    out
}

pub fn dataset_from_bytes(bytes: &[u8]) -> Result<SparseDataset> {
    let mut cur = Cursor::new(bytes);
    cur.magic(DATASET_MAGIC)?;
    let version = cur.u16()?;
    if version != DATASET_VERSION {
        return Err(Error::VersionMismatch {
            expected: DATASET_VERSION,
            found: version,
        });
    }
    let dim = cur.u32()?;
    let count = cur.u64()?;
    let count = cur.count(count, 4)?;
    let mut docs = Vec::with_capacity(count);
    for _ in 0..count {
        let nnz = cur.u32()? as u64;
        let nnz = cur.count(nnz, 8)?;
        let components = (0..nnz).map(|_| cur.u32()).collect::<Result<Vec<_>>>()?;
        let values = (0..nnz).map(|_| cur.f32()).collect::<Result<Vec<_>>>()?;
        let doc = SparseVector::new(components, values)?;
        doc.check_dim(dim)?;
        docs.push(doc);
    }
    cur.finish()?;
    Ok(SparseDataset { dim, docs })
}

pub fn save_dataset(ds: &SparseDataset, path: impl AsRef<Path>) -> Result<()> {
    format::write_file(path.as_ref(), &dataset_to_bytes(ds))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<SparseDataset> {
    dataset_from_bytes(&std::fs::read(path)?)
}

#[derive(Deserialize)]
struct JsonVector {
    coords: Vec<u32>,
    values: Vec<f32>,
}

/// Reads one JSON object per line, each with `coords` and `values` arrays.
/// Pairs are sorted by component; blank lines are skipped.
pub fn read_jsonl(reader: impl BufRead, dim: u32) -> Result<SparseDataset> {
    let mut ds = SparseDataset::new(dim);
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: JsonVector = serde_json::from_str(&line)
            .map_err(|e| Error::validation(format!("line {}: {e}", lineno + 1)))?;
        if v.coords.len() != v.values.len() {
            return Err(Error::validation(format!(
                "line {}: {} coords but {} values",
                lineno + 1,
                v.coords.len(),
                v.values.len()
            )));
        }
        let doc = SparseVector::from_pairs(v.coords.into_iter().zip(v.values).collect())?;
        ds.push(doc)?;
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_round_trip() {
        let ds = SparseDataset::new(30522);
        let bytes = dataset_to_bytes(&ds);
        let back = dataset_from_bytes(&bytes).unwrap();
        assert_eq!(back, ds);
        assert_eq!(dataset_to_bytes(&back), bytes);
    }

    #[test]
    fn single_doc_round_trip() {
        let doc = SparseVector::new(vec![5], vec![2.5]).unwrap();
        let ds = SparseDataset::from_docs(30522, vec![doc]).unwrap();
        let bytes = dataset_to_bytes(&ds);
        assert_eq!(&bytes[..4], b"SPF1");
        // header 18 + nnz 4 + comp 4 + value 4 + footer 8
        assert_eq!(bytes.len(), 38);
        assert_eq!(dataset_from_bytes(&bytes).unwrap(), ds);
    }

    fn bare(dim: u32, docs: &[(&[u32], &[f32])]) -> Vec<u8> {
        let mut out = b"SPF1".to_vec();
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&dim.to_le_bytes());
        out.extend_from_slice(&(docs.len() as u64).to_le_bytes());
        for (c, v) in docs {
            out.extend_from_slice(&(c.len() as u32).to_le_bytes());
            c.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
            v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
        }
        out
    }

    #[test]
    fn footerless_file_loads() {
        let bytes = bare(10, &[(&[1, 4], &[1.0, 2.0])]);
        let ds = dataset_from_bytes(&bytes).unwrap();
        assert_eq!(ds[0].components(), &[1, 4]);
    }

    #[test]
    fn distinct_errors() {
        let mut b = bare(10, &[]);
        b[0] = b'X';
        assert!(matches!(dataset_from_bytes(&b), Err(Error::BadMagic { .. })));

        let mut b = bare(10, &[]);
        b[4] = 2;
        assert!(matches!(
            dataset_from_bytes(&b),
            Err(Error::VersionMismatch { found: 2, .. })
        ));

        let b = bare(10, &[(&[4, 1], &[1.0, 2.0])]);
        assert!(matches!(dataset_from_bytes(&b), Err(Error::NotAscending { .. })));

        let b = bare(10, &[(&[1, 10], &[1.0, 2.0])]);
        assert!(matches!(
            dataset_from_bytes(&b),
            Err(Error::ComponentOutOfRange { component: 10, dim: 10 })
        ));

        let mut b = bare(10, &[(&[1], &[1.0])]);
        b.push(0);
        assert!(matches!(dataset_from_bytes(&b), Err(Error::Corrupt(_))));
    }

    #[test]
    fn jsonl_ingest() {
        let text = "{\"coords\": [9, 2], \"values\": [0.5, 1.5]}\n\n{\"coords\": [], \"values\": []}\n";
        let ds = read_jsonl(text.as_bytes(), 10).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds[0].components(), &[2, 9]);
        assert_eq!(ds[0].values(), &[1.5, 0.5]);
        assert!(read_jsonl("{\"coords\": [10], \"values\": [1]}".as_bytes(), 10).is_err());
    }
}
