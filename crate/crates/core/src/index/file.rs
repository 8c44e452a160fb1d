//! Index files (little-endian):
//!
//! ```text
//! "DVF1" | version u16 | codec u8 | value format u8 | zeta_k u8 | frac_bits u8
//! dim u32 | n u64
//! offsets (n+1) × u64 | nnzs n × u32
//! component blob length u64 | blob
//! value offsets (n+1) × u64 | value blob
//! ```

use std::path::Path;

use super::{Codec, CompressedForwardIndex};
use crate::error::{Error, Result};
use crate::format::{self, Cursor};
use crate::model::ValueFormat;

pub const INDEX_MAGIC: [u8; 4] = *b"DVF1";
pub const INDEX_VERSION: u16 = 1;

impl CompressedForwardIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len();
        let mut out = Vec::with_capacity(
            24 + 20 * n + self.blob.len() + self.values.len() + 24 + format::FOOTER_LEN,
        );
        out.extend_from_slice(&INDEX_MAGIC);
        format::put_u16(&mut out, INDEX_VERSION);
        out.push(self.codec.id());
        out.push(self.value_format.tag());
        out.push(self.codec.zeta_k());
        out.push(self.value_format.frac_bits());
        format::put_u32(&mut out, self.dim);
        format::put_u64(&mut out, n as u64);
        for &o in &self.offsets {
            format::put_u64(&mut out, o);
        }
        for &c in &self.nnzs {
            format::put_u32(&mut out, c);
        }
        format::put_u64(&mut out, self.blob.len() as u64);
        out.extend_from_slice(&self.blob);
        for &o in &self.value_offsets {
            format::put_u64(&mut out, o);
        }
        out.extend_from_slice(&self.values);
        format::append_footer(&mut out);
        out
    }

    /// Parses and fully validates an index file image.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor::new(bytes);
        cur.magic(INDEX_MAGIC)?;
        let version = cur.u16()?;
        if version != INDEX_VERSION {
            return Err(Error::VersionMismatch {
                expected: INDEX_VERSION,
                found: version,
            });
        }
        let codec_id = cur.u8()?;
        let fmt_tag = cur.u8()?;
        let zeta_k = cur.u8()?;
        let frac_bits = cur.u8()?;
        let codec = Codec::from_id(codec_id, zeta_k)?;
        if !matches!(codec, Codec::Zeta { .. }) && zeta_k != 0 {
            return Err(Error::corrupt(format!("zeta_k {zeta_k} set for codec {codec}")));
        }
        let value_format = ValueFormat::from_tag(fmt_tag, frac_bits)?;
        if !matches!(value_format, ValueFormat::FixedU8 { .. }) && frac_bits != 0 {
            return Err(Error::corrupt(format!("frac_bits {frac_bits} set for {value_format:?}")));
        }
        let dim = cur.u32()?;
        let n = cur.u64()?;
        let n = cur.count(n, 8 + 4 + 8)?;
        let offsets = (0..=n).map(|_| cur.u64()).collect::<Result<Vec<_>>>()?;
        let nnzs = (0..n).map(|_| cur.u32()).collect::<Result<Vec<_>>>()?;
        let blob_len = cur.u64()?;
        let blob_len = cur.count(blob_len, 1)?;
        let blob = cur.take(blob_len)?.to_vec();
        let value_offsets = (0..=n).map(|_| cur.u64()).collect::<Result<Vec<_>>>()?;
        let values_len = *value_offsets.last().unwrap();
        let values_len = cur.count(values_len, 1)?;
        let values = cur.take(values_len)?.to_vec();
        cur.finish()?;
        let idx = CompressedForwardIndex {
            codec,
            value_format,
            dim,
            offsets,
            nnzs,
            blob,
            value_offsets,
            values,
        };
        idx.validate()?;
        Ok(idx)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        format::write_file(path.as_ref(), &self.to_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
