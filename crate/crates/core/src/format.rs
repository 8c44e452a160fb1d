//! Little-endian byte helpers shared by the dataset, permutation, and index
//! file formats.
//!
//! Every file written by this crate ends with an 8-byte integrity footer:
//! the tag `CRC1` followed by the CRC-32 of all preceding bytes. Readers
//! accept files without a footer (so externally produced files in the bare
//! layout still load) but reject a footer whose checksum does not match and
//! any other trailing bytes.

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) const FOOTER_TAG: [u8; 4] = *b"CRC1";
pub(crate) const FOOTER_LEN: usize = 8;

pub(crate) fn put_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn append_footer(out: &mut Vec<u8>) {
    let crc = crc32fast::hash(out);
    out.extend_from_slice(&FOOTER_TAG);
    put_u32(out, crc);
}

/// Sequential reader over a byte slice that reports truncation as corruption.
pub(crate) struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Cursor { buf, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| {
                Error::corrupt(format!(
                    "truncated: wanted {n} bytes at offset {}, {} available",
                    self.pos,
                    self.buf.len() - self.pos
                ))
            })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub fn magic(&mut self, expected: [u8; 4]) -> Result<()> {
        let found: [u8; 4] = self.take(4)?.try_into().unwrap();
        if found != expected {
            return Err(Error::BadMagic { expected, found });
        }
        Ok(())
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    /// Converts a length read from the file into a `usize`, refusing counts
    /// that could not possibly fit in the remaining bytes.
    pub fn count(&self, n: u64, min_bytes_each: usize) -> Result<usize> {
        let remaining = (self.buf.len() - self.pos) as u64;
        if n.saturating_mul(min_bytes_each as u64) > remaining {
            return Err(Error::corrupt(format!(
                "count {n} exceeds the {remaining} bytes remaining"
            )));
        }
        Ok(n as usize)
    }

    /// Consumes the optional footer and requires end of input.
    pub fn finish(mut self) -> Result<()> {
        let rest = self.buf.len() - self.pos;
        if rest == 0 {
            return Ok(());
        }
        if rest != FOOTER_LEN {
            return Err(Error::corrupt(format!("{rest} unexpected trailing bytes")));
        }
        let body_end = self.pos;
        let tag = self.take(4)?;
        if tag != FOOTER_TAG {
            return Err(Error::corrupt("unexpected trailing bytes"));
        }
        let stored = self.u32()?;
        let computed = crc32fast::hash(&self.buf[..body_end]);
        if stored != computed {
            return Err(Error::Checksum { stored, computed });
        }
        Ok(())
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes)?;
    Ok(())
}
