//! The codec-tagged forward index shared by every codec.
//!
//! Component payloads of all documents live in one blob, addressed by
//! per-document byte offsets; the component count of each document is kept
//! beside the offsets so bit-level payloads need no terminator. Values are
//! stored in a second blob in the index's [`ValueFormat`].

mod file;
mod scan;

pub use file::{INDEX_MAGIC, INDEX_VERSION};
pub use scan::{full_scan_topk, full_scan_topk_with, Hit, Scorer, TopK};

use std::fmt;
use std::str::FromStr;

use crate::bitstream::{self, BitCodec};
use crate::bytecodec::{svb, vbyte};
use crate::dotvbyte::{self, DocView, Kernel, SizeBreakdown};
use crate::error::{Error, Result};
use crate::model::{from_gaps, to_gaps, GapStream, SparseDataset, SparseVector, ValueFormat, MAX_DIM};
use crate::rgb::Permutation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Codec {
    Raw,
    VByte,
    Gamma,
    Delta,
    Zeta { k: u8 },
    StreamVByte,
    DotVByte,
}

impl Codec {
    pub const ALL_DEFAULT: [Codec; 7] = [
        Codec::Raw,
        Codec::VByte,
        Codec::Gamma,
        Codec::Delta,
        Codec::Zeta {
            k: bitstream::DEFAULT_ZETA_K,
        },
        Codec::StreamVByte,
        Codec::DotVByte,
    ];

    pub fn id(self) -> u8 {
        match self {
            Codec::Raw => 0,
            Codec::VByte => 1,
            Codec::Gamma => 2,
            Codec::Delta => 3,
            Codec::Zeta { .. } => 4,
            Codec::StreamVByte => 5,
            Codec::DotVByte => 6,
        }
    }

    pub fn zeta_k(self) -> u8 {
        match self {
            Codec::Zeta { k } => k,
            _ => 0,
        }
    }

    pub fn from_id(id: u8, zeta_k: u8) -> Result<Self> {
        Ok(match id {
            0 => Codec::Raw,
            1 => Codec::VByte,
            2 => Codec::Gamma,
            3 => Codec::Delta,
            4 => match BitCodec::zeta(zeta_k) {
                Ok(_) => Codec::Zeta { k: zeta_k },
                Err(_) => return Err(Error::corrupt(format!("invalid zeta k {zeta_k}"))),
            },
            5 => Codec::StreamVByte,
            6 => Codec::DotVByte,
            other => return Err(Error::corrupt(format!("unknown codec id {other}"))),
        })
    }

    fn bit_codec(self) -> Option<BitCodec> {
        match self {
            Codec::Gamma => Some(BitCodec::Gamma),
            Codec::Delta => Some(BitCodec::Delta),
            Codec::Zeta { k } => Some(BitCodec::Zeta { k }),
            _ => None,
        }
    }

    pub fn is_bit_codec(self) -> bool {
        self.bit_codec().is_some()
    }

    pub fn name(self) -> &'static str {
        match self {
            Codec::Raw => "raw",
            Codec::VByte => "vbyte",
            Codec::Gamma => "gamma",
            Codec::Delta => "delta",
            Codec::Zeta { .. } => "zeta",
            Codec::StreamVByte => "svb",
            Codec::DotVByte => "dotvbyte",
        }
    }

    /// Encodes one document's ascending components.
    pub fn encode_components(self, components: &[u32]) -> Result<Vec<u8>> {
        if self == Codec::Raw {
            let mut out = Vec::with_capacity(2 * components.len());
            for &c in components {
                let c = u16::try_from(c).map_err(|_| Error::UnsupportedDimension(c + 1))?;
                out.extend_from_slice(&c.to_le_bytes());
            }
            return Ok(out);
        }
        let gaps = to_gaps(components)?;
        Ok(match self {
            Codec::Raw => unreachable!(),
            Codec::VByte => vbyte::encode_doc(&gaps),
            Codec::Gamma | Codec::Delta | Codec::Zeta { .. } => {
                bitstream::encode_doc(&gaps, self.bit_codec().unwrap()).into_bytes()
            }
            Codec::StreamVByte => svb::encode_doc(&gaps).to_bytes(),
            Codec::DotVByte => dotvbyte::encode_doc(&gaps)?.to_bytes(),
        })
    }

    /// Decodes one document's payload into ascending components, rejecting
    /// anything out of order or outside `dim`.
    pub fn decode_components(self, bytes: &[u8], nnz: usize, dim: u32) -> Result<Vec<u32>> {
        let mut out = Vec::with_capacity(nnz);
        let check = |ids: &[u32]| -> Result<()> {
            crate::model::check_ascending(ids).map_err(|e| Error::corrupt(e.to_string()))?;
            match ids.last() {
                Some(&c) if c >= dim => Err(Error::ComponentOutOfRange { component: c, dim }),
                _ => Ok(()),
            }
        };
        match self {
            Codec::Raw => {
                if bytes.len() != 2 * nnz {
                    return Err(Error::corrupt(format!(
                        "raw document has {} bytes for {nnz} components",
                        bytes.len()
                    )));
                }
                out.extend(
                    bytes
                        .chunks_exact(2)
                        .map(|b| u16::from_le_bytes([b[0], b[1]]) as u32),
                );
                check(&out)?;
            }
            Codec::VByte => {
                vbyte::decode_doc_into(bytes, nnz, &mut out)?;
                out = from_gaps(&GapStream::from_raw(out), dim)?;
            }
            Codec::Gamma | Codec::Delta | Codec::Zeta { .. } => {
                let bc = self.bit_codec().unwrap();
                bitstream::decode_doc_into(bytes, nnz, bc, &mut out)?;
                // the encoder zero-pads to a byte boundary; anything longer is foreign
                let used = bitstream::encoded_bits(&out, bc).div_ceil(8) as usize;
                if used != bytes.len() {
                    return Err(Error::corrupt(format!(
                        "{} bytes of bit stream, {used} used",
                        bytes.len()
                    )));
                }
                out = from_gaps(&GapStream::from_raw(out), dim)?;
            }
            Codec::StreamVByte => {
                out = from_gaps(&svb::decode_doc(bytes, nnz)?, dim)?;
            }
            Codec::DotVByte => {
                let view = DocView::parse(bytes, nnz)?;
                dotvbyte::decode_with(Kernel::detect(), &view, dim, &mut out)?;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Codec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Codec::Zeta { k } => write!(f, "zeta(k={k})"),
            c => f.write_str(c.name()),
        }
    }
}

impl FromStr for Codec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "raw" | "uncompressed" => Codec::Raw,
            "vbyte" => Codec::VByte,
            "gamma" => Codec::Gamma,
            "delta" => Codec::Delta,
            "zeta" => Codec::Zeta {
                k: bitstream::DEFAULT_ZETA_K,
            },
            "svb" | "streamvbyte" => Codec::StreamVByte,
            "dotvbyte" | "dvb" => Codec::DotVByte,
            other => return Err(Error::validation(format!("unknown codec '{other}'"))),
        })
    }
}

/// Bits spent on components, split by role.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ComponentBits {
    pub control_bits: u64,
    pub data_bits: u64,
    pub tail_bits: u64,
}

impl ComponentBits {
    pub fn total(&self) -> u64 {
        self.control_bits + self.data_bits + self.tail_bits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedForwardIndex {
    codec: Codec,
    value_format: ValueFormat,
    dim: u32,
    offsets: Vec<u64>,
    nnzs: Vec<u32>,
    blob: Vec<u8>,
    value_offsets: Vec<u64>,
    values: Vec<u8>,
}

/// Encodes every document of `ds` with `codec`, after remapping components
/// through `perm` when one is given.
pub fn build_index(
    ds: &SparseDataset,
    codec: Codec,
    fmt: ValueFormat,
    perm: Option<&Permutation>,
) -> Result<CompressedForwardIndex> {
    if ds.dim() > MAX_DIM {
        return Err(Error::UnsupportedDimension(ds.dim()));
    }
    if let Some(p) = perm {
        if p.dim() != ds.dim() {
            return Err(Error::NotBijective(format!(
                "permutation over {} IDs for dimension {}",
                p.dim(),
                ds.dim()
            )));
        }
    }
    if let Codec::Zeta { k } = codec {
        BitCodec::zeta(k)?;
    }
    fmt.check_feasible(ds.max_value())?;

    let n = ds.len();
    let mut idx = CompressedForwardIndex {
        codec,
        value_format: fmt,
        dim: ds.dim(),
        offsets: Vec::with_capacity(n + 1),
        nnzs: Vec::with_capacity(n),
        blob: Vec::new(),
        value_offsets: Vec::with_capacity(n + 1),
        values: Vec::with_capacity(ds.total_nnz() * fmt.bytes_per_value()),
    };
    idx.offsets.push(0);
    idx.value_offsets.push(0);
    for doc in ds.docs() {
        let permuted;
        let doc = match perm {
            Some(p) => {
                permuted = p.apply_vector(doc)?;
                &permuted
            }
            None => doc,
        };
        let payload = codec.encode_components(doc.components())?;
        idx.blob.extend_from_slice(&payload);
        idx.offsets.push(idx.blob.len() as u64);
        idx.nnzs.push(doc.nnz() as u32);
        fmt.encode_into(doc.values(), &mut idx.values)?;
        idx.value_offsets.push(idx.values.len() as u64);
    }
    Ok(idx)
}

impl CompressedForwardIndex {
    pub fn codec(&self) -> Codec {
        self.codec
    }

    pub fn value_format(&self) -> ValueFormat {
        self.value_format
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nnzs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nnzs.is_empty()
    }

    pub fn nnz(&self, i: usize) -> usize {
        self.nnzs[i] as usize
    }

    pub fn total_nnz(&self) -> u64 {
        self.nnzs.iter().map(|&x| x as u64).sum()
    }

    pub fn component_bytes(&self) -> usize {
        self.blob.len()
    }

    pub fn value_bytes(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn doc_payload(&self, i: usize) -> &[u8] {
        &self.blob[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    #[inline]
    pub fn doc_values(&self, i: usize) -> &[u8] {
        &self.values[self.value_offsets[i] as usize..self.value_offsets[i + 1] as usize]
    }

    /// Document `i` of a DotVByte index, with read-ahead into the blob.
    pub fn doc_view(&self, i: usize) -> Result<DocView<'_>> {
        DocView::parse_in(&self.blob, self.offsets[i] as usize, self.offsets[i + 1] as usize, self.nnz(i))
    }

    pub fn doc_components(&self, i: usize) -> Result<Vec<u32>> {
        self.codec
            .decode_components(self.doc_payload(i), self.nnz(i), self.dim)
    }

    /// Decodes document `i` back into a sparse vector (values dequantized).
    pub fn doc(&self, i: usize) -> Result<SparseVector> {
        let components = self.doc_components(i)?;
        let values = self.value_format.decode_all(self.doc_values(i));
        SparseVector::new(components, values)
    }

    pub fn to_dataset(&self) -> Result<SparseDataset> {
        let docs = (0..self.len()).map(|i| self.doc(i)).collect::<Result<Vec<_>>>()?;
        SparseDataset::from_docs(self.dim, docs)
    }

    pub fn bits_per_component(&self) -> f64 {
        let total = self.total_nnz();
        if total == 0 {
            return 0.0;
        }
        8.0 * self.blob.len() as f64 / total as f64
    }

    /// Component bits itemized into control, data, and raw-tail bits.
    pub fn component_bits(&self) -> Result<ComponentBits> {
        let mut bits = ComponentBits::default();
        match self.codec {
            Codec::DotVByte => {
                let mut acc = SizeBreakdown::default();
                for i in 0..self.len() {
                    acc += SizeBreakdown::of(&DocView::parse(self.doc_payload(i), self.nnz(i))?);
                }
                bits.control_bits = acc.control_bits;
                bits.data_bits = acc.data_bits;
                bits.tail_bits = acc.tail_bits;
            }
            Codec::StreamVByte => {
                for i in 0..self.len() {
                    let nc = svb::control_len(self.nnz(i)) as u64;
                    bits.control_bits += 8 * nc;
                    bits.data_bits += 8 * (self.doc_payload(i).len() as u64 - nc);
                }
            }
            _ => bits.data_bits = 8 * self.blob.len() as u64,
        }
        Ok(bits)
    }

    /// Checks every structural invariant and decodes every document.
    pub fn validate(&self) -> Result<()> {
        let n = self.nnzs.len();
        if self.dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        if self.offsets.len() != n + 1 || self.value_offsets.len() != n + 1 {
            return Err(Error::corrupt("offset arrays do not have n + 1 entries"));
        }
        check_offsets(&self.offsets, self.blob.len(), "component")?;
        check_offsets(&self.value_offsets, self.values.len(), "value")?;
        let width = self.value_format.bytes_per_value() as u64;
        for i in 0..n {
            let vlen = self.value_offsets[i + 1] - self.value_offsets[i];
            if vlen != self.nnzs[i] as u64 * width {
                return Err(Error::corrupt(format!(
                    "document {i}: {vlen} value bytes for {} components",
                    self.nnzs[i]
                )));
            }
            self.doc_components(i)
                .map_err(|e| Error::corrupt(format!("document {i}: {e}")))?;
        }
        if !matches!(self.value_format, ValueFormat::FixedU8 { .. }) {
            let vals = self.value_format.decode_all(&self.values);
            if let Some(v) = vals.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::corrupt(format!("stored value {v} is negative or not finite")));
            }
        }
        Ok(())
    }
}

fn check_offsets(offsets: &[u64], blob_len: usize, what: &str) -> Result<()> {
    if offsets.first() != Some(&0) || offsets.last() != Some(&(blob_len as u64)) {
        return Err(Error::corrupt(format!(
            "{what} offsets must start at 0 and end at the blob length {blob_len}"
        )));
    }
    if offsets.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::corrupt(format!("{what} offsets are not monotone")));
    }
    Ok(())
}
