use half::f16;

use crate::error::{Error, Result};

/// Storage width of document values. Values are never gap- or
/// entropy-coded; only their representation changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueFormat {
    #[default]
    F32,
    F16,
    /// Unsigned 8-bit fixed point, `code / 2^frac_bits`.
    FixedU8 { frac_bits: u8 },
}

impl std::fmt::Display for ValueFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValueFormat::F32 => f.write_str("f32"),
            ValueFormat::F16 => f.write_str("f16"),
            ValueFormat::FixedU8 { frac_bits } => write!(f, "fixedu8(frac_bits={frac_bits})"),
        }
    }
}

impl ValueFormat {
    pub fn bytes_per_value(self) -> usize {
        match self {
            ValueFormat::F32 => 4,
            ValueFormat::F16 => 2,
            ValueFormat::FixedU8 { .. } => 1,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            ValueFormat::F32 => 0,
            ValueFormat::F16 => 1,
            ValueFormat::FixedU8 { .. } => 2,
        }
    }

    pub fn frac_bits(self) -> u8 {
        match self {
            ValueFormat::FixedU8 { frac_bits } => frac_bits,
            _ => 0,
        }
    }

    pub fn from_tag(tag: u8, frac_bits: u8) -> Result<Self> {
        match tag {
            0 => Ok(ValueFormat::F32),
            1 => Ok(ValueFormat::F16),
            2 if frac_bits <= 8 => Ok(ValueFormat::FixedU8 { frac_bits }),
            2 => Err(Error::corrupt(format!("frac_bits {frac_bits} > 8"))),
            t => Err(Error::corrupt(format!("unknown value format tag {t}"))),
        }
    }

    /// Picks the most precise fixed-point format that stores every value up to
    /// `max_value` within half a grid step.
    pub fn fixed_u8_for(max_value: f32) -> Result<Self> {
        for frac_bits in (0..=8u8).rev() {
            let scaled = max_value as f64 * (1u32 << frac_bits) as f64;
            if scaled.round() <= 255.0 {
                return Ok(ValueFormat::FixedU8 { frac_bits });
            }
        }
        Err(Error::FixedPointOverflow {
            value: max_value,
            frac_bits: 0,
            required: required_frac_bits(max_value),
        })
    }

    /// Multiplier turning a fixed-point code into its value.
    pub fn fixed_scale(self) -> f32 {
        match self {
            ValueFormat::FixedU8 { frac_bits } => 1.0 / (1u32 << frac_bits) as f32,
            _ => 1.0,
        }
    }

    /// Worst-case absolute error introduced when storing `v`.
    pub fn max_abs_error(self, v: f32) -> f64 {
        match self {
            ValueFormat::F32 => 0.0,
            // half an ulp of binary16 at v's magnitude, or the subnormal step
            ValueFormat::F16 => (v.abs() as f64 * 2f64.powi(-11)).max(2f64.powi(-25)),
            ValueFormat::FixedU8 { frac_bits } => 2f64.powi(-(frac_bits as i32) - 1),
        }
    }

    pub fn check_feasible(self, max_value: f32) -> Result<()> {
        if let ValueFormat::FixedU8 { frac_bits } = self {
            let limit = 2f64.powi(8 - frac_bits as i32);
            if max_value as f64 >= limit {
                return Err(Error::FixedPointOverflow {
                    value: max_value,
                    frac_bits,
                    required: required_frac_bits(max_value),
                });
            }
        }
        Ok(())
    }

    /// Appends the stored representation of each value to `out`.
    pub fn encode_into(self, values: &[f32], out: &mut Vec<u8>) -> Result<()> {
        match self {
            ValueFormat::F32 => {
                for v in values {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            ValueFormat::F16 => {
                for v in values {
                    out.extend_from_slice(&f16::from_f32(*v).to_le_bytes());
                }
            }
            ValueFormat::FixedU8 { .. } => {
                for &v in values {
                    out.push(quantize(v, self)? as u8);
                }
            }
        }
        Ok(())
    }

    /// Reads value `i` from a per-document value slice.
    #[inline]
    pub fn read(self, bytes: &[u8], i: usize) -> f32 {
        match self {
            ValueFormat::F32 => f32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap()),
            ValueFormat::F16 => {
                f16::from_le_bytes([bytes[2 * i], bytes[2 * i + 1]]).to_f32()
            }
            ValueFormat::FixedU8 { .. } => bytes[i] as f32 * self.fixed_scale(),
        }
    }

    pub fn decode_all(self, bytes: &[u8]) -> Vec<f32> {
        let n = bytes.len() / self.bytes_per_value();
        (0..n).map(|i| self.read(bytes, i)).collect()
    }
}

/// Largest frac_bits that still fits `value` (may be negative when the value
/// is too large for any u8 fixed-point format).
fn required_frac_bits(value: f32) -> i32 {
    if value <= 0.0 {
        return 8;
    }
    7 - (value as f64).log2().floor() as i32
}

/// Stored code for `v`: raw f32 bits, raw binary16 bits, or the u8 grid index.
pub fn quantize(v: f32, fmt: ValueFormat) -> Result<u32> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::validation(format!("value {v} is negative or not finite")));
    }
    match fmt {
        ValueFormat::F32 => Ok(v.to_bits()),
        ValueFormat::F16 => Ok(f16::from_f32(v).to_bits() as u32),
        ValueFormat::FixedU8 { frac_bits } => {
            fmt.check_feasible(v)?;
            let scaled = (v as f64 * (1u32 << frac_bits) as f64).round();
            Ok(scaled.clamp(0.0, 255.0) as u32)
        }
    }
}

pub fn dequantize(code: u32, fmt: ValueFormat) -> f32 {
    match fmt {
        ValueFormat::F32 => f32::from_bits(code),
        ValueFormat::F16 => f16::from_bits(code as u16).to_f32(),
        ValueFormat::FixedU8 { .. } => (code & 0xFF) as f32 * fmt.fixed_scale(),
    }
}
