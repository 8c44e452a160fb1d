//! Elias gamma, Elias delta, and zeta codes over positive integers.

use super::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};

#[inline]
fn floor_log2(x: u64) -> u32 {
    63 - x.leading_zeros()
}

/// ⌊log₂x⌋ zeros, then `x` in ⌊log₂x⌋+1 bits.
#[inline]
pub fn gamma_encode(x: u64, out: &mut BitWriter) {
    assert!(x >= 1, "gamma code is defined for x >= 1");
    let n = floor_log2(x);
    out.write_zeros(n);
    out.write_bits(x, n + 1);
}

#[inline]
pub fn gamma_decode(r: &mut BitReader) -> Result<u64> {
    let n = r.read_unary()?;
    if n > 32 {
        return Err(Error::corrupt(format!("gamma prefix of {n} zeros")));
    }
    Ok((1u64 << n) | r.read_bits(n)?)
}

pub fn gamma_len(x: u64) -> u32 {
    2 * floor_log2(x) + 1
}

/// γ(⌊log₂x⌋+1), then the ⌊log₂x⌋ low bits of `x`.
#[inline]
pub fn delta_encode(x: u64, out: &mut BitWriter) {
    assert!(x >= 1, "delta code is defined for x >= 1");
    let n = floor_log2(x);
    gamma_encode(n as u64 + 1, out);
    out.write_bits(x, n);
}

#[inline]
pub fn delta_decode(r: &mut BitReader) -> Result<u64> {
    let n = gamma_decode(r)? - 1;
    if n > 32 {
        return Err(Error::corrupt(format!("delta length field {n}")));
    }
    let n = n as u32;
    Ok((1u64 << n) | r.read_bits(n)?)
}

pub fn delta_len(x: u64) -> u32 {
    let n = floor_log2(x);
    gamma_len(n as u64 + 1) + n
}

/// Zeta code with shape `k`: for the largest `h` with 2^(hk) <= x, unary `h`
/// followed by the minimal binary code of x - 2^(hk) over an interval of
/// 2^((h+1)k) - 2^(hk) values.
#[inline]
pub fn zeta_encode(x: u64, k: u32, out: &mut BitWriter) {
    assert!(x >= 1, "zeta code is defined for x >= 1");
    assert!(k >= 1, "zeta shape must be >= 1");
    let h = floor_log2(x) / k;
    let lo = 1u64 << (h * k);
    let hi = 1u64 << ((h + 1) * k);
    out.write_unary(h);
    minimal_binary_encode(x - lo, hi - lo, out);
}

#[inline]
pub fn zeta_decode(r: &mut BitReader, k: u32) -> Result<u64> {
    let h = r.read_unary()?;
    if (h + 1) * k > 32 {
        return Err(Error::corrupt(format!("zeta prefix {h} too long for k={k}")));
    }
    let lo = 1u64 << (h * k);
    let hi = 1u64 << ((h + 1) * k);
    Ok(lo + minimal_binary_decode(r, hi - lo)?)
}

pub fn zeta_len(x: u64, k: u32) -> u32 {
    let h = floor_log2(x) / k;
    let lo = 1u64 << (h * k);
    let hi = 1u64 << ((h + 1) * k);
    h + 1 + minimal_binary_len(x - lo, hi - lo)
}

/// Truncated binary code of `v` in `[0, m)`: the first 2^s − m values use
/// s − 1 bits, the rest s bits, where s = ⌈log₂m⌉.
#[inline]
pub fn minimal_binary_encode(v: u64, m: u64, out: &mut BitWriter) {
    debug_assert!(v < m);
    if m == 1 {
        return;
    }
    let s = 64 - (m - 1).leading_zeros();
    let short = (1u64 << s) - m;
    if v < short {
        out.write_bits(v, s - 1);
    } else {
        out.write_bits(v + short, s);
    }
}

#[inline]
pub fn minimal_binary_decode(r: &mut BitReader, m: u64) -> Result<u64> {
    if m == 1 {
        return Ok(0);
    }
    let s = 64 - (m - 1).leading_zeros();
    let short = (1u64 << s) - m;
    let prefix = r.read_bits(s - 1)?;
    if prefix < short {
        return Ok(prefix);
    }
    let full = (prefix << 1) | r.read_bits(1)?;
    Ok(full - short)
}

pub fn minimal_binary_len(v: u64, m: u64) -> u32 {
    if m == 1 {
        return 0;
    }
    let s = 64 - (m - 1).leading_zeros();
    if v < (1u64 << s) - m {
        s - 1
    } else {
        s
    }
}
