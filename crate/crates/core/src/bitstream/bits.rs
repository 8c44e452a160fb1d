use crate::error::{Error, Result};

/// Bits packed most-significant-first; pad bits in the final byte are zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitBuffer {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitBuffer {
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// Renders the valid bits as a string of '0'/'1', for tests and debugging.
    pub fn to_bit_string(&self) -> String {
        (0..self.bit_len)
            .map(|i| {
                if self.bytes[i / 8] >> (7 - i % 8) & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }
}

#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    // number of pending bits in the low end of `acc`, always < 8 between calls
    pending: u32,
    bit_len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Writes the low `n` bits of `value`, most significant first.
    #[inline]
    pub fn write_bits(&mut self, value: u64, n: u32) {
        debug_assert!(n <= 64);
        if n > 32 {
            self.write_bits(value >> 32, n - 32);
            self.write_bits(value & 0xFFFF_FFFF, 32);
            return;
        }
        if n == 0 {
            return;
        }
        let masked = value & ((1u64 << n) - 1);
        self.acc = (self.acc << n) | masked;
        self.pending += n;
        self.bit_len += n as usize;
        while self.pending >= 8 {
            self.pending -= 8;
            self.bytes.push((self.acc >> self.pending) as u8);
        }
        self.acc &= (1u64 << self.pending) - 1;
    }

    #[inline]
    pub fn write_zeros(&mut self, mut n: u32) {
        while n > 32 {
            self.write_bits(0, 32);
            n -= 32;
        }
        self.write_bits(0, n);
    }

    /// `n` zeros followed by a one.
    #[inline]
    pub fn write_unary(&mut self, n: u32) {
        self.write_zeros(n);
        self.write_bits(1, 1);
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn finish(mut self) -> BitBuffer {
        if self.pending > 0 {
            self.bytes.push((self.acc << (8 - self.pending)) as u8);
        }
        BitBuffer {
            bytes: self.bytes,
            bit_len: self.bit_len,
        }
    }
}

/// MSB-first reader with a 64-bit lookahead window.
pub struct BitReader<'a> {
    bytes: &'a [u8],
    next_byte: usize,
    // valid bits are left-aligned in `window`
    window: u64,
    avail: u32,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader {
            bytes,
            next_byte: 0,
            window: 0,
            avail: 0,
        }
    }

    #[inline]
    fn refill(&mut self) {
        if self.avail == 0 && self.next_byte + 8 <= self.bytes.len() {
            let w = u64::from_be_bytes(
                self.bytes[self.next_byte..self.next_byte + 8]
                    .try_into()
                    .unwrap(),
            );
            self.window = w;
            self.avail = 64;
            self.next_byte += 8;
            return;
        }
        while self.avail <= 56 && self.next_byte < self.bytes.len() {
            self.window |= (self.bytes[self.next_byte] as u64) << (56 - self.avail);
            self.avail += 8;
            self.next_byte += 1;
        }
    }

    fn truncated() -> Error {
        Error::corrupt("bit stream ended inside a codeword")
    }

    /// Reads `n <= 32` bits as an unsigned integer.
    #[inline]
    pub fn read_bits(&mut self, n: u32) -> Result<u64> {
        debug_assert!(n <= 32);
        if n == 0 {
            return Ok(0);
        }
        if self.avail < n {
            self.refill();
            if self.avail < n {
                return Err(Self::truncated());
            }
        }
        let v = self.window >> (64 - n);
        self.window <<= n;
        self.avail -= n;
        Ok(v)
    }

    #[inline]
    pub fn read_bit(&mut self) -> Result<bool> {
        Ok(self.read_bits(1)? == 1)
    }

    /// Counts zeros up to and including the terminating one bit.
    #[inline]
    pub fn read_unary(&mut self) -> Result<u32> {
        let mut zeros = 0u32;
        loop {
            if self.avail == 0 {
                self.refill();
                if self.avail == 0 {
                    return Err(Self::truncated());
                }
            }
            let lz = self.window.leading_zeros();
            if lz < self.avail {
                zeros += lz;
                // consume the zeros and the one
                let used = lz + 1;
                self.window = if used == 64 { 0 } else { self.window << used };
                self.avail -= used;
                if zeros > 64 {
                    return Err(Error::corrupt("unary run longer than 64 bits"));
                }
                return Ok(zeros);
            }
            zeros += self.avail;
            self.window = 0;
            self.avail = 0;
            if zeros > 64 {
                return Err(Error::corrupt("unary run longer than 64 bits"));
            }
        }
    }

    /// Total bits consumed so far.
    pub fn position(&self) -> usize {
        self.next_byte * 8 - self.avail as usize
    }
}
