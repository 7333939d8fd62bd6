//! Fixed-width bit vectors.
//!
//! Bit 0 is the least significant bit. Widths range over `1..=64` and are
//! fixed at construction, so every visible message, clock and opinion in the
//! crate is a small `Copy` value.

use std::fmt;

use crate::error::{Error, Result};

/// Majority of three bits.
#[inline]
pub fn maj3(a: bool, b: bool, c: bool) -> bool {
    (a & b) | (a & c) | (b & c)
}

/// Word-level bitwise majority, no width checks.
#[inline]
pub(crate) fn maj_word(a: u64, b: u64, c: u64) -> u64 {
    (a & b) | (a & c) | (b & c)
}

#[inline]
pub(crate) fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: u64,
    width: u8,
}

impl BitString {
    /// All-zero string of the given width.
    pub fn zeros(width: u32) -> Result<Self> {
        check_width(width)?;
        Ok(Self { bits: 0, width: width as u8 })
    }

    pub fn from_value(width: u32, value: u64) -> Result<Self> {
        check_width(width)?;
        if value & !mask(width) != 0 {
            return Err(Error::ValueOutOfRange { value, width });
        }
        Ok(Self { bits: value, width: width as u8 })
    }

    /// Builds a string from the low `width` bits of `value`, dropping the rest.
    ///
    /// # Panics
    /// Panics if `width` is not in `1..=64`.
    #[inline]
    pub fn truncating(width: u32, value: u64) -> Self {
        assert!((1..=64).contains(&width), "bit width {width} outside 1..=64");
        Self { bits: value & mask(width), width: width as u8 }
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let width = bits.len() as u32;
        check_width(width)?;
        let value = bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i));
        Ok(Self { bits: value, width: width as u8 })
    }

    #[inline]
    pub fn width(self) -> u32 {
        u32::from(self.width)
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.bits
    }

    /// Bit `index`, panicking when out of range.
    #[inline]
    pub fn bit(self, index: u32) -> bool {
        assert!(index < self.width(), "bit {index} of a {}-bit string", self.width);
        (self.bits >> index) & 1 == 1
    }

    pub fn get(self, index: u32) -> Result<bool> {
        if index >= self.width() {
            return Err(Error::IndexOutOfRange { index, width: self.width() });
        }
        Ok(self.bit(index))
    }

    #[inline]
    pub fn with_bit(self, index: u32, bit: bool) -> Self {
        assert!(index < self.width(), "bit {index} of a {}-bit string", self.width);
        let cleared = self.bits & !(1u64 << index);
        Self { bits: cleared | (u64::from(bit) << index), width: self.width }
    }

    /// `len` bits starting at `start`, as a new string.
    pub fn slice(self, start: u32, len: u32) -> Result<Self> {
        check_width(len)?;
        if start + len > self.width() {
            return Err(Error::IndexOutOfRange { index: start + len - 1, width: self.width() });
        }
        Ok(Self::truncating(len, self.bits >> start))
    }

    /// `self` in the low bits and `high` above it.
    pub fn concat(self, high: BitString) -> Result<Self> {
        let width = self.width() + high.width();
        check_width(width)?;
        Ok(Self { bits: self.bits | (high.bits << self.width), width: width as u8 })
    }

    pub fn count_ones(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn iter(self) -> impl Iterator<Item = bool> {
        (0..self.width()).map(move |i| self.bit(i))
    }
}

/// Per-bit majority of three equal-width strings.
pub fn bitwise_majority(x: BitString, y: BitString, z: BitString) -> Result<BitString> {
    for other in [y, z] {
        if other.width != x.width {
            return Err(Error::WidthMismatch { left: x.width(), right: other.width() });
        }
    }
    Ok(BitString { bits: maj_word(x.bits, y.bits, z.bits), width: x.width })
}

fn check_width(width: u32) -> Result<()> {
    if (1..=64).contains(&width) {
        Ok(())
    } else {
        Err(Error::InvalidWidth(width))
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// Most significant bit first, like a binary literal.
impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.width as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_widths_and_values() {
        assert_eq!(BitString::zeros(0), Err(Error::InvalidWidth(0)));
        assert_eq!(BitString::zeros(65), Err(Error::InvalidWidth(65)));
        assert!(BitString::from_value(3, 8).is_err());
        assert!(BitString::from_value(64, u64::MAX).is_ok());
    }

    #[test]
    fn majority_examples() {
        let w = |v| BitString::from_value(3, v).unwrap();
        assert_eq!(bitwise_majority(w(7), w(7), w(7)).unwrap().value(), 7);
        assert_eq!(bitwise_majority(w(5), w(3), w(1)).unwrap().value(), 1);
        let wide = BitString::zeros(4).unwrap();
        assert!(matches!(
            bitwise_majority(w(1), wide, w(1)),
            Err(Error::WidthMismatch { left: 3, right: 4 })
        ));
    }

    #[test]
    fn slicing_and_concat() {
        let s = BitString::from_value(6, 0b101101).unwrap();
        assert_eq!(s.slice(0, 3).unwrap().value(), 0b101);
        assert_eq!(s.slice(3, 3).unwrap().value(), 0b101);
        assert!(s.slice(4, 3).is_err());
        let lo = BitString::from_value(2, 0b01).unwrap();
        let hi = BitString::from_value(1, 1).unwrap();
        let c = lo.concat(hi).unwrap();
        assert_eq!((c.width(), c.value()), (3, 0b101));
        assert_eq!(c.to_string(), "101");
        assert_eq!(c.with_bit(1, true).value(), 0b111);
        assert_eq!(BitString::from_bits(&[true, false, true]).unwrap(), c);
    }
}
