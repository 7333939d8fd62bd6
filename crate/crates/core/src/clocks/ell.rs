//! Message widths of the recursive clock hierarchy.

use crate::error::{invalid, Result};

/// Widths ℓ₁ > ℓ₂ > … > ℓ_τ = 3, with ℓ₁ = log₂ T and
/// ℓᵢ₊₁ = ⌈log₂ ℓᵢ⌉ + 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EllSequence {
    lengths: Vec<u32>,
}

/// ⌈log₂ x⌉ + 1.
pub fn shrink(x: u32) -> u32 {
    assert!(x > 0);
    (32 - (x - 1).leading_zeros()) + 1
}

impl EllSequence {
    /// The sequence for T = 2^`log2_t`. Values of at most 3 give the
    /// one-element sequence `[log2_t]`.
    pub fn for_log2(log2_t: u32) -> Result<Self> {
        if log2_t == 0 {
            return Err(invalid("T", "T >= 2", "log2(T) must be positive"));
        }
        let mut lengths = vec![log2_t];
        while let Some(&last) = lengths.last().filter(|&&l| l > 3) {
            lengths.push(shrink(last));
        }
        Ok(Self { lengths })
    }

    pub fn lengths(&self) -> &[u32] {
        &self.lengths
    }

    pub fn tau(&self) -> usize {
        self.lengths.len()
    }
}

/// The sequence for a power-of-two modulus.
pub fn ell_sequence(t: u64) -> Result<EllSequence> {
    if t < 2 || !t.is_power_of_two() {
        return Err(invalid("T", "power_of_two", format!("got {t}")));
    }
    EllSequence::for_log2(t.trailing_zeros())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(ell_sequence(8).unwrap().lengths(), &[3]);
        assert_eq!(ell_sequence(16).unwrap().lengths(), &[4, 3]);
        assert_eq!(ell_sequence(4).unwrap().lengths(), &[2]);
        assert_eq!(ell_sequence(1 << 16).unwrap().lengths(), &[16, 5, 4, 3]);
        assert!(ell_sequence(12).is_err());
    }

    #[test]
    fn shrink_values() {
        assert_eq!(shrink(4), 3);
        assert_eq!(shrink(5), 4);
        assert_eq!(shrink(8), 4);
        assert_eq!(shrink(9), 5);
        assert_eq!(shrink(128), 8);
    }
}
