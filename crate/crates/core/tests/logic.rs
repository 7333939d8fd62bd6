use proptest::prelude::*;
use tinypull_core::consensus::maj_consensus_update;
use tinypull_core::dissemination::{certify, parity_display};
use tinypull_core::{bitwise_majority, maj3, BitString, Error};

fn brute_maj(a: bool, b: bool, c: bool) -> bool {
    [a, b, c].iter().filter(|&&x| x).count() >= 2
}

#[test]
fn maj3_truth_table() {
    for x in 0..8u8 {
        let (a, b, c) = (x & 1 == 1, x & 2 == 2, x & 4 == 4);
        assert_eq!(maj3(a, b, c), brute_maj(a, b, c), "{a} {b} {c}");
    }
}

#[test]
fn bitwise_majority_exhaustive_small_widths() {
    for w in 1..=5u32 {
        let top = 1u64 << w;
        for x in 0..top {
            for y in 0..top {
                for z in 0..top {
                    let got = bitwise_majority(
                        BitString::from_value(w, x).unwrap(),
                        BitString::from_value(w, y).unwrap(),
                        BitString::from_value(w, z).unwrap(),
                    )
                    .unwrap();
                    for i in 0..w {
                        let bit = |v: u64| (v >> i) & 1 == 1;
                        assert_eq!(got.bit(i), brute_maj(bit(x), bit(y), bit(z)));
                    }
                    assert_eq!(got.width(), w);
                }
            }
        }
    }
}

#[test]
fn width_mismatch_is_an_error() {
    let a = BitString::zeros(3).unwrap();
    let b = BitString::zeros(4).unwrap();
    assert!(matches!(bitwise_majority(a, a, b), Err(Error::WidthMismatch { .. })));
}

#[test]
fn parity_certification_is_sound() {
    for speaking in [false, true] {
        for b1 in [false, true] {
            for odd in [false, true] {
                let shown = parity_display(speaking, b1, odd);
                if let Some(b) = certify(shown, odd) {
                    assert!(speaking && b1 == b, "speaking={speaking} b1={b1} odd={odd}");
                }
                if speaking && b1 == !odd {
                    assert_eq!(certify(shown, odd), Some(b1), "speaker must be heard on its parity");
                }
            }
        }
    }
}

#[test]
fn parity_examples() {
    assert!(!parity_display(true, false, true));
    assert!(parity_display(false, false, true));
    assert!(!parity_display(false, true, false));
    assert!(parity_display(true, true, false));
}

#[test]
fn consensus_update_is_majority() {
    for x in 0..8u8 {
        let (a, b, c) = (x & 1 == 1, x & 2 == 2, x & 4 == 4);
        assert_eq!(maj_consensus_update(a, [b, c]), brute_maj(a, b, c));
    }
}

proptest! {
    #[test]
    fn maj3_is_symmetric(a: bool, b: bool, c: bool) {
        let m = maj3(a, b, c);
        prop_assert_eq!(m, maj3(b, a, c));
        prop_assert_eq!(m, maj3(c, b, a));
        prop_assert_eq!(m, maj3(a, c, b));
    }

    #[test]
    fn bitwise_majority_wide(w in 1u32..=64, x: u64, y: u64, z: u64) {
        let s = |v| BitString::truncating(w, v);
        let got = bitwise_majority(s(x), s(y), s(z)).unwrap();
        let mask = if w == 64 { u64::MAX } else { (1 << w) - 1 };
        prop_assert_eq!(got.value(), ((x & y) | (x & z) | (y & z)) & mask);
        prop_assert_eq!(got, bitwise_majority(s(z), s(x), s(y)).unwrap());
    }

    #[test]
    fn concat_then_slice_round_trips(lw in 1u32..32, hw in 1u32..32, lo: u64, hi: u64) {
        let (l, h) = (BitString::truncating(lw, lo), BitString::truncating(hw, hi));
        let c = l.concat(h).unwrap();
        prop_assert_eq!(c.width(), lw + hw);
        prop_assert_eq!(c.slice(0, lw).unwrap(), l);
        prop_assert_eq!(c.slice(lw, hw).unwrap(), h);
    }
}
