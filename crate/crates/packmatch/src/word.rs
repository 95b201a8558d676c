//! The simulated machine word.
//!
//! Every algorithm in this crate is generic over [`Word`], so the same code
//! runs at 16, 32, 64 and 128 bits. The 16-bit width exists mainly for
//! exhaustive testing and the built-in self test; 64 is the practical
//! default.

use core::fmt;
use core::hash::Hash;
use core::ops::{BitAnd, BitOr, BitXor, Not};

/// An unsigned machine word of width `BITS`.
///
/// Arithmetic wraps modulo `2^BITS`. Shift amounts must be smaller than the
/// width: shifting by `BITS` or more is a programming error and panics, it is
/// never silently masked. Use [`shl_or_zero`] / [`shr_or_zero`] where a full
/// shift legitimately means "everything falls off".
pub trait Word:
    Copy
    + Eq
    + Ord
    + Hash
    + fmt::Debug
    + fmt::LowerHex
    + fmt::Binary
    + Send
    + Sync
    + BitAnd<Output = Self>
    + BitOr<Output = Self>
    + BitXor<Output = Self>
    + Not<Output = Self>
    + 'static
{
    const BITS: u32;
    const ZERO: Self;
    const ONE: Self;
    const MAX: Self;

    fn wrapping_add(self, rhs: Self) -> Self;
    fn wrapping_sub(self, rhs: Self) -> Self;
    fn wrapping_mul(self, rhs: Self) -> Self;
    fn shl(self, n: u32) -> Self;
    fn shr(self, n: u32) -> Self;
    fn count_ones(self) -> u32;
    fn leading_zeros(self) -> u32;
    fn from_u128(v: u128) -> Self;
    fn to_u128(self) -> u128;
}

macro_rules! impl_word {
    ($($ty:ty),+) => {$(
        impl Word for $ty {
            const BITS: u32 = <$ty>::BITS;
            const ZERO: Self = 0;
            const ONE: Self = 1;
            const MAX: Self = <$ty>::MAX;

            #[inline(always)]
            fn wrapping_add(self, rhs: Self) -> Self {
                <$ty>::wrapping_add(self, rhs)
            }
            #[inline(always)]
            fn wrapping_sub(self, rhs: Self) -> Self {
                <$ty>::wrapping_sub(self, rhs)
            }
            #[inline(always)]
            fn wrapping_mul(self, rhs: Self) -> Self {
                <$ty>::wrapping_mul(self, rhs)
            }
            #[inline(always)]
            fn shl(self, n: u32) -> Self {
                assert!(n < Self::BITS, "shift by {n} on a {}-bit word", Self::BITS);
                self << n
            }
            #[inline(always)]
            fn shr(self, n: u32) -> Self {
                assert!(n < Self::BITS, "shift by {n} on a {}-bit word", Self::BITS);
                self >> n
            }
            #[inline(always)]
            fn count_ones(self) -> u32 {
                <$ty>::count_ones(self)
            }
            #[inline(always)]
            fn leading_zeros(self) -> u32 {
                <$ty>::leading_zeros(self)
            }
            #[inline(always)]
            fn from_u128(v: u128) -> Self {
                v as $ty
            }
            #[inline(always)]
            fn to_u128(self) -> u128 {
                self as u128
            }
        }
    )+};
}

impl_word!(u16, u32, u64, u128);

/// `a << n`, yielding zero once the shift reaches the word width.
#[inline(always)]
pub fn shl_or_zero<W: Word>(a: W, n: u32) -> W {
    if n >= W::BITS {
        W::ZERO
    } else {
        a.shl(n)
    }
}

/// `a >> n`, yielding zero once the shift reaches the word width.
#[inline(always)]
pub fn shr_or_zero<W: Word>(a: W, n: u32) -> W {
    if n >= W::BITS {
        W::ZERO
    } else {
        a.shr(n)
    }
}

/// Mask with the lowest `n` bits set; `n` may equal the word width.
#[inline(always)]
pub fn low_mask<W: Word>(n: u32) -> W {
    if n == 0 {
        W::ZERO
    } else if n >= W::BITS {
        W::MAX
    } else {
        W::ONE.shl(n).wrapping_sub(W::ONE)
    }
}

/// Word with only bit `i` set.
#[inline(always)]
pub fn bit<W: Word>(i: u32) -> W {
    W::ONE.shl(i)
}

/// Number of bits needed to represent `x` (0 for 0).
#[inline]
pub fn bit_len(x: u128) -> u32 {
    128 - x.leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_mask_boundaries() {
        assert_eq!(low_mask::<u16>(0), 0);
        assert_eq!(low_mask::<u16>(5), 0x1F);
        assert_eq!(low_mask::<u16>(16), u16::MAX);
        assert_eq!(low_mask::<u128>(128), u128::MAX);
    }

    #[test]
    fn shl_or_zero_saturates() {
        assert_eq!(shl_or_zero(1u16, 15), 0x8000);
        assert_eq!(shl_or_zero(1u16, 16), 0);
        assert_eq!(shl_or_zero(1u16, 40), 0);
    }

    #[test]
    #[should_panic(expected = "shift by 16")]
    fn full_shift_panics() {
        let _ = 1u16.shl(16);
    }

    #[test]
    fn bit_len_examples() {
        assert_eq!(bit_len(0), 0);
        assert_eq!(bit_len(1), 1);
        assert_eq!(bit_len(16), 5);
        assert_eq!(bit_len(64), 7);
        assert_eq!(bit_len(128), 8);
    }
}
