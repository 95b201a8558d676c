//! Field-word primitives.
//!
//! A word of width `w` is viewed as `⌊w/f⌋` fields of `f` bits each, counted
//! from the least significant bit (field 0 is the lowest-order field). The
//! most significant bit of a field is its *top* bit; a field holding only its
//! top bit equals `2^(f-1)`. [`FieldLayout::v_mask`] has exactly every top
//! bit set.
//!
//! Every primitive here expects the `w mod f` residue bits (above the last
//! complete field) to be clear on input and leaves them clear on output.
//! All of them are pure functions; layouts are cheap immutable values that
//! callers precompute once.

use crate::error::Error;
use crate::word::{bit, bit_len, low_mask, shl_or_zero, Word};

/// Field geometry over a word plus its derived masks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldLayout<W> {
    f: u32,
    count: u32,
    v_mask: W,
    full_mask: W,
}

impl<W: Word> FieldLayout<W> {
    /// A layout of `f`-bit fields. Fails unless `1 <= f <= w`.
    pub fn new(f: u32) -> Result<Self, Error> {
        if f == 0 || f > W::BITS {
            return Err(Error::InvalidLayout { f, w: W::BITS });
        }
        let count = W::BITS / f;
        let mut v = W::ZERO;
        for i in 1..=count {
            v = v | bit(i * f - 1);
        }
        Ok(FieldLayout {
            f,
            count,
            v_mask: v,
            full_mask: low_mask(count * f),
        })
    }

    pub fn field_bits(&self) -> u32 {
        self.f
    }

    /// Number of complete fields.
    pub fn field_count(&self) -> u32 {
        self.count
    }

    /// Mask with the top bit of every complete field set.
    pub fn v_mask(&self) -> W {
        self.v_mask
    }

    /// Mask covering all complete fields (residue bits clear).
    pub fn full_mask(&self) -> W {
        self.full_mask
    }

    /// Value of 0-based field `i`.
    pub fn get(&self, a: W, i: u32) -> u128 {
        debug_assert!(i < self.count);
        let mask = if self.f >= 128 {
            u128::MAX
        } else {
            (1u128 << self.f) - 1
        };
        a.shr(i * self.f).to_u128() & mask
    }
}

/// The mask `V_f`: top bit of every complete `f`-bit field.
pub fn make_v_mask<W: Word>(f: u32) -> Result<W, Error> {
    FieldLayout::<W>::new(f).map(|l| l.v_mask)
}

/// Find non-zero fields: field `i` of the result is `2^(f-1)` if field `i`
/// of `a` is non-zero and `0` otherwise.
///
/// Three steps: strip the top bits, subtract the remainder from `V_f` (the
/// borrow clears a top bit exactly where the low part was non-zero), then
/// fold the stripped top bits back in.
#[inline]
pub fn fnf<W: Word>(a: W, lay: FieldLayout<W>) -> W {
    let v = lay.v_mask;
    let w = a & !v;
    let x = v.wrapping_sub(w);
    (!x | a) & v
}

/// Sideways addition (popcount) of the whole word.
#[inline]
pub fn sa<W: Word>(a: W) -> u32 {
    a.count_ones()
}

/// Index of the most significant set bit, or `None` for zero.
#[inline]
pub fn highest_set_bit<W: Word>(a: W) -> Option<u32> {
    if a == W::ZERO {
        None
    } else {
        Some(W::BITS - 1 - a.leading_zeros())
    }
}

/// Core of `pmin`: flags fields where `a[i] <= b[i]`, using an explicit
/// top-bit mask instead of a regular layout.
///
/// Works for any set of disjoint `f`-bit fields whose top bits are `tops`,
/// provided the bits between fields are zero in both inputs: the subtraction
/// in step 2 cannot borrow out of a field because `b | tops` keeps every
/// field at least `2^(f-1)` while the stripped `a` stays below it.
#[inline]
pub(crate) fn pmin_with_tops<W: Word>(a: W, b: W, tops: W) -> W {
    let ta = a & tops;
    let tb = b & tops;
    let a_low = a & !tops;
    let diff = (b | tops).wrapping_sub(a_low);
    let h1 = !ta & tb;
    let h2 = diff & (ta ^ tb ^ tops);
    (h1 | h2) & tops
}

/// Parallel minima test: field `i` of the result is `2^(f-1)` if
/// `a[i] <= b[i]` (unsigned) and `0` otherwise.
#[inline]
pub fn pmin<W: Word>(a: W, b: W, lay: FieldLayout<W>) -> W {
    pmin_with_tops(a, b, lay.v_mask)
}

/// Parallel maxima test: flags fields with `a[i] >= b[i]`.
#[inline]
pub fn pmax<W: Word>(a: W, b: W, lay: FieldLayout<W>) -> W {
    pmin_with_tops(b, a, lay.v_mask)
}

/// Expand per-field top-bit flags into full-field masks.
#[inline]
pub(crate) fn spread_tops<W: Word>(flags: W, f: u32) -> W {
    flags.wrapping_sub(flags.shr(f - 1)) | flags
}

/// Parallel value minimum: field `i` of the result is `min(a[i], b[i])`.
#[inline]
pub fn pvmin<W: Word>(a: W, b: W, lay: FieldLayout<W>) -> W {
    let le = pmin(a, b, lay);
    let m = spread_tops(le, lay.f);
    ((a & m) | (b & !m)) & lay.full_mask
}

/// Parallel value maximum: field `i` of the result is `max(a[i], b[i])`.
#[inline]
pub fn pvmax<W: Word>(a: W, b: W, lay: FieldLayout<W>) -> W {
    let le = pmin(a, b, lay);
    let m = spread_tops(le, lay.f);
    ((b & m) | (a & !m)) & lay.full_mask
}

/// Interleave: field `i` of the result is `a[i]` when `z[i] = 0` and `b[i]`
/// otherwise.
#[inline]
pub fn interleave<W: Word>(a: W, b: W, z: W, lay: FieldLayout<W>) -> W {
    let zf = fnf(z, lay);
    let m = spread_tops(zf, lay.f);
    ((a & !m) | (b & m)) & lay.full_mask
}

/// Saturating doubling-step sums over fields spaced `stride_bits` apart.
///
/// `values` holds one addend per field, aligned to the field base; `tops` has
/// the top bit of every participating field (the fields need not tile the
/// word regularly, but `stride_bits` must map field positions onto field
/// positions). Each of the `log2(b)` steps masks the top bits out of both
/// addends, adds, and ORs the top bits back in, shifted copy included. A top
/// bit is therefore sticky: once a partial sum reaches `2^(f-1)` the field
/// keeps a value `>= 2^(f-1)` even though its low bits are no longer exact.
#[inline]
pub(crate) fn ibsa_with_tops<W: Word>(values: W, tops: W, stride_bits: u32, b: u32) -> W {
    debug_assert!(b.is_power_of_two());
    let mut x = values;
    let mut shift = stride_bits;
    for _ in 0..b.trailing_zeros() {
        let sticky = x & tops;
        let lo = x & !tops;
        let incoming = shl_or_zero(x, shift);
        x = lo.wrapping_add(incoming & !tops) | sticky | shl_or_zero(sticky, shift);
        shift = shift.saturating_mul(2);
    }
    x
}

/// Interleaved blockwise sideways addition.
///
/// Input fields may only hold their top bit. Field `i` of the result sums
/// the flags of fields `i, i-g, i-2g, ...` (up to `b` of them); sums below
/// `2^(f-1)` are exact, sums at or above it come back as some value
/// `>= 2^(f-1)`.
pub fn ibsa<W: Word>(a: W, lay: FieldLayout<W>, stride_g: u32, b: u32) -> Result<W, Error> {
    if !b.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "ibsa block size {b} is not a power of two"
        )));
    }
    if stride_g == 0 {
        return Err(Error::InvalidArgument("ibsa stride must be positive".into()));
    }
    debug_assert!(a & !lay.v_mask == W::ZERO, "ibsa input must be top bits only");
    let x = a.shr(lay.f - 1);
    Ok(ibsa_with_tops(x, lay.v_mask, stride_g * lay.f, b) & lay.full_mask)
}

/// Prefix-sum strategy used by [`BsaPlan`] after the widening phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BsaPath {
    /// One multiplication by `...0^(rf-1) 1 0^(rf-1) 1`.
    MulPrefix,
    /// `log` shift-and-add steps; no multiplication anywhere.
    ShiftAddPrefix,
}

/// Precomputed constants for blockwise sideways addition at a fixed layout,
/// block size `b` and accumulator width `r` (both in fields, both powers of
/// two).
///
/// The widening phase merges adjacent fields until they are `min(b, r)·f`
/// bits wide. If `r <= b`, a word-wide prefix sum followed by one shifted
/// subtraction turns running totals back into per-block counts, and the last
/// accumulator of each block is moved to the block base. Both prefix paths
/// produce bit-identical results.
#[derive(Clone, Debug)]
pub struct BsaPlan<W> {
    f: u32,
    bf: u32,
    rf: u32,
    widen: Vec<(u32, W)>,
    prefix: bool,
    mul: W,
    prefix_shifts: Vec<u32>,
    end_mask: W,
    out_mask: W,
    path: BsaPath,
}

impl<W: Word> BsaPlan<W> {
    /// Plan for blocks of `b` fields. `r_fields` defaults to the smallest
    /// power of two whose `r·f` bits can hold a full-word popcount; callers
    /// accumulating multi-bit values must pass a larger `r` sized for their
    /// maximum field value.
    pub fn new(
        lay: FieldLayout<W>,
        b: u32,
        r_fields: Option<u32>,
        path: BsaPath,
    ) -> Result<Self, Error> {
        let f = lay.f;
        if !b.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "bsa block size {b} is not a power of two"
            )));
        }
        if b * f > W::BITS {
            return Err(Error::InvalidArgument(format!(
                "bsa block of {b} fields x {f} bits exceeds the {}-bit word",
                W::BITS
            )));
        }
        let r_min = min_r_fields::<W>(f, 1);
        let r = match r_fields {
            None => r_min,
            Some(r) => {
                if !r.is_power_of_two() || r < r_min {
                    return Err(Error::InvalidArgument(format!(
                        "bsa accumulator width {r} must be a power of two >= {r_min}"
                    )));
                }
                r
            }
        };

        let bf = b * f;
        let rf = r * f;
        let widen_to = b.min(r);
        let mut widen = Vec::new();
        let mut l = f;
        for _ in 0..widen_to.trailing_zeros() {
            widen.push((l, tile_low_bits::<W>(l, 2 * l)));
            l *= 2;
        }

        let prefix = r <= b;
        let (mut mul, mut end_mask, mut prefix_shifts) = (W::ZERO, W::ZERO, Vec::new());
        if prefix {
            // r <= b means rf <= bf <= w, so all constants fit the word.
            let mut i = 0;
            while (i + 1) * rf <= W::BITS {
                mul = mul | bit(i * rf);
                i += 1;
            }
            let mut blk = 0;
            while (blk + 1) * bf <= W::BITS {
                end_mask = end_mask | low_mask::<W>(rf).shl(blk * bf + bf - rf);
                blk += 1;
            }
            let mut s = rf;
            while s < W::BITS {
                prefix_shifts.push(s);
                s *= 2;
            }
        }

        Ok(BsaPlan {
            f,
            bf,
            rf,
            widen,
            prefix,
            mul,
            prefix_shifts,
            end_mask,
            out_mask: low_mask((W::BITS / bf) * bf),
            path,
        })
    }

    /// Per-block popcount of top bits: input fields may only hold their top
    /// bit; result field `i` (of `b·f` bits) holds the exact count for the
    /// block of `b` fields ending at field `(i+1)·b`.
    #[inline]
    pub fn run(&self, a: W) -> W {
        self.run_values(a.shr(self.f - 1))
    }

    /// Per-block exact sums of base-aligned field values. The caller must
    /// have sized `r` so that neither the widened fields nor the word-wide
    /// prefix totals can overflow.
    #[inline]
    pub fn run_values(&self, x0: W) -> W {
        let mut x = x0;
        for &(l, mask) in &self.widen {
            x = (x & mask).wrapping_add(x.shr(l) & mask);
        }
        if self.prefix {
            x = match self.path {
                BsaPath::MulPrefix => x.wrapping_mul(self.mul),
                BsaPath::ShiftAddPrefix => {
                    let mut y = x;
                    for &s in &self.prefix_shifts {
                        y = y.wrapping_add(y.shl(s));
                    }
                    y
                }
            };
            x = x.wrapping_sub(shl_or_zero(x, self.bf));
            x = (x & self.end_mask).shr(self.bf - self.rf);
        }
        x & self.out_mask
    }
}

/// Blockwise sideways addition: result is a `(b·f)`-field word whose field
/// `i` counts the set top bits in the block of `b` `f`-bit fields of `a`
/// ending at field `(i+1)·b`. No saturation.
pub fn bsa<W: Word>(
    a: W,
    lay: FieldLayout<W>,
    b: u32,
    r_fields: Option<u32>,
    path: BsaPath,
) -> Result<W, Error> {
    debug_assert!(a & !lay.v_mask == W::ZERO, "bsa input must be top bits only");
    Ok(BsaPlan::new(lay, b, r_fields, path)?.run(a))
}

/// Smallest power-of-two field count `r` such that `r·f` bits can hold the
/// largest possible whole-word sum of fields no greater than `max_value`.
pub(crate) fn min_r_fields<W: Word>(f: u32, max_value: u128) -> u32 {
    let need = bit_len(W::BITS as u128 * max_value.max(1));
    (need.div_ceil(f)).next_power_of_two()
}

/// Mask keeping the low `l` bits of every `period`-bit group.
fn tile_low_bits<W: Word>(l: u32, period: u32) -> W {
    let mut t = low_mask::<W>(l);
    let mut span = period;
    while span < W::BITS {
        t = t | t.shl(span);
        span = span.saturating_mul(2);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lay<W: Word>(f: u32) -> FieldLayout<W> {
        FieldLayout::new(f).unwrap()
    }

    #[test]
    fn v_mask_values() {
        assert_eq!(make_v_mask::<u16>(2).unwrap(), 0xAAAA);
        assert_eq!(make_v_mask::<u16>(16).unwrap(), 0x8000);
        assert_eq!(make_v_mask::<u16>(8).unwrap(), 0x8080);
        // Residue bits stay clear when f does not divide w.
        assert_eq!(make_v_mask::<u16>(3).unwrap(), 0b0100_1001_0010_0100);
    }

    #[test]
    fn v_mask_rejects_bad_layouts() {
        assert!(make_v_mask::<u16>(0).is_err());
        assert!(make_v_mask::<u16>(17).is_err());
        assert!(make_v_mask::<u128>(128).is_ok());
    }

    #[test]
    fn fnf_known_words() {
        // Two-bit fields: 0x08D0 has non-zero fields exactly where 0x08A0
        // has top bits.
        assert_eq!(fnf(0x08D0u16, lay(2)), 0x08A0);
        assert_eq!(fnf(0u16, lay(2)), 0);
        assert_eq!(fnf(0u16, lay(5)), 0);
        // f = 1: every bit is its own field top, fnf is the identity.
        assert_eq!(fnf(0xBEEFu16, lay(1)), 0xBEEF);
    }

    #[test]
    fn fnf_matches_field_oracle() {
        let mut state = 0x2545F4914F6CDD1Du64;
        for f in [1u32, 2, 4, 8] {
            let l = lay::<u64>(f);
            for _ in 0..2000 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let a = state & l.full_mask();
                let got = fnf(a, l);
                for i in 0..l.field_count() {
                    let expect = if l.get(a, i) != 0 { 1u128 << (f - 1) } else { 0 };
                    assert_eq!(l.get(got, i), expect, "a={a:#x} f={f} i={i}");
                }
                assert_eq!(fnf(got, l), got, "fnf must be idempotent on flags");
            }
        }
    }

    #[test]
    fn sa_examples() {
        assert_eq!(sa(0u16), 0);
        assert_eq!(sa(u16::MAX), 16);
        assert_eq!(sa(0x08A0u16), 3);
    }

    #[test]
    fn highest_set_bit_examples() {
        assert_eq!(highest_set_bit(0x8000u16), Some(15));
        assert_eq!(highest_set_bit(0u16), None);
        assert_eq!(highest_set_bit(0x0102u16), Some(8));
        assert_eq!(highest_set_bit(1u128 << 127), Some(127));
    }

    #[test]
    fn pmin_known_words() {
        // 8-bit fields of 0x0102 vs 0x0101: only the upper field has x <= k.
        assert_eq!(pmin(0x0102u16, 0x0101, lay(8)), 0x8000);
        let l = lay::<u16>(4);
        assert_eq!(pmin(0x1234u16, 0x1234, l), l.v_mask());
        assert_eq!(pmax(0x1234u16, 0x1234, l), l.v_mask());
    }

    #[test]
    fn pmin_pmax_match_field_oracle() {
        let mut state = 0x9E3779B97F4A7C15u64;
        for f in [2u32, 4, 8] {
            let l = lay::<u64>(f);
            for _ in 0..2000 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let a = state & l.full_mask();
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let b = state & l.full_mask();
                let (mn, mx) = (pmin(a, b, l), pmax(a, b, l));
                let (vmn, vmx) = (pvmin(a, b, l), pvmax(a, b, l));
                for i in 0..l.field_count() {
                    let (x, y) = (l.get(a, i), l.get(b, i));
                    let top = 1u128 << (f - 1);
                    assert_eq!(l.get(mn, i), if x <= y { top } else { 0 });
                    assert_eq!(l.get(mx, i), if x >= y { top } else { 0 });
                    assert_eq!(l.get(vmn, i), x.min(y));
                    assert_eq!(l.get(vmx, i), x.max(y));
                }
                // Duality and the |a - b| identity.
                assert_eq!(mn | mx, l.v_mask());
                let dif = pvmax(a, b, l).wrapping_sub(pvmin(a, b, l));
                for i in 0..l.field_count() {
                    let (x, y) = (l.get(a, i), l.get(b, i));
                    assert_eq!(l.get(dif, i), x.max(y) - x.min(y));
                }
            }
        }
    }

    #[test]
    fn pvmin_idempotent() {
        let l = lay::<u32>(4);
        assert_eq!(pvmin(0xDEADBEEFu32, 0xDEADBEEF, l), 0xDEADBEEF);
        assert_eq!(pvmax(0xDEADBEEFu32, 0xDEADBEEF, l), 0xDEADBEEF);
    }

    #[test]
    fn interleave_selects_per_field() {
        let l = lay::<u16>(4);
        let (a, b) = (0x1234u16, 0xABCD);
        assert_eq!(interleave(a, b, 0, l), a);
        assert_eq!(interleave(a, b, l.v_mask(), l), b);
        // Selector non-zero in fields 0 and 2.
        let z = 0x0101u16;
        assert_eq!(interleave(a, b, z, l), 0x1B3D);
    }

    #[test]
    fn ibsa_spec_examples() {
        // Top bits of 2-bit fields 0, 2, 4 (0-based); stride 2 fields, b = 2.
        let l = lay::<u16>(2);
        let a = 0x0222u16;
        let got = ibsa(a, l, 2, 2).unwrap();
        let expect = [1u128, 0, 2, 0, 2, 0, 1, 0];
        for (i, &e) in expect.iter().enumerate() {
            let v = l.get(got, i as u32);
            if e < 2 {
                assert_eq!(v, e, "field {i}");
            } else {
                assert!(v >= 2, "field {i} should saturate, got {v}");
            }
        }
        assert_eq!(ibsa(0u16, l, 2, 2).unwrap(), 0);
        assert!(ibsa(0u16, l, 2, 3).is_err());
    }

    #[test]
    fn ibsa_saturating_oracle() {
        let mut state = 0xA076_1D64_78BD_642Fu64;
        for (f, g, b) in [(1u32, 1u32, 8u32), (2, 1, 4), (2, 2, 2), (4, 1, 4), (4, 2, 8)] {
            let l = lay::<u64>(f);
            for _ in 0..2000 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let a = state & l.v_mask();
                let got = ibsa(a, l, g, b).unwrap();
                for i in 0..l.field_count() {
                    let mut sum = 0u128;
                    for j in 0..b {
                        let Some(src) = i.checked_sub(j * g) else { break };
                        sum += l.get(a, src) >> (f - 1);
                    }
                    let v = l.get(got, i);
                    let cap = 1u128 << (f - 1);
                    if sum < cap {
                        assert_eq!(v, sum, "f={f} g={g} b={b} i={i} a={a:#x}");
                    } else {
                        assert!(v >= cap, "f={f} g={g} b={b} i={i} a={a:#x} v={v}");
                    }
                }
            }
        }
    }

    #[test]
    fn bsa_known_words() {
        let l = lay::<u16>(2);
        // Flags in fields 2, 4, 5 (0-based): blocks of 4 count 1 and 2.
        let got = bsa(0x08A0u16, l, 4, None, BsaPath::MulPrefix).unwrap();
        assert_eq!(got, 0x0201);
        let l4 = lay::<u16>(4);
        let got = bsa(l4.v_mask(), l4, 2, None, BsaPath::MulPrefix).unwrap();
        assert_eq!(got, 0x0202);
    }

    #[test]
    fn bsa_paths_agree_and_match_oracle() {
        let mut state = 0xD1B5_4A32_D192_ED03u64;
        for f in [1u32, 2, 4] {
            let l = lay::<u64>(f);
            let mut b = 1u32;
            while b * f <= 64 {
                for _ in 0..500 {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    let a = state & l.v_mask();
                    let mul = bsa(a, l, b, None, BsaPath::MulPrefix).unwrap();
                    let add = bsa(a, l, b, None, BsaPath::ShiftAddPrefix).unwrap();
                    assert_eq!(mul, add, "paths diverge: f={f} b={b} a={a:#x}");
                    let out = lay::<u64>(b * f);
                    let mut total = 0u128;
                    for blk in 0..out.field_count() {
                        let mut cnt = 0u128;
                        for t in 0..b {
                            cnt += l.get(a, blk * b + t) >> (f - 1);
                        }
                        assert_eq!(out.get(mul, blk), cnt, "f={f} b={b} blk={blk}");
                        total += cnt;
                    }
                    assert_eq!(total, u128::from(sa(a & l.v_mask() & out.full_mask())));
                }
                b *= 2;
            }
        }
    }

    #[test]
    fn bsa_rejects_bad_blocks() {
        let l = lay::<u16>(4);
        assert!(bsa(0u16, l, 3, None, BsaPath::MulPrefix).is_err());
        assert!(bsa(0u16, l, 8, None, BsaPath::MulPrefix).is_err());
        assert!(bsa(0u16, l, 2, Some(3), BsaPath::MulPrefix).is_err());
    }

    #[test]
    fn results_agree_across_widths() {
        // Zero-extending the input must not change the low fields.
        let mut state = 0x8000_0000_0000_0001u64;
        for f in [1u32, 2, 4, 8] {
            let l16 = lay::<u16>(f);
            let l64 = lay::<u64>(f);
            for _ in 0..500 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let a16 = (state as u16) & l16.full_mask();
                let b16 = ((state >> 16) as u16) & l16.full_mask();
                let (a64, b64) = (a16 as u64, b16 as u64);
                assert_eq!(fnf(a64, l64) as u16, fnf(a16, l16));
                assert_eq!(pmin(a64, b64, l64) as u16, pmin(a16, b16, l16));
                assert_eq!(pvmin(a64, b64, l64) as u16, pvmin(a16, b16, l16));
                let t16 = a16 & l16.v_mask();
                let b_blk = 16 / f;
                let s16 = bsa(t16, l16, b_blk, None, BsaPath::MulPrefix).unwrap();
                let s64 = bsa(t16 as u64, l64, b_blk, None, BsaPath::MulPrefix).unwrap();
                assert_eq!(s64 as u16, s16, "f={f} a={t16:#x}");
            }
        }
    }
}
