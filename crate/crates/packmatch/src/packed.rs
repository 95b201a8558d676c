//! Packed texts, window extraction and pattern templates.
//!
//! A text over an alphabet of size `sigma` is stored `log2(sigma)` bits per
//! character as one continuous little-endian bit stream: character `j`
//! occupies bits `[j*log_sigma, (j+1)*log_sigma)` of the stream, and stream
//! bit `i` is bit `i mod w` of buffer word `i / w`. A word therefore holds
//! `alpha = floor(w / log_sigma)` whole characters when `log_sigma` divides
//! `w`, and the stream layout stays well defined when it does not.
//!
//! Searching a short pattern processes `ell` text windows per machine word:
//! the pattern is replicated `ell` times in a template word `A`, each copy
//! padded to a lane of `m_bar` character fields, and window words `B` are
//! extracted from the packed text with the lane padding masked to zero.

use crate::bitword::{BsaPath, BsaPlan, FieldLayout};
use crate::error::Error;
use crate::word::{bit, low_mask, shl_or_zero, Word};

/// Alphabet geometry: size (a power of two) and bits per character.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Alphabet {
    sigma: u32,
    log_sigma: u32,
}

impl Alphabet {
    /// Alphabet of at least `sigma` symbols, rounded up to a power of two.
    /// Sizes below 2 are rounded up to 2; the limit is 2^16.
    pub fn new(sigma: u32) -> Result<Self, Error> {
        if sigma > 1 << 16 {
            return Err(Error::InvalidArgument(format!(
                "alphabet size {sigma} exceeds the 2^16 limit"
            )));
        }
        let sigma = sigma.max(2).next_power_of_two();
        Ok(Alphabet {
            sigma,
            log_sigma: sigma.trailing_zeros(),
        })
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    pub fn log_sigma(&self) -> u32 {
        self.log_sigma
    }

    /// Characters per `w`-bit word.
    pub fn alpha(&self, w_bits: u32) -> usize {
        (w_bits / self.log_sigma) as usize
    }
}

/// A packed text plus zeroed over-allocation so window reads never branch.
#[derive(Clone, Debug)]
pub struct PackedText<W> {
    n: usize,
    alphabet: Alphabet,
    over_alloc: usize,
    words: Vec<W>,
}

/// Packs `chars` with `over_alloc` characters of zero padding past the end.
pub fn pack_text<W: Word>(
    chars: &[u16],
    alphabet: Alphabet,
    over_alloc: usize,
) -> Result<PackedText<W>, Error> {
    for (index, &c) in chars.iter().enumerate() {
        if u32::from(c) >= alphabet.sigma {
            return Err(Error::Encoding {
                index,
                symbol: u32::from(c),
                sigma: alphabet.sigma,
            });
        }
    }
    let ls = alphabet.log_sigma;
    let total_bits = (chars.len() + over_alloc) * ls as usize;
    // One spare word so two-word window reads stay in bounds.
    let mut words = vec![W::ZERO; total_bits.div_ceil(W::BITS as usize) + 1];
    for (j, &c) in chars.iter().enumerate() {
        let bit_pos = j * ls as usize;
        let (wi, off) = (bit_pos / W::BITS as usize, (bit_pos % W::BITS as usize) as u32);
        let v = W::from_u128(u128::from(c));
        words[wi] = words[wi] | v.shl(off);
        if off + ls > W::BITS {
            words[wi + 1] = words[wi + 1] | v.shr(W::BITS - off);
        }
    }
    Ok(PackedText {
        n: chars.len(),
        alphabet,
        over_alloc,
        words,
    })
}

/// Decodes the live characters of a packed text.
pub fn decode_text<W: Word>(text: &PackedText<W>) -> Vec<u16> {
    (0..text.n).map(|j| text.get(j)).collect()
}

impl<W: Word> PackedText<W> {
    /// Packs with the default over-allocation of one word's worth of
    /// characters, enough for every short-pattern search at this width.
    pub fn pack(chars: &[u16], alphabet: Alphabet) -> Result<Self, Error> {
        pack_text(chars, alphabet, alphabet.alpha(W::BITS))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn over_alloc(&self) -> usize {
        self.over_alloc
    }

    pub(crate) fn words(&self) -> &[W] {
        &self.words
    }

    /// Character at position `j` (padding decodes to 0).
    pub fn get(&self, j: usize) -> u16 {
        assert!(j < self.n + self.over_alloc);
        let ls = self.alphabet.log_sigma;
        let bit_pos = j * ls as usize;
        let (wi, off) = (bit_pos / W::BITS as usize, (bit_pos % W::BITS as usize) as u32);
        let mut v = self.words[wi].shr(off).to_u128();
        if off + ls > W::BITS {
            v |= self.words[wi + 1].to_u128() << (W::BITS - off);
        }
        (v & ((1u128 << ls) - 1)) as u16
    }

    pub fn decode(&self) -> Vec<u16> {
        decode_text(self)
    }

    /// Serializes to the PKTX on-disk format. Over-allocation is not stored.
    pub fn to_pktx_bytes(&self) -> Vec<u8> {
        let ls = self.alphabet.log_sigma;
        let body_len = (self.n * ls as usize).div_ceil(8);
        let mut out = Vec::with_capacity(20 + body_len);
        out.extend_from_slice(b"PKTX");
        out.push(1);
        out.push(ls as u8);
        out.extend_from_slice(&[0u8; 6]);
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        for byte_idx in 0..body_len {
            let bit_pos = byte_idx * 8;
            let (wi, off) = (bit_pos / W::BITS as usize, (bit_pos % W::BITS as usize) as u32);
            out.push((self.words[wi].shr(off).to_u128() & 0xFF) as u8);
        }
        out
    }

    /// Parses the PKTX format, re-materializing the default over-allocation.
    pub fn from_pktx_bytes(bytes: &[u8]) -> Result<Self, Error> {
        if bytes.len() < 20 {
            return Err(Error::Format("file shorter than the 20-byte header".into()));
        }
        if &bytes[0..4] != b"PKTX" {
            return Err(Error::Format("bad magic".into()));
        }
        if bytes[4] != 1 {
            return Err(Error::Format(format!("unsupported version {}", bytes[4])));
        }
        let ls = u32::from(bytes[5]);
        if !(1..=16).contains(&ls) {
            return Err(Error::Format(format!("bad log_sigma {ls}")));
        }
        if bytes[6..12] != [0u8; 6] {
            return Err(Error::Format("reserved header bytes must be zero".into()));
        }
        let n = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let body = &bytes[20..];
        let body_len = (n * ls as usize).div_ceil(8);
        if body.len() != body_len {
            return Err(Error::Format(format!(
                "body is {} bytes, expected {body_len}",
                body.len()
            )));
        }
        // Unused high bits of the final byte must be zero.
        let live_bits = n * ls as usize;
        if body_len > 0 {
            let spare = body_len * 8 - live_bits;
            if spare > 0 && body[body_len - 1] >> (8 - spare) != 0 {
                return Err(Error::Format("trailing bits of final byte not zero".into()));
            }
        }
        let alphabet = Alphabet::new(1u32 << ls)?;
        let over_alloc = alphabet.alpha(W::BITS);
        let total_bits = (n + over_alloc) * ls as usize;
        let mut words = vec![W::ZERO; total_bits.div_ceil(W::BITS as usize) + 1];
        for (i, &b) in body.iter().enumerate() {
            let bit_pos = i * 8;
            let (wi, off) = (bit_pos / W::BITS as usize, (bit_pos % W::BITS as usize) as u32);
            words[wi] = words[wi] | W::from_u128(u128::from(b)).shl(off);
        }
        Ok(PackedText {
            n,
            alphabet,
            over_alloc,
            words,
        })
    }
}

/// `w` bits of the packed stream starting at `bit_pos`, combined from at
/// most two adjacent buffer words.
#[inline(always)]
pub(crate) fn extract_word_at_bit<W: Word>(words: &[W], bit_pos: usize) -> W {
    let wi = bit_pos / W::BITS as usize;
    let off = (bit_pos % W::BITS as usize) as u32;
    words[wi].shr(off) | shl_or_zero(words[wi + 1], W::BITS - off)
}

/// Extracts the window word for base position `j`: lane `s` holds
/// `T[j + s*m_bar .. j + s*m_bar + m - 1]` with the `m_bar - m` padding
/// fields of every lane cleared.
pub fn extract_window<W: Word>(
    text: &PackedText<W>,
    j: usize,
    lanes: usize,
    m_bar: usize,
    m: usize,
) -> Result<W, Error> {
    if j + (lanes - 1) * m_bar + m > text.n + text.over_alloc {
        return Err(Error::OutOfBounds {
            j,
            n: text.n,
            over_alloc: text.over_alloc,
        });
    }
    let ls = text.alphabet.log_sigma;
    let mask = window_mask::<W>(lanes, m_bar, m, ls);
    Ok(extract_word_at_bit(&text.words, j * ls as usize) & mask)
}

/// Mask covering the `m` live character fields of each of `lanes` lanes.
fn window_mask<W: Word>(lanes: usize, m_bar: usize, m: usize, log_sigma: u32) -> W {
    let lane = low_mask::<W>(m as u32 * log_sigma);
    let mut mask = W::ZERO;
    for s in 0..lanes {
        mask = mask | lane.shl((s * m_bar) as u32 * log_sigma);
    }
    mask
}

/// Base positions to scan so that the lane starts `{j + s*m_bar}` cover
/// every window start in `[0, n - m]` exactly once. Lanes that land past
/// `n - m` are filtered at report time.
pub fn window_schedule(
    n: usize,
    m: usize,
    m_bar: usize,
    ell: usize,
) -> impl Iterator<Item = usize> {
    let last = (n >= m && m > 0).then(|| n - m);
    (0usize..)
        .map(move |i| ell * (i / m_bar) * m_bar + (i % m_bar))
        .take_while(move |&j| last.is_some_and(|l| j <= l))
}

/// Which search algorithm runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Pick per the dispatch rule.
    Auto,
    /// Exact per-lane mismatch counts via blockwise sideways addition.
    Blockwise,
    /// Flag compaction with deferred, saturating counting.
    Compacted,
    /// Kernighan-style loop with a sentinel bit per lane; O(k) per word.
    Sentinel,
    /// Sentinel twin that counts matches instead of mismatches.
    SentinelComatch,
    /// Word-at-a-time Hamming distance for patterns of any length.
    Long,
}

/// Per-position tolerance for the difference-based models.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Deltas {
    Uniform(u16),
    PerPosition(Vec<u16>),
}

impl Deltas {
    /// One tolerance per pattern position.
    pub fn resolve(&self, m: usize) -> Result<Vec<u16>, Error> {
        match self {
            Deltas::Uniform(d) => Ok(vec![*d; m]),
            Deltas::PerPosition(v) => {
                if v.len() != m {
                    return Err(Error::LengthMismatch(v.len(), m));
                }
                Ok(v.clone())
            }
        }
    }
}

/// The matching model and its parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchModel {
    /// Hamming distance at most `k`.
    KMismatch { k: u32 },
    /// Hamming distance at most `k`, ignoring positions where either side
    /// is the wildcard symbol.
    KMismatchWildcard { k: u32, wildcard: u16 },
    /// At most `k` positions with `|t - p| > delta`.
    DeltaKMismatch { deltas: Deltas, k: u32 },
    /// Every position has `|t - p| <= delta`.
    DeltaExact { deltas: Deltas },
    /// Every position has `p <= t`.
    LessThan,
    /// Every position within `delta` and the differences sum to at most
    /// `gamma`.
    DeltaGamma { deltas: Deltas, gamma: u64 },
    /// At most `k` positions beyond `delta`, and the differences summed over
    /// the in-tolerance positions stay within `gamma` (or over all positions
    /// when `raw_sum` is set).
    DeltaKGamma {
        deltas: Deltas,
        k: u32,
        gamma: u64,
        raw_sum: bool,
    },
}

/// A model plus the variant to run it with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchSpec {
    pub model: MatchModel,
    pub variant: Variant,
}

impl MatchSpec {
    pub fn new(model: MatchModel) -> Self {
        MatchSpec {
            model,
            variant: Variant::Auto,
        }
    }

    pub fn kmismatch(k: u32) -> Self {
        Self::new(MatchModel::KMismatch { k })
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }
}

/// Deferred-counting constants for the compacted variants: `q` windows of
/// flags (or difference values) are packed `f` bits apart inside each
/// character slot of the accumulator word and counted together on flush.
///
/// When `f` does not divide `log_sigma` the `f`-bit fields do not tile the
/// word; the masks below pin the actual field positions: slot `c` (one per
/// character field of the live region) holds its `q` fields at bits
/// `c*log_sigma + d*f .. + f` for `d = 0..q`, with `log_sigma mod f` unused
/// bits at the top of the slot.
#[derive(Clone, Debug)]
pub struct CompactPlan<W> {
    pub(crate) f: u32,
    pub(crate) q: usize,
    /// Right shift turning per-window top-of-slot flags into top-of-field
    /// flags (`log_sigma - f`); value accumulation passes words through
    /// unshifted instead.
    pub(crate) norm_shift: u32,
    pub(crate) values: bool,
    pub(crate) top_mask: W,
    /// `end_prefix[t]` flags the sequence-end fields for ages `d < t`.
    pub(crate) end_prefix: Vec<W>,
    /// Threshold replicated at the base of every compacted field.
    pub(crate) thresh: W,
}

fn build_compact_plan<W: Word>(
    ell: usize,
    m_bar: usize,
    log_sigma: u32,
    f: u32,
    thresh: u64,
    values: bool,
) -> CompactPlan<W> {
    let q = (log_sigma / f) as usize;
    debug_assert!(q >= 1);
    debug_assert!(u128::from(thresh) < 1u128 << (f - 1));
    let live = ell * m_bar;
    let mut top_mask = W::ZERO;
    let mut thresh_word = W::ZERO;
    for c in 0..live {
        for d in 0..q {
            let base = (c as u32) * log_sigma + (d as u32) * f;
            top_mask = top_mask | bit(base + f - 1);
            thresh_word = thresh_word | W::from_u128(u128::from(thresh)).shl(base);
        }
    }
    let mut end_prefix = vec![W::ZERO; q + 1];
    for t in 1..=q {
        let mut m = end_prefix[t - 1];
        for lane in 0..ell {
            let base = ((lane + 1) * m_bar - 1) as u32 * log_sigma + (t as u32 - 1) * f;
            m = m | bit(base + f - 1);
        }
        end_prefix[t] = m;
    }
    CompactPlan {
        f,
        q,
        norm_shift: log_sigma - f,
        values,
        top_mask,
        end_prefix,
        thresh: thresh_word,
    }
}

/// Smallest power of two strictly greater than `x`.
pub(crate) fn pow2_above(x: u64) -> u64 {
    (x + 1).next_power_of_two()
}

/// Precomputed search state for one (pattern, model, variant) triple.
#[derive(Clone, Debug)]
pub struct PatternTemplate<W: Word> {
    pub(crate) m: usize,
    pub(crate) m_bar: usize,
    pub(crate) ell: usize,
    pub(crate) sigma: u32,
    pub(crate) log_sigma: u32,
    pub(crate) block_bits: u32,
    pub(crate) variant: Variant,
    pub(crate) char_layout: FieldLayout<W>,
    pub(crate) block_layout: FieldLayout<W>,
    /// `ell` pattern copies, lane padding zeroed.
    pub(crate) a: W,
    /// All bits of the live character fields of every lane.
    pub(crate) window_mask: W,
    /// Top bit of every character field in the contiguous live region
    /// (lane padding included).
    pub(crate) region_tops: W,
    /// Top bit of the live (non-padding) character fields only.
    pub(crate) live_char_tops: W,
    /// Top bit of each live lane block.
    pub(crate) lane_tops: W,
    pub(crate) k: u32,
    pub(crate) k_word: W,
    pub(crate) deltas: Vec<u16>,
    pub(crate) d_word: W,
    pub(crate) gamma: u64,
    pub(crate) g_word: W,
    /// The gamma bound cannot exclude anything; skip the sum check.
    pub(crate) gamma_vacuous: bool,
    /// Wildcard masks: pattern-side flags and the replicated wildcard word.
    pub(crate) wildcard: Option<(W, W)>,
    pub(crate) counts_plan: Option<BsaPlan<W>>,
    pub(crate) sums_plan: Option<BsaPlan<W>>,
    pub(crate) compact: Option<CompactPlan<W>>,
}

/// Compacted field width for counting up to `k` flags: one bit more than
/// the smallest power of two above `k`.
pub(crate) fn compact_field_bits(threshold: u64) -> u32 {
    pow2_above(threshold).trailing_zeros() + 1
}

impl<W: Word> PatternTemplate<W> {
    /// Builds the template words for `pattern` under `spec`. The variant
    /// must be concrete (not `Auto`); `matchers::search` resolves it.
    pub fn build(pattern: &[u16], alphabet: Alphabet, spec: &MatchSpec) -> Result<Self, Error> {
        let m = pattern.len();
        if m == 0 {
            return Err(Error::InvalidArgument("empty pattern".into()));
        }
        for (index, &c) in pattern.iter().enumerate() {
            if u32::from(c) >= alphabet.sigma() {
                return Err(Error::Encoding {
                    index,
                    symbol: u32::from(c),
                    sigma: alphabet.sigma(),
                });
            }
        }
        let ls = alphabet.log_sigma();
        let sigma = alphabet.sigma();
        let sentinel = matches!(spec.variant, Variant::Sentinel | Variant::SentinelComatch);
        let m_bar = if sentinel { m + 1 } else { m.next_power_of_two() };
        let block_bits = m_bar as u32 * ls;
        if u32::try_from(m_bar).is_err() || block_bits > W::BITS {
            let limit = lane_limit::<W>(ls, sentinel);
            return Err(Error::PatternTooLong {
                m,
                limit,
                w: W::BITS,
            });
        }
        let ell = (W::BITS / block_bits) as usize;
        let char_layout = FieldLayout::new(ls)?;
        let block_layout = FieldLayout::new(block_bits)?;

        let mut a = W::ZERO;
        for s in 0..ell {
            for (t, &c) in pattern.iter().enumerate() {
                a = a | W::from_u128(u128::from(c)).shl((s * m_bar + t) as u32 * ls);
            }
        }
        let window_mask = window_mask::<W>(ell, m_bar, m, ls);
        let region_tops = char_layout.v_mask() & low_mask((ell * m_bar) as u32 * ls);
        let live_char_tops = window_mask & char_layout.v_mask();
        let lane_tops = block_layout.v_mask() & low_mask(ell as u32 * block_bits);

        let mut tpl = PatternTemplate {
            m,
            m_bar,
            ell,
            sigma,
            log_sigma: ls,
            block_bits,
            variant: spec.variant,
            char_layout,
            block_layout,
            a,
            window_mask,
            region_tops,
            live_char_tops,
            lane_tops,
            k: 0,
            k_word: W::ZERO,
            deltas: Vec::new(),
            d_word: W::ZERO,
            gamma: 0,
            g_word: W::ZERO,
            gamma_vacuous: false,
            wildcard: None,
            counts_plan: None,
            sums_plan: None,
            compact: None,
        };

        match &spec.model {
            MatchModel::KMismatch { k } => {
                tpl.set_k(*k);
                match spec.variant {
                    Variant::Blockwise => tpl.build_counts_plan()?,
                    Variant::Compacted => tpl.build_count_compact(),
                    Variant::Sentinel | Variant::SentinelComatch | Variant::Long => {}
                    Variant::Auto => {
                        return Err(Error::InvalidArgument(
                            "template needs a concrete variant".into(),
                        ))
                    }
                }
            }
            MatchModel::KMismatchWildcard { k, wildcard } => {
                if u32::from(*wildcard) >= sigma {
                    return Err(Error::InvalidArgument(format!(
                        "wildcard symbol {wildcard} not in alphabet of size {sigma}"
                    )));
                }
                tpl.set_k(*k);
                tpl.build_counts_plan()?;
                tpl.build_wildcard_masks(pattern, *wildcard);
            }
            MatchModel::DeltaKMismatch { deltas, k } => {
                tpl.set_k(*k);
                tpl.set_deltas(deltas, pattern.len())?;
                tpl.build_counts_plan()?;
            }
            MatchModel::DeltaExact { deltas } => {
                tpl.set_deltas(deltas, pattern.len())?;
            }
            MatchModel::LessThan => {}
            MatchModel::DeltaGamma { deltas, gamma } => {
                tpl.set_deltas(deltas, pattern.len())?;
                tpl.set_gamma_capped(*gamma, tpl.delta_sum());
                if !tpl.gamma_vacuous {
                    match spec.variant {
                        Variant::Compacted => tpl.build_sum_compact(),
                        _ => tpl.build_sums_plan()?,
                    }
                }
            }
            MatchModel::DeltaKGamma {
                deltas,
                k,
                gamma,
                raw_sum,
            } => {
                tpl.set_k(*k);
                tpl.set_deltas(deltas, pattern.len())?;
                tpl.build_counts_plan()?;
                let cap = if *raw_sum {
                    tpl.m as u64 * u64::from(sigma - 1)
                } else {
                    tpl.delta_sum()
                };
                tpl.set_gamma_capped(*gamma, cap);
                if !tpl.gamma_vacuous {
                    if *raw_sum {
                        tpl.build_sums_plan_for(u64::from(sigma - 1))?;
                    } else {
                        tpl.build_sums_plan()?;
                    }
                }
            }
        }
        Ok(tpl)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn m_bar(&self) -> usize {
        self.m_bar
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn pattern_word(&self) -> W {
        self.a
    }

    pub fn k_word(&self) -> W {
        self.k_word
    }

    pub fn d_word(&self) -> W {
        self.d_word
    }

    fn set_k(&mut self, k: u32) {
        // k >= m means every window matches; clamping keeps the threshold
        // fields small and the short-circuit explicit.
        self.k = k.min(self.m as u32);
        let mut w = W::ZERO;
        for s in 0..(W::BITS / self.block_bits) {
            w = w | W::from_u128(u128::from(self.k)).shl(s * self.block_bits);
        }
        self.k_word = w;
    }

    fn set_deltas(&mut self, deltas: &Deltas, m: usize) -> Result<(), Error> {
        let cap = (self.sigma - 1) as u16;
        let resolved: Vec<u16> = deltas.resolve(m)?.iter().map(|&d| d.min(cap)).collect();
        let mut w = W::ZERO;
        for s in 0..self.ell {
            for (t, &d) in resolved.iter().enumerate() {
                w = w | W::from_u128(u128::from(d)).shl((s * self.m_bar + t) as u32 * self.log_sigma);
            }
        }
        self.deltas = resolved;
        self.d_word = w;
        Ok(())
    }

    /// Largest possible sum under the active tolerances.
    pub(crate) fn delta_sum(&self) -> u64 {
        self.deltas.iter().map(|&d| u64::from(d)).sum()
    }

    fn set_gamma_capped(&mut self, gamma: u64, max_sum: u64) {
        self.gamma = gamma;
        // A bound no smaller than the largest reachable sum prunes nothing;
        // the engines then skip the sum check entirely. This also keeps the
        // replicated threshold below 2^block_bits.
        self.gamma_vacuous = gamma >= max_sum;
        if !self.gamma_vacuous {
            let mut w = W::ZERO;
            for s in 0..(W::BITS / self.block_bits) {
                w = w | W::from_u128(u128::from(gamma)).shl(s * self.block_bits);
            }
            self.g_word = w;
        }
    }

    fn build_counts_plan(&mut self) -> Result<(), Error> {
        self.counts_plan = Some(BsaPlan::new(
            self.char_layout,
            self.m_bar as u32,
            None,
            BsaPath::MulPrefix,
        )?);
        Ok(())
    }

    fn build_sums_plan(&mut self) -> Result<(), Error> {
        let max = self.deltas.iter().copied().max().unwrap_or(0);
        self.build_sums_plan_for(u64::from(max))
    }

    fn build_sums_plan_for(&mut self, max_value: u64) -> Result<(), Error> {
        let r = crate::bitword::min_r_fields::<W>(self.log_sigma, u128::from(max_value.max(1)));
        self.sums_plan = Some(BsaPlan::new(
            self.char_layout,
            self.m_bar as u32,
            Some(r),
            BsaPath::MulPrefix,
        )?);
        Ok(())
    }

    fn build_count_compact(&mut self) {
        let f = compact_field_bits(u64::from(self.k));
        debug_assert!(f <= self.log_sigma);
        self.compact = Some(build_compact_plan(
            self.ell,
            self.m_bar,
            self.log_sigma,
            f,
            u64::from(self.k),
            false,
        ));
    }

    fn build_sum_compact(&mut self) {
        let f = compact_field_bits(self.gamma);
        debug_assert!(f <= self.log_sigma);
        self.compact = Some(build_compact_plan(
            self.ell,
            self.m_bar,
            self.log_sigma,
            f,
            self.gamma,
            true,
        ));
    }

    fn build_wildcard_masks(&mut self, pattern: &[u16], phi: u16) {
        let ls = self.log_sigma;
        let top = 1u128 << (ls - 1);
        let mut wp = self.region_tops;
        for s in 0..self.ell {
            for (t, &c) in pattern.iter().enumerate() {
                if c == phi {
                    wp = wp & !W::from_u128(top).shl((s * self.m_bar + t) as u32 * ls);
                }
            }
        }
        let mut ht = W::ZERO;
        for c in 0..(self.ell * self.m_bar) {
            ht = ht | W::from_u128(u128::from(phi)).shl(c as u32 * ls);
        }
        self.wildcard = Some((wp, ht));
    }

    /// Window extraction against this template's geometry. Safe for any
    /// `j <= n - m`: the packed buffer is zeroed past the live characters
    /// and keeps a spare word, so lanes running past the end read zeros.
    pub(crate) fn window(&self, text: &PackedText<W>, j: usize) -> W {
        let bit_pos = j * self.log_sigma as usize;
        debug_assert!(bit_pos / W::BITS as usize + 1 < text.words.len());
        extract_word_at_bit(&text.words, bit_pos) & self.window_mask
    }
}

/// Longest pattern whose lane fits a `W` word at `log_sigma` bits per
/// character.
pub(crate) fn lane_limit<W: Word>(log_sigma: u32, sentinel: bool) -> usize {
    let fields = (W::BITS / log_sigma) as usize;
    if sentinel {
        fields.saturating_sub(1)
    } else {
        // Largest m with next_power_of_two(m)*log_sigma <= w.
        let mut best = 0;
        let mut m = 1usize;
        while m <= fields {
            if m.next_power_of_two() <= fields {
                best = m;
            }
            m += 1;
        }
        best
    }
}
