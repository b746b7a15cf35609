//! Fixed-length constant-composition distribution matcher.
//!
//! The matcher is an arithmetic coder with exact integer intervals. The full
//! interval has width `M`, the number of sequences with the target
//! composition. At every position the current interval is split among the
//! amplitudes in ascending order, each sub-interval proportional to that
//! amplitude's remaining count; with exact arithmetic every complete sequence
//! ends up with width 1, so the interval start of a sequence is its
//! lexicographic rank. An input of `k` bits, read as the integer `u`, selects
//! the sequence whose interval contains the point `u M / 2^k`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::shaping::entropy;

/// Constant-composition matcher for one block length and composition.
#[derive(Clone, Debug)]
pub struct CcdmCodec {
    n: usize,
    composition: Vec<u32>,
    // number of sequences with this composition
    total: BigUint,
    k_in: usize,
}

/// Largest-remainder rounding of `n * pmf` to integers summing to `n`; ties
/// in the fractional part go to the smaller index.
pub(crate) fn quantize_composition(pmf: &[f64], n: usize) -> Vec<u32> {
    let scaled: Vec<f64> = pmf.iter().map(|&p| p * n as f64).collect();
    let mut counts: Vec<u32> = scaled.iter().map(|&s| s.floor() as u32).collect();
    let assigned: u64 = counts.iter().map(|&c| c as u64).sum();
    let mut missing = (n as u64).saturating_sub(assigned) as usize;
    let mut order: Vec<usize> = (0..pmf.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = scaled[a] - scaled[a].floor();
        let fb = scaled[b] - scaled[b].floor();
        fb.partial_cmp(&fa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if missing == 0 {
            break;
        }
        counts[i] += 1;
        missing -= 1;
    }
    counts
}

impl CcdmCodec {
    /// Builds a matcher of length `n` for the amplitude pmf `pa`.
    pub fn new(pa: &[f64], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("matcher length must be >= 1".into()));
        }
        if pa.is_empty() || pa.iter().any(|&p| !(p >= 0.0)) || (pa.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter("amplitude pmf must be non-negative and sum to 1".into()));
        }
        Self::from_composition(quantize_composition(pa, n))
    }

    /// Builds a matcher for an explicit composition.
    pub fn from_composition(composition: Vec<u32>) -> Result<Self> {
        let n: usize = composition.iter().map(|&c| c as usize).sum();
        if n == 0 {
            return Err(Error::Parameter("composition must have at least one symbol".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::Parameter(format!("matcher length {n} too large")));
        }
        // Multinomial coefficient, built one symbol at a time; every partial
        // product is itself a multinomial coefficient, so divisions are exact.
        let mut total = BigUint::one();
        let mut placed: u64 = 0;
        for &c in &composition {
            for i in 1..=c as u64 {
                placed += 1;
                total *= placed;
                total /= i as u32;
            }
        }
        let k_in = (total.bits() - 1) as usize;
        Ok(Self {
            n,
            composition,
            total,
            k_in,
        })
    }

    /// Output length in amplitudes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Counts per amplitude index.
    pub fn composition(&self) -> &[u32] {
        &self.composition
    }

    /// Number of input bits per block, `floor(log2 M)`.
    pub fn input_bits(&self) -> usize {
        self.k_in
    }

    /// Number of sequences with the codec composition.
    pub fn num_sequences(&self) -> &BigUint {
        &self.total
    }

    /// `k_in / n`.
    pub fn realized_rate(&self) -> f64 {
        self.k_in as f64 / self.n as f64
    }

    /// Empirical amplitude pmf of the composition.
    pub fn composition_pmf(&self) -> Vec<f64> {
        self.composition.iter().map(|&c| c as f64 / self.n as f64).collect()
    }

    /// `H(composition / n)`.
    pub fn composition_entropy(&self) -> f64 {
        entropy(&self.composition_pmf())
    }

    /// `H(composition / n) - k_in / n`, never negative.
    pub fn rate_loss(&self) -> f64 {
        self.composition_entropy() - self.realized_rate()
    }

    /// Matches `k_in` bits to a sequence of amplitude indices.
    pub fn encode_indices(&self, bits: &[u8]) -> Result<Vec<usize>> {
        crate::error::check_len("matcher input", self.k_in, bits.len())?;
        let u = bits_to_uint(bits);
        let point = (u * &self.total) >> self.k_in;
        Ok(self.unrank(point))
    }

    /// Matches `k_in` bits to amplitudes `2k + 1`.
    pub fn encode(&self, bits: &[u8]) -> Result<Vec<u32>> {
        Ok(self
            .encode_indices(bits)?
            .into_iter()
            .map(|k| 2 * k as u32 + 1)
            .collect())
    }

    /// Recovers the input bits from a sequence of amplitude indices.
    pub fn decode_indices(&self, sequence: &[usize]) -> Result<Vec<u8>> {
        if sequence.len() != self.n {
            return Err(Error::Composition);
        }
        let mut counts = vec![0u32; self.composition.len()];
        for &a in sequence {
            match counts.get_mut(a) {
                Some(c) => *c += 1,
                None => return Err(Error::Composition),
            }
        }
        if counts != self.composition {
            return Err(Error::Composition);
        }
        let rank = self.rank(sequence);
        // smallest u with floor(u M / 2^k) = rank
        let scaled = rank << self.k_in;
        let mut u = &scaled / &self.total;
        if !(&u * &self.total == scaled) {
            u += 1u32;
        }
        if u.bits() as usize > self.k_in {
            return Err(Error::Input("sequence is outside the matcher image".into()));
        }
        Ok(uint_to_bits(&u, self.k_in))
    }

    /// Recovers the input bits from amplitudes `2k + 1`.
    pub fn decode(&self, amplitudes: &[u32]) -> Result<Vec<u8>> {
        let idx: Vec<usize> = amplitudes
            .iter()
            .map(|&a| if a % 2 == 1 { (a / 2) as usize } else { usize::MAX })
            .collect();
        self.decode_indices(&idx)
    }

    /// Sub-interval boundaries for the current state: the start of symbol
    /// `a`'s sub-interval is `q * cum(a) + rho * cum(a) / remaining`.
    fn cumulative(q: &BigUint, rho: u64, cum: u64, remaining: u64) -> BigUint {
        q * cum + (rho * cum) / remaining
    }

    fn unrank(&self, mut offset: BigUint) -> Vec<usize> {
        let symbols = self.composition.len();
        let mut counts = self.composition.clone();
        let mut width = self.total.clone();
        let mut remaining = self.n as u64;
        let mut out = Vec::with_capacity(self.n);
        let mut prefix = vec![0u64; symbols + 1];
        for _ in 0..self.n {
            for a in 0..symbols {
                prefix[a + 1] = prefix[a] + counts[a] as u64;
            }
            let (q, rho) = width.div_rem(&BigUint::from(remaining));
            let rho = rho.to_u64().expect("remainder fits");
            let a = match Self::guess_symbol(&offset, &width, &prefix, remaining) {
                Some(a) => a,
                None => {
                    // first symbol whose sub-interval end exceeds the offset
                    let (mut lo, mut hi) = (0usize, symbols - 1);
                    while lo < hi {
                        let mid = (lo + hi) / 2;
                        if Self::cumulative(&q, rho, prefix[mid + 1], remaining) > offset {
                            hi = mid;
                        } else {
                            lo = mid + 1;
                        }
                    }
                    lo
                }
            };
            if prefix[a] > 0 {
                offset -= &q * prefix[a];
                offset -= (rho * prefix[a]) / remaining;
            }
            let c = counts[a] as u64;
            width = q;
            width *= c;
            width += (rho * c) / remaining;
            counts[a] -= 1;
            remaining -= 1;
            out.push(a);
        }
        debug_assert!(offset.is_zero());
        out
    }

    /// Symbol selected by `offset` when floating point decides it safely.
    /// Sub-interval starts are `cum * width / remaining` up to less than one
    /// unit, which is negligible once the width has 80 or more bits; the
    /// guess is only taken when the scaled offset is clearly inside a
    /// sub-interval.
    fn guess_symbol(offset: &BigUint, width: &BigUint, prefix: &[u64], remaining: u64) -> Option<usize> {
        let bits = width.bits();
        if bits < 80 {
            return None;
        }
        let shift = bits - 64;
        let w = (width >> shift).to_f64()?;
        let o = (offset >> shift).to_f64()?;
        let target = o / w * remaining as f64;
        let a = prefix[1..].iter().position(|&p| p as f64 > target)?;
        let margin = 1e-6 * (1.0 + remaining as f64);
        let clear = target - prefix[a] as f64 > margin && prefix[a + 1] as f64 - target > margin;
        clear.then_some(a)
    }

    fn rank(&self, sequence: &[usize]) -> BigUint {
        let mut counts = self.composition.clone();
        let mut width = self.total.clone();
        let mut remaining = self.n as u64;
        let mut offset = BigUint::zero();
        for &a in sequence {
            let below: u64 = counts[..a].iter().map(|&c| c as u64).sum();
            let (q, rho) = width.div_rem(&BigUint::from(remaining));
            let rho = rho.to_u64().expect("remainder fits");
            if below > 0 {
                offset += &q * below;
                offset += (rho * below) / remaining;
            }
            let c = counts[a] as u64;
            width = q;
            width *= c;
            width += (rho * c) / remaining;
            counts[a] -= 1;
            remaining -= 1;
        }
        offset
    }
}

fn bits_to_uint(bits: &[u8]) -> BigUint {
    if bits.is_empty() {
        return BigUint::zero();
    }
    // pack MSB-first bits into big-endian bytes
    let pad = (8 - bits.len() % 8) % 8;
    let mut bytes = Vec::with_capacity(bits.len().div_ceil(8));
    let mut acc = 0u8;
    for (i, &b) in std::iter::repeat_n(&0u8, pad).chain(bits.iter()).enumerate() {
        acc = (acc << 1) | (b & 1);
        if i % 8 == 7 {
            bytes.push(acc);
            acc = 0;
        }
    }
    BigUint::from_bytes_be(&bytes)
}

fn uint_to_bits(u: &BigUint, len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    let bytes = u.to_bytes_le();
    for (i, slot) in out.iter_mut().rev().enumerate() {
        let byte = bytes.get(i / 8).copied().unwrap_or(0);
        *slot = (byte >> (i % 8)) & 1;
    }
    out
}
