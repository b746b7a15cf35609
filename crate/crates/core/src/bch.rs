//! Shortened binary BCH codes: systematic encoding and bounded-distance
//! decoding (syndromes, Berlekamp-Massey, Chien search).
//!
//! Bit `i` of a codeword of length `n_c` is the coefficient of `x^(n_c-1-i)`,
//! so the message occupies the first `k_c` positions and the parity the last
//! `n_c - k_c`. Shortening removes the `s` highest-degree message positions of
//! the parent `(2^v - 1)`-length code; they are implicitly zero.

use crate::error::{check_len, Error, Result};
use crate::gf::GaloisField;

/// Largest supported number of parity bits (`v * t`).
pub const MAX_PARITY_BITS: usize = 128;

/// Result of bounded-distance decoding one received word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BddOutcome {
    /// The decoded codeword, or the input unchanged when decoding failed.
    pub word: Vec<u8>,
    pub num_corrected: usize,
    pub failed: bool,
}

/// Status of an in-place decode, see [`BchCode::locate_errors`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BddStatus {
    /// The word is already a codeword.
    Clean,
    /// Errors were located; positions were written to the output buffer.
    Corrected(usize),
    /// No codeword within radius `t` was found.
    Failed,
}

/// A shortened binary BCH code with parameters `(v, t, s)`.
#[derive(Clone, Debug)]
pub struct BchCode {
    field: GaloisField,
    t: usize,
    s: usize,
    n: usize,
    k: usize,
    parity_bits: usize,
    // Generator coefficients of x^0 .. x^(r-1); the x^r term is implicit.
    gen_low: u128,
    // Exponents j of alpha^j for the odd syndromes 1, 3, ..., 2t-1.
    odd_roots: Vec<u16>,
}

impl BchCode {
    /// Builds the `(v, t, s)` code; the length `n_c = 2^v - 1 - s` must be even.
    pub fn new(field: GaloisField, t: usize, s: usize) -> Result<Self> {
        let parent = field.order();
        if s < parent {
            let n = parent - s;
            if n % 2 == 1 {
                let mut options = Vec::new();
                if s > 0 {
                    options.push(s - 1);
                }
                options.push(s + 1);
                let hint = options
                    .iter()
                    .map(|o| o.to_string())
                    .collect::<Vec<_>>()
                    .join(" or ");
                return Err(Error::Parameter(format!(
                    "shortening s={s} gives odd length n_c={n}; try s={hint}"
                )));
            }
        }
        Self::with_any_length(field, t, s)
    }

    /// Builds the code without requiring an even length, e.g. the unshortened
    /// parent code.
    pub fn with_any_length(field: GaloisField, t: usize, s: usize) -> Result<Self> {
        let v = field.degree() as usize;
        let parent = field.order();
        if t == 0 {
            return Err(Error::Parameter("error-correcting capability t must be >= 1".into()));
        }
        let parity_bits = v * t;
        if parity_bits > MAX_PARITY_BITS {
            return Err(Error::Parameter(format!(
                "v*t = {parity_bits} exceeds the supported {MAX_PARITY_BITS} parity bits"
            )));
        }
        if s + parity_bits >= parent {
            return Err(Error::Parameter(format!(
                "shortening s={s} leaves no information bits (k_c = {} - {parity_bits} - {s} <= 0)",
                parent
            )));
        }
        let n = parent - s;
        let k = n - parity_bits;

        // Generator: product of the distinct minimal polynomials of alpha^1..alpha^2t.
        let mut covered = vec![false; parent];
        let mut gen: Vec<u8> = vec![1];
        for i in 1..=2 * t {
            if covered[i % parent] {
                continue;
            }
            let (mask, coset) = field.minimal_poly(i);
            for c in coset {
                covered[c] = true;
            }
            let deg = 63 - mask.leading_zeros() as usize;
            let mut next = vec![0u8; gen.len() + deg];
            for (a, &ga) in gen.iter().enumerate() {
                if ga == 0 {
                    continue;
                }
                for b in 0..=deg {
                    next[a + b] ^= ((mask >> b) & 1) as u8;
                }
            }
            gen = next;
        }
        let degree = gen.len() - 1;
        if degree != parity_bits {
            return Err(Error::Parameter(format!(
                "generator degree {degree} differs from v*t = {parity_bits} for v={v}, t={t}"
            )));
        }
        let mut gen_low = 0u128;
        for (k, &c) in gen.iter().take(degree).enumerate() {
            if c == 1 {
                gen_low |= 1u128 << k;
            }
        }
        let odd_roots = (0..t).map(|j| (2 * j + 1) as u16).collect();
        Ok(Self {
            field,
            t,
            s,
            n,
            k,
            parity_bits,
            gen_low,
            odd_roots,
        })
    }

    /// Convenience constructor using the default primitive polynomial.
    pub fn from_params(v: u32, t: usize, s: usize) -> Result<Self> {
        Self::new(GaloisField::with_default_poly(v)?, t, s)
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn v(&self) -> u32 {
        self.field.degree()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn shortening(&self) -> usize {
        self.s
    }

    /// Code length `n_c`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Code dimension `k_c`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn parity_bits(&self) -> usize {
        self.parity_bits
    }

    /// Generator polynomial coefficients in ascending degree order.
    pub fn generator(&self) -> Vec<u8> {
        let mut g: Vec<u8> = (0..self.parity_bits)
            .map(|k| ((self.gen_low >> k) & 1) as u8)
            .collect();
        g.push(1);
        g
    }

    #[inline]
    fn reg_mask(&self) -> u128 {
        if self.parity_bits == 128 {
            u128::MAX
        } else {
            (1u128 << self.parity_bits) - 1
        }
    }

    /// Parity of `message`, i.e. `m(x) x^r mod g(x)`, highest degree first.
    pub fn parity_into(&self, message: &[u8], parity: &mut [u8]) {
        debug_assert_eq!(message.len(), self.k);
        debug_assert_eq!(parity.len(), self.parity_bits);
        let r = self.parity_bits;
        let mask = self.reg_mask();
        let mut reg = 0u128;
        for &b in message {
            let fb = (b as u128 & 1) ^ ((reg >> (r - 1)) & 1);
            reg = (reg << 1) & mask;
            if fb != 0 {
                reg ^= self.gen_low;
            }
        }
        for (i, p) in parity.iter_mut().enumerate() {
            *p = ((reg >> (r - 1 - i)) & 1) as u8;
        }
    }

    /// Systematic encoding: the message followed by its parity bits.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        check_len("BCH message", self.k, message.len())?;
        let mut word = vec![0u8; self.n];
        word[..self.k].copy_from_slice(message);
        let (msg, par) = word.split_at_mut(self.k);
        self.parity_into(msg, par);
        Ok(word)
    }

    /// Remainder of the received polynomial modulo the generator.
    #[inline]
    fn remainder(&self, word: impl Iterator<Item = u8>) -> u128 {
        let r = self.parity_bits;
        let mask = self.reg_mask();
        let mut reg = 0u128;
        for b in word {
            let top = (reg >> (r - 1)) & 1;
            reg = ((reg << 1) & mask) | (b as u128 & 1);
            if top != 0 {
                reg ^= self.gen_low;
            }
        }
        reg
    }

    /// True when the word is a codeword.
    pub fn is_codeword(&self, word: &[u8]) -> bool {
        word.len() == self.n && self.remainder(word.iter().copied()) == 0
    }

    /// Syndromes `S_1 .. S_2t` of a received word.
    pub fn syndromes(&self, word: &[u8]) -> Result<Vec<u16>> {
        check_len("BCH word", self.n, word.len())?;
        let rem = self.remainder(word.iter().copied());
        Ok(self.syndromes_from_remainder(rem))
    }

    fn syndromes_from_remainder(&self, rem: u128) -> Vec<u16> {
        let f = &self.field;
        let mut synd = vec![0u16; 2 * self.t];
        for &j in &self.odd_roots {
            let x = f.alpha_pow(j as i64);
            let mut acc = 0u16;
            for k in (0..self.parity_bits).rev() {
                acc = f.mul(acc, x) ^ ((rem >> k) & 1) as u16;
            }
            synd[j as usize - 1] = acc;
        }
        for i in 1..=self.t {
            // S_2i = S_i^2 for binary codes.
            let si = synd[i - 1];
            synd[2 * i - 1] = f.square(si);
        }
        synd
    }

    /// Berlekamp-Massey: error-locator coefficients (ascending) and its length.
    fn berlekamp_massey(&self, synd: &[u16]) -> (Vec<u16>, usize) {
        let f = &self.field;
        let nsyn = synd.len();
        let mut lambda = vec![0u16; nsyn + 1];
        let mut prev = vec![0u16; nsyn + 1];
        lambda[0] = 1;
        prev[0] = 1;
        let mut len = 0usize;
        let mut shift = 1usize;
        let mut prev_disc = 1u16;
        for step in 0..nsyn {
            let mut disc = synd[step];
            for i in 1..=len {
                disc ^= f.mul(lambda[i], synd[step - i]);
            }
            if disc == 0 {
                shift += 1;
                continue;
            }
            let coef = f.div(disc, prev_disc).expect("nonzero previous discrepancy");
            if 2 * len <= step {
                let saved = lambda.clone();
                for i in 0..=nsyn - shift {
                    lambda[i + shift] ^= f.mul(coef, prev[i]);
                }
                len = step + 1 - len;
                prev = saved;
                prev_disc = disc;
                shift = 1;
            } else {
                for i in 0..=nsyn - shift {
                    lambda[i + shift] ^= f.mul(coef, prev[i]);
                }
                shift += 1;
            }
        }
        lambda.truncate(len + 1);
        (lambda, len)
    }

    /// Locates the errors of `word` without modifying it. Positions are bit
    /// indices into the word, written to `positions` (cleared first).
    pub fn locate_errors(&self, word: &[u8], positions: &mut Vec<usize>) -> BddStatus {
        self.locate_errors_iter(word.iter().copied(), positions)
    }

    /// Same as [`locate_errors`](Self::locate_errors) for a word given as an
    /// iterator of exactly `n_c` bits.
    pub fn locate_errors_iter(
        &self,
        word: impl Iterator<Item = u8>,
        positions: &mut Vec<usize>,
    ) -> BddStatus {
        positions.clear();
        let rem = self.remainder(word);
        if rem == 0 {
            return BddStatus::Clean;
        }
        let synd = self.syndromes_from_remainder(rem);
        let (lambda, len) = self.berlekamp_massey(&synd);
        if len == 0 || len > self.t || lambda[len] == 0 {
            return BddStatus::Failed;
        }
        // Chien search over the shortened support: an error at degree d is a
        // root alpha^(-d) of the locator.
        let f = &self.field;
        let mut terms: Vec<u16> = lambda[1..].to_vec();
        let steps: Vec<u16> = (1..=len).map(|k| f.alpha_pow(-(k as i64))).collect();
        for d in 0..self.n {
            let sum = terms.iter().fold(1u16, |acc, &x| acc ^ x);
            if sum == 0 {
                positions.push(self.n - 1 - d);
                if positions.len() > len {
                    break;
                }
            }
            for (term, &st) in terms.iter_mut().zip(&steps) {
                *term = f.mul(*term, st);
            }
        }
        if positions.len() != len {
            positions.clear();
            return BddStatus::Failed;
        }
        BddStatus::Corrected(len)
    }

    /// Bounded-distance decoding of one received word.
    pub fn decode(&self, word: &[u8]) -> Result<BddOutcome> {
        check_len("BCH word", self.n, word.len())?;
        let mut positions = Vec::with_capacity(self.t + 1);
        let mut out = word.to_vec();
        let outcome = match self.locate_errors(word, &mut positions) {
            BddStatus::Clean => BddOutcome {
                word: out,
                num_corrected: 0,
                failed: false,
            },
            BddStatus::Corrected(count) => {
                for &p in &positions {
                    out[p] ^= 1;
                }
                BddOutcome {
                    word: out,
                    num_corrected: count,
                    failed: false,
                }
            }
            BddStatus::Failed => BddOutcome {
                word: out,
                num_corrected: 0,
                failed: true,
            },
        };
        Ok(outcome)
    }
}
