//! Staircase codes built from a shortened BCH component code, with the bit
//! placement used for probabilistic amplitude shaping.
//!
//! Blocks are `side x side` with `side = n_c / 2`. Row `j` of block `B_i`
//! holds, left to right, the amplitude-label bits, the sign-information bits
//! and the parity bits of the component codeword formed by column `j` of
//! `B_{i-1}` followed by row `j` of `B_i`. `B_0` is all zeros.

mod decoder;

pub use decoder::{DecodedBlock, DecoderMode, WindowDecoder};

use crate::bch::BchCode;
use crate::error::{check_len, Error, Result};

/// Allowed mismatch between a caller-supplied `gamma` and the exact value.
pub const GAMMA_TOLERANCE: f64 = 5e-5;

/// Staircase geometry implied by component lengths and bits per symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Geometry {
    pub n_c: usize,
    pub k_c: usize,
    pub m: u32,
    /// Block side `n_c / 2`.
    pub side: usize,
    /// `gamma = gamma_num / n_c`.
    pub gamma_num: usize,
    /// Symbols per staircase block.
    pub n: usize,
    /// Symbols carried by one block row, `n / side`.
    pub symbols_per_row: usize,
    /// Information bits per row, `k_c - side`.
    pub alpha: usize,
    /// Amplitude-label bits per row.
    pub alpha_b: usize,
    /// Sign-information bits per row.
    pub alpha_u: usize,
    /// Parity bits per row, `n_c - k_c`.
    pub parity: usize,
}

impl Geometry {
    /// Solves the staircase geometry. Fails, naming the violated condition,
    /// when the block side, `n`, the symbols per row or the sign-information
    /// bits per row would not be integers, or when `gamma` falls outside
    /// `[0, 1)`.
    pub fn new(n_c: usize, k_c: usize, m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::Parameter(format!("bits per symbol m={m} must be >= 2")));
        }
        if k_c == 0 || k_c >= n_c {
            return Err(Error::Parameter(format!("component dimensions n_c={n_c}, k_c={k_c} invalid")));
        }
        if n_c % 2 != 0 {
            return Err(Error::Parameter(format!("component length n_c={n_c} must be even")));
        }
        let m_us = m as usize;
        let side = n_c / 2;
        let parity = n_c - k_c;
        // staircase rate (n_c - 2p)/n_c must equal (m - 1 + gamma)/m
        if n_c < 2 * m_us * parity {
            return Err(Error::Parameter(format!(
                "gamma = 1 - 2*{m}*{parity}/{n_c} is negative: staircase rate too low for m={m}"
            )));
        }
        let gamma_num = n_c - 2 * m_us * parity;
        let alpha = k_c - side;
        // n = alpha * side / (m - 1 + gamma) = alpha * side * n_c / (m (n_c - 2p))
        let num = (alpha as u128) * (side as u128) * (n_c as u128);
        let den = (m_us as u128) * ((n_c - 2 * parity) as u128);
        if num % den != 0 {
            return Err(Error::Parameter(format!(
                "symbols per block n = {num}/{den} is not an integer"
            )));
        }
        let n = (num / den) as usize;
        if n == 0 || n % side != 0 {
            return Err(Error::Parameter(format!(
                "symbols per row n/(n_c/2) = {n}/{side} is not a positive integer"
            )));
        }
        let symbols_per_row = n / side;
        // alpha_u = gamma * n / side
        let un = gamma_num as u128 * symbols_per_row as u128;
        if un % n_c as u128 != 0 {
            return Err(Error::Parameter(format!(
                "sign-information bits per row gamma*n/(n_c/2) = {un}/{n_c} is not an integer"
            )));
        }
        let alpha_u = (un / n_c as u128) as usize;
        let alpha_b = symbols_per_row * (m_us - 1);
        if alpha_b + alpha_u != alpha || alpha_u + parity != symbols_per_row {
            return Err(Error::Parameter(format!(
                "row bookkeeping inconsistent: alpha_b={alpha_b} alpha_u={alpha_u} alpha={alpha}"
            )));
        }
        Ok(Self {
            n_c,
            k_c,
            m,
            side,
            gamma_num,
            n,
            symbols_per_row,
            alpha,
            alpha_b,
            alpha_u,
            parity,
        })
    }

    /// Sign-information fraction.
    pub fn gamma(&self) -> f64 {
        self.gamma_num as f64 / self.n_c as f64
    }

    /// Staircase code rate `1 - 2 (n_c - k_c) / n_c`.
    pub fn rate(&self) -> f64 {
        1.0 - 2.0 * self.parity as f64 / self.n_c as f64
    }

    /// Information bits per block, `alpha * side = n (m - 1) + gamma n`.
    pub fn info_bits_per_block(&self) -> usize {
        self.alpha * self.side
    }

    /// Amplitude-label bits per block, `n (m - 1)`.
    pub fn label_bits_per_block(&self) -> usize {
        self.alpha_b * self.side
    }

    /// Sign-information bits per block, `gamma n`.
    pub fn sign_info_bits_per_block(&self) -> usize {
        self.alpha_u * self.side
    }

    /// Parity bits per block.
    pub fn parity_bits_per_block(&self) -> usize {
        self.parity * self.side
    }
}

/// Component code together with its staircase geometry.
#[derive(Clone, Debug)]
pub struct StaircaseParams {
    code: BchCode,
    geometry: Geometry,
}

impl StaircaseParams {
    /// Derives the geometry for `m` bits per symbol. If `gamma` is given it
    /// must agree with the value implied by the code.
    pub fn derive(code: BchCode, m: u32, gamma: Option<f64>) -> Result<Self> {
        let geometry = Geometry::new(code.n(), code.k(), m)?;
        if let Some(g) = gamma {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::Parameter(format!("gamma={g} outside [0, 1)")));
            }
            if (g - geometry.gamma()).abs() > GAMMA_TOLERANCE {
                return Err(Error::Parameter(format!(
                    "gamma={g} does not match the code: (n_c={}, k_c={}, m={m}) implies gamma={:.6}",
                    code.n(),
                    code.k(),
                    geometry.gamma()
                )));
            }
        }
        Ok(Self { code, geometry })
    }

    pub fn code(&self) -> &BchCode {
        &self.code
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn side(&self) -> usize {
        self.geometry.side
    }

    pub fn m(&self) -> u32 {
        self.geometry.m
    }

    pub fn gamma(&self) -> f64 {
        self.geometry.gamma()
    }

    pub fn n(&self) -> usize {
        self.geometry.n
    }

    pub fn rate(&self) -> f64 {
        self.geometry.rate()
    }
}

/// One `side x side` block of the code array, row-major, one bit per byte.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaircaseBlock {
    side: usize,
    bits: Vec<u8>,
}

impl StaircaseBlock {
    /// The all-zero block.
    pub fn zero(side: usize) -> Self {
        Self {
            side,
            bits: vec![0; side * side],
        }
    }

    pub fn from_bits(side: usize, bits: Vec<u8>) -> Result<Self> {
        check_len("staircase block", side * side, bits.len())?;
        Ok(Self { side, bits })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut [u8] {
        &mut self.bits
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.bits[row * self.side + col]
    }

    pub fn row(&self, j: usize) -> &[u8] {
        &self.bits[j * self.side..(j + 1) * self.side]
    }

    /// Column `j`, top to bottom.
    pub fn column(&self, j: usize) -> impl Iterator<Item = u8> + '_ {
        (0..self.side).map(move |r| self.bits[r * self.side + j])
    }

    /// Amplitude-label bits of all rows, concatenated.
    pub fn label_bits(&self, g: &Geometry) -> Vec<u8> {
        self.segment(0, g.alpha_b)
    }

    /// Sign-information bits of all rows, concatenated.
    pub fn sign_info(&self, g: &Geometry) -> Vec<u8> {
        self.segment(g.alpha_b, g.alpha_u)
    }

    /// Parity bits of all rows, concatenated.
    pub fn parity(&self, g: &Geometry) -> Vec<u8> {
        self.segment(g.alpha, g.parity)
    }

    /// Sign bits of row `j`: its parity followed by its sign information.
    pub fn sign_bits_of_row(&self, g: &Geometry, j: usize) -> impl Iterator<Item = u8> + '_ {
        let row = self.row(j);
        row[g.alpha..].iter().chain(&row[g.alpha_b..g.alpha]).copied()
    }

    fn segment(&self, start: usize, len: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(len * self.side);
        for j in 0..self.side {
            out.extend_from_slice(&self.row(j)[start..start + len]);
        }
        out
    }
}

/// Places label and sign-information bits into a new block after `prev` and
/// computes the parity of every row. Returns the block and the parity bits
/// of all rows concatenated.
pub fn place_and_encode(
    params: &StaircaseParams,
    prev: &StaircaseBlock,
    label_bits: &[u8],
    sign_info: &[u8],
) -> Result<(StaircaseBlock, Vec<u8>)> {
    let g = params.geometry();
    let side = g.side;
    check_len("previous block", side * side, prev.bits.len())?;
    check_len("amplitude-label bits", g.label_bits_per_block(), label_bits.len())?;
    check_len("sign-information bits", g.sign_info_bits_per_block(), sign_info.len())?;
    let mut block = StaircaseBlock::zero(side);
    let mut message = vec![0u8; params.code().k()];
    for j in 0..side {
        for (slot, b) in message[..side].iter_mut().zip(prev.column(j)) {
            *slot = b;
        }
        message[side..side + g.alpha_b].copy_from_slice(&label_bits[j * g.alpha_b..(j + 1) * g.alpha_b]);
        message[side + g.alpha_b..].copy_from_slice(&sign_info[j * g.alpha_u..(j + 1) * g.alpha_u]);
        let row = &mut block.bits[j * side..(j + 1) * side];
        row[..g.alpha].copy_from_slice(&message[side..]);
        params.code().parity_into(&message, &mut row[g.alpha..]);
    }
    let parity = block.parity(g);
    Ok((block, parity))
}

/// Streaming encoder that remembers the previous block.
#[derive(Clone, Debug)]
pub struct StaircaseEncoder {
    params: StaircaseParams,
    prev: StaircaseBlock,
}

impl StaircaseEncoder {
    /// Starts from `B_0 = 0`.
    pub fn new(params: StaircaseParams) -> Self {
        let prev = StaircaseBlock::zero(params.side());
        Self { params, prev }
    }

    pub fn params(&self) -> &StaircaseParams {
        &self.params
    }

    pub fn encode(&mut self, label_bits: &[u8], sign_info: &[u8]) -> Result<StaircaseBlock> {
        let (block, _) = place_and_encode(&self.params, &self.prev, label_bits, sign_info)?;
        self.prev = block.clone();
        Ok(block)
    }
}

/// True when every row of `[prev^T, cur]` is a component codeword.
pub fn rows_are_codewords(code: &BchCode, prev: &StaircaseBlock, cur: &StaircaseBlock) -> bool {
    let mut word = Vec::with_capacity(code.n());
    (0..cur.side).all(|j| {
        word.clear();
        word.extend(prev.column(j));
        word.extend_from_slice(cur.row(j));
        code.is_codeword(&word)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(s: usize, m: u32) -> StaircaseParams {
        StaircaseParams::derive(BchCode::from_params(10, 3, s).unwrap(), m, None).unwrap()
    }

    #[test]
    fn geometry_examples() {
        let p = params(647, 4);
        let g = p.geometry();
        assert_eq!((g.n, g.alpha_u), (8836, 17));
        assert!((p.gamma() - 0.3617).abs() < 5e-5);
        assert!((p.rate() - 0.8404).abs() < 5e-5);
        let g = *params(783, 4).geometry();
        assert_eq!((g.n, g.alpha_u, g.gamma_num), (3600, 0, 0));
        assert_eq!(g.rate(), 0.75);
        let p = params(663, 3);
        let g = p.geometry();
        assert_eq!((g.n_c, g.k_c, g.n, g.alpha_u), (360, 330, 10800, 30));
        assert_eq!(p.gamma(), 0.5);
        assert!((p.rate() - 0.8333).abs() < 5e-5);
    }

    #[test]
    fn rate_identities_hold() {
        for m in [2u32, 3, 4, 5] {
            for s in (1..=783).step_by(2) {
                let code = BchCode::from_params(10, 3, s).unwrap();
                if let Ok(g) = Geometry::new(code.n(), code.k(), m) {
                    let via_gamma = (m as f64 - 1.0 + g.gamma()) / m as f64;
                    assert!((g.rate() - via_gamma).abs() < 1e-12);
                    assert_eq!(g.alpha_b + g.alpha_u, g.alpha);
                    assert_eq!(g.alpha_u + g.parity, g.n / g.side);
                    assert_eq!(g.info_bits_per_block(), g.n * (m as usize - 1) + g.gamma_num * g.n / g.n_c);
                    // row length accounting: prev column plus the row equals n_c
                    assert_eq!(g.side + g.alpha_b + g.alpha_u + g.parity, g.n_c);
                }
            }
        }
    }

    #[test]
    fn names_the_failed_condition() {
        // n_c = 244: n = 3721 is an integer but 3721 / 122 is not
        let err = Geometry::new(244, 214, 4).unwrap_err().to_string();
        assert!(err.contains("symbols per row"), "{err}");
        // m = 3, n_c = 244: n_c^2 / 12 is not an integer
        let err = Geometry::new(244, 214, 3).unwrap_err().to_string();
        assert!(err.contains("symbols per block"), "{err}");
        let err = Geometry::new(200, 170, 4).unwrap_err().to_string();
        assert!(err.contains("negative"), "{err}");
        let code = BchCode::from_params(10, 3, 647).unwrap();
        assert!(StaircaseParams::derive(code.clone(), 4, Some(0.3617)).is_ok());
        assert!(StaircaseParams::derive(code, 4, Some(0.4)).is_err());
    }

    #[test]
    fn zero_inputs_give_zero_block() {
        let p = params(783, 4);
        let g = *p.geometry();
        let prev = StaircaseBlock::zero(g.side);
        let (block, parity) = place_and_encode(
            &p,
            &prev,
            &vec![0; g.label_bits_per_block()],
            &vec![0; g.sign_info_bits_per_block()],
        )
        .unwrap();
        assert!(block.bits().iter().all(|&b| b == 0));
        assert!(parity.iter().all(|&b| b == 0));
    }

    #[test]
    fn encoded_rows_are_codewords_and_segments_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (s, m) in [(647usize, 4u32), (663, 3), (783, 4)] {
            let p = params(s, m);
            let g = *p.geometry();
            let mut enc = StaircaseEncoder::new(p.clone());
            let mut prev = StaircaseBlock::zero(g.side);
            for _ in 0..4 {
                let labels: Vec<u8> = (0..g.label_bits_per_block()).map(|_| rng.random_range(0..2)).collect();
                let signs: Vec<u8> = (0..g.sign_info_bits_per_block()).map(|_| rng.random_range(0..2)).collect();
                let block = enc.encode(&labels, &signs).unwrap();
                assert!(rows_are_codewords(p.code(), &prev, &block));
                assert_eq!(block.label_bits(&g), labels);
                assert_eq!(block.sign_info(&g), signs);
                let sign_row: Vec<u8> = block.sign_bits_of_row(&g, 1).collect();
                assert_eq!(sign_row.len(), g.symbols_per_row);
                assert_eq!(&sign_row[..g.parity], &block.row(1)[g.alpha..]);
                prev = block;
            }
        }
    }

    #[test]
    fn length_errors() {
        let p = params(783, 4);
        let prev = StaircaseBlock::zero(p.side());
        assert!(matches!(place_and_encode(&p, &prev, &[0; 3], &[]), Err(Error::Length { .. })));
    }
}
