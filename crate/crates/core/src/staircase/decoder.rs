//! Sliding-window iterative bounded-distance decoding.
//!
//! The decoder keeps the `W` most recent received blocks plus a frozen
//! anchor (the all-zero `B_0` or the last emitted block, as seen by the
//! codewords of the following block). Once `W` blocks are
//! present it runs up to `I` iterations over all component codewords, block
//! pairs newest to oldest and rows in order, then emits the oldest block.
//! Corrections that would touch the anchor are rejected.
//!
//! Each block row and column carries a dirty flag so that a component word is
//! only decoded again when one of its inputs changed; decoding is a pure
//! function of the input word, so skipping clean words gives exactly the same
//! result as decoding them.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{StaircaseBlock, StaircaseParams};
use crate::bch::BddStatus;
use crate::error::{check_len, Error, Result};

/// How component decoders exchange decisions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderMode {
    /// Corrections are written into the shared bit array.
    #[default]
    Intrinsic,
    /// Every bit keeps the channel decision and one message per component
    /// code. A component decoder sees the other component's message when it
    /// has one and the channel bit otherwise; a failed decode withdraws its
    /// messages.
    Extrinsic,
}

const UNDECIDED: u8 = 2;

struct Slot {
    index: u64,
    // working bits (intrinsic) or channel decisions (extrinsic)
    bits: Vec<u8>,
    // messages from the codeword through this bit's row / column
    msg_row: Vec<u8>,
    msg_col: Vec<u8>,
    row_dirty: Vec<bool>,
    col_dirty: Vec<bool>,
}

impl Slot {
    // input to the row codeword: the column message if any
    #[inline]
    fn row_input(&self, at: usize) -> u8 {
        match self.msg_col[at] {
            UNDECIDED => self.bits[at],
            v => v,
        }
    }

    #[inline]
    fn col_input(&self, at: usize) -> u8 {
        match self.msg_row[at] {
            UNDECIDED => self.bits[at],
            v => v,
        }
    }

    fn final_bits(&self, mode: DecoderMode) -> Vec<u8> {
        match mode {
            DecoderMode::Intrinsic => self.bits.clone(),
            DecoderMode::Extrinsic => (0..self.bits.len())
                .map(|i| match (self.msg_row[i], self.msg_col[i]) {
                    (UNDECIDED, UNDECIDED) => self.bits[i],
                    (v, UNDECIDED) | (UNDECIDED, v) => v,
                    (a, b) if a == b => a,
                    _ => self.bits[i],
                })
                .collect(),
        }
    }
}

/// A block leaving the decoder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodedBlock {
    /// Position in the received stream, starting at 0 for `B_1`.
    pub index: u64,
    pub block: StaircaseBlock,
    /// Iterations run in the window this block was emitted from.
    pub iterations: usize,
    /// Whether the last iteration changed nothing.
    pub converged: bool,
}

/// Streaming window decoder.
pub struct WindowDecoder {
    params: StaircaseParams,
    window: usize,
    max_iterations: usize,
    mode: DecoderMode,
    slots: VecDeque<Slot>,
    anchor: Vec<u8>,
    next_index: u64,
    word: Vec<u8>,
    positions: Vec<usize>,
}

impl WindowDecoder {
    /// `window >= 2`; `max_iterations = 0` passes blocks through untouched.
    pub fn new(params: &StaircaseParams, window: usize, max_iterations: usize, mode: DecoderMode) -> Result<Self> {
        if window < 2 {
            return Err(Error::Parameter(format!("window size {window} must be >= 2")));
        }
        let side = params.side();
        Ok(Self {
            params: params.clone(),
            window,
            max_iterations,
            mode,
            slots: VecDeque::with_capacity(window + 1),
            anchor: vec![0; side * side],
            next_index: 0,
            word: vec![0; params.code().n()],
            positions: Vec::with_capacity(params.code().t() + 1),
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn mode(&self) -> DecoderMode {
        self.mode
    }

    /// Blocks currently held.
    pub fn pending(&self) -> usize {
        self.slots.len()
    }

    /// Adds a received block; returns the oldest block once the window is full.
    pub fn push(&mut self, block: StaircaseBlock) -> Result<Option<DecodedBlock>> {
        let side = self.params.side();
        check_len("received block", side * side, block.bits().len())?;
        let size = side * side;
        let extrinsic = self.mode == DecoderMode::Extrinsic;
        self.slots.push_back(Slot {
            index: self.next_index,
            bits: block.into_bits(),
            msg_row: if extrinsic { vec![UNDECIDED; size] } else { Vec::new() },
            msg_col: if extrinsic { vec![UNDECIDED; size] } else { Vec::new() },
            row_dirty: vec![true; side],
            col_dirty: vec![true; side],
        });
        self.next_index += 1;
        if self.slots.len() < self.window {
            return Ok(None);
        }
        Ok(Some(self.run_and_emit()))
    }

    /// Flushes the remaining blocks, iterating again before each emission.
    pub fn finish(&mut self) -> Vec<DecodedBlock> {
        let mut out = Vec::with_capacity(self.slots.len());
        while !self.slots.is_empty() {
            out.push(self.run_and_emit());
        }
        out
    }

    fn run_and_emit(&mut self) -> DecodedBlock {
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iterations {
            iterations += 1;
            if self.iterate() == 0 {
                converged = true;
                break;
            }
        }
        let slot = self.slots.pop_front().expect("window holds a block");
        let bits = slot.final_bits(self.mode);
        match self.mode {
            DecoderMode::Intrinsic => self.anchor.clone_from(&bits),
            // freeze exactly what the next block's codewords were reading
            DecoderMode::Extrinsic => {
                for (i, a) in self.anchor.iter_mut().enumerate() {
                    *a = slot.col_input(i);
                }
            }
        }
        DecodedBlock {
            index: slot.index,
            block: StaircaseBlock::from_bits(self.params.side(), bits).expect("block size"),
            iterations,
            converged,
        }
    }

    /// One pass over every component word in the window; returns the number
    /// of changed decoder inputs.
    fn iterate(&mut self) -> usize {
        let side = self.params.side();
        let mut changes = 0;
        for k in (0..self.slots.len()).rev() {
            for j in 0..side {
                let prev_dirty = k > 0 && self.slots[k - 1].col_dirty[j];
                if !(self.slots[k].row_dirty[j] || prev_dirty) {
                    continue;
                }
                self.slots[k].row_dirty[j] = false;
                if k > 0 {
                    self.slots[k - 1].col_dirty[j] = false;
                }
                changes += match self.mode {
                    DecoderMode::Intrinsic => self.decode_intrinsic(k, j),
                    DecoderMode::Extrinsic => self.decode_extrinsic(k, j),
                };
            }
        }
        changes
    }

    fn decode_intrinsic(&mut self, k: usize, j: usize) -> usize {
        let side = self.params.side();
        let code = self.params.code();
        let prev: &[u8] = if k == 0 { &self.anchor } else { &self.slots[k - 1].bits };
        let cur = &self.slots[k].bits;
        let word = (0..side)
            .map(|r| prev[r * side + j])
            .chain(cur[j * side..(j + 1) * side].iter().copied());
        let status = code.locate_errors_iter(word, &mut self.positions);
        let BddStatus::Corrected(count) = status else {
            return 0;
        };
        if k == 0 && self.positions.iter().any(|&p| p < side) {
            return 0;
        }
        for &p in &self.positions {
            if p < side {
                let s = &mut self.slots[k - 1];
                s.bits[p * side + j] ^= 1;
                s.row_dirty[p] = true;
            } else {
                let c = p - side;
                let s = &mut self.slots[k];
                s.bits[j * side + c] ^= 1;
                s.col_dirty[c] = true;
            }
        }
        count
    }

    fn decode_extrinsic(&mut self, k: usize, j: usize) -> usize {
        let side = self.params.side();
        let code = self.params.code();
        for r in 0..side {
            self.word[r] = if k == 0 {
                self.anchor[r * side + j]
            } else {
                self.slots[k - 1].col_input(r * side + j)
            };
        }
        for c in 0..side {
            self.word[side + c] = self.slots[k].row_input(j * side + c);
        }
        let status = code.locate_errors(&self.word, &mut self.positions);
        let success = match status {
            BddStatus::Clean => true,
            BddStatus::Corrected(_) => !(k == 0 && self.positions.iter().any(|&p| p < side)),
            BddStatus::Failed => false,
        };
        if success {
            for &p in &self.positions {
                self.word[p] ^= 1;
            }
        }
        let mut changes = 0;
        // messages about the previous block's column j
        if k > 0 {
            let s = &mut self.slots[k - 1];
            for r in 0..side {
                let at = r * side + j;
                let new = if success { self.word[r] } else { UNDECIDED };
                // the row codeword of that bit sees this message through row_input
                let before = s.row_input(at);
                s.msg_col[at] = new;
                if s.row_input(at) != before {
                    s.row_dirty[r] = true;
                    changes += 1;
                }
            }
        }
        let s = &mut self.slots[k];
        for c in 0..side {
            let at = j * side + c;
            let new = if success { self.word[side + c] } else { UNDECIDED };
            let before = s.col_input(at);
            s.msg_row[at] = new;
            if s.col_input(at) != before {
                s.col_dirty[c] = true;
                changes += 1;
            }
        }
        changes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bch::BchCode;
    use crate::staircase::StaircaseEncoder;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tiny(v: u32, t: usize, s: usize, m: u32) -> StaircaseParams {
        StaircaseParams::derive(BchCode::from_params(v, t, s).unwrap(), m, None).unwrap()
    }

    fn encode_stream(p: &StaircaseParams, len: usize, rng: &mut impl Rng) -> Vec<StaircaseBlock> {
        let g = *p.geometry();
        let mut enc = StaircaseEncoder::new(p.clone());
        (0..len)
            .map(|_| {
                let labels: Vec<u8> = (0..g.label_bits_per_block()).map(|_| rng.random_range(0..2)).collect();
                let signs: Vec<u8> = (0..g.sign_info_bits_per_block()).map(|_| rng.random_range(0..2)).collect();
                enc.encode(&labels, &signs).unwrap()
            })
            .collect()
    }

    fn flip(blocks: &[StaircaseBlock], p: f64, rng: &mut impl Rng) -> Vec<StaircaseBlock> {
        blocks
            .iter()
            .map(|b| {
                let mut b = b.clone();
                for x in b.bits_mut() {
                    if rng.random::<f64>() < p {
                        *x ^= 1;
                    }
                }
                b
            })
            .collect()
    }

    fn run(p: &StaircaseParams, rx: &[StaircaseBlock], w: usize, it: usize, mode: DecoderMode) -> Vec<DecodedBlock> {
        let mut dec = WindowDecoder::new(p, w, it, mode).unwrap();
        let mut out = Vec::new();
        for b in rx {
            out.extend(dec.push(b.clone()).unwrap());
        }
        out.extend(dec.finish());
        out
    }

    // Whole-array decoder written directly from the definition: every pass
    // decodes every component word, newest pair first, and never changes B_0.
    fn full_array(p: &StaircaseParams, rx: &[StaircaseBlock], it: usize, mode: DecoderMode) -> (Vec<Vec<u8>>, bool) {
        let side = p.side();
        let code = p.code();
        let len = rx.len();
        let zero = vec![0u8; side * side];
        let ch: Vec<Vec<u8>> = rx.iter().map(|b| b.bits().to_vec()).collect();
        let mut bits = ch.clone();
        let mut mrow = vec![vec![UNDECIDED; side * side]; len];
        let mut mcol = vec![vec![UNDECIDED; side * side]; len];
        let eff = |msg: u8, c: u8| if msg == UNDECIDED { c } else { msg };
        let mut converged = false;
        for _ in 0..it {
            let mut changed = 0;
            for k in (0..len).rev() {
                for j in 0..side {
                    let mut word = Vec::with_capacity(2 * side);
                    for r in 0..side {
                        let at = r * side + j;
                        word.push(match (k, mode) {
                            (0, _) => zero[at],
                            (_, DecoderMode::Intrinsic) => bits[k - 1][at],
                            (_, DecoderMode::Extrinsic) => eff(mrow[k - 1][at], ch[k - 1][at]),
                        });
                    }
                    for c in 0..side {
                        let at = j * side + c;
                        word.push(match mode {
                            DecoderMode::Intrinsic => bits[k][at],
                            DecoderMode::Extrinsic => eff(mcol[k][at], ch[k][at]),
                        });
                    }
                    let out = code.decode(&word).unwrap();
                    let touches_zero = k == 0 && (0..side).any(|r| out.word[r] != word[r]);
                    let ok = !out.failed && !touches_zero;
                    match mode {
                        DecoderMode::Intrinsic => {
                            if ok {
                                for r in 0..side {
                                    if k > 0 && bits[k - 1][r * side + j] != out.word[r] {
                                        bits[k - 1][r * side + j] = out.word[r];
                                        changed += 1;
                                    }
                                }
                                for c in 0..side {
                                    if bits[k][j * side + c] != out.word[side + c] {
                                        bits[k][j * side + c] = out.word[side + c];
                                        changed += 1;
                                    }
                                }
                            }
                        }
                        DecoderMode::Extrinsic => {
                            for r in 0..side {
                                if k > 0 {
                                    let at = r * side + j;
                                    let new = if ok { out.word[r] } else { UNDECIDED };
                                    let before = eff(mcol[k - 1][at], ch[k - 1][at]);
                                    mcol[k - 1][at] = new;
                                    if eff(new, ch[k - 1][at]) != before {
                                        changed += 1;
                                    }
                                }
                            }
                            for c in 0..side {
                                let at = j * side + c;
                                let new = if ok { out.word[side + c] } else { UNDECIDED };
                                let before = eff(mrow[k][at], ch[k][at]);
                                mrow[k][at] = new;
                                if eff(new, ch[k][at]) != before {
                                    changed += 1;
                                }
                            }
                        }
                    }
                }
            }
            if changed == 0 {
                converged = true;
                break;
            }
        }
        let out = match mode {
            DecoderMode::Intrinsic => bits,
            DecoderMode::Extrinsic => (0..len)
                .map(|k| {
                    (0..side * side)
                        .map(|i| match (mrow[k][i], mcol[k][i]) {
                            (UNDECIDED, UNDECIDED) => ch[k][i],
                            (v, UNDECIDED) | (UNDECIDED, v) => v,
                            (a, b) if a == b => a,
                            _ => ch[k][i],
                        })
                        .collect()
                })
                .collect(),
        };
        (out, converged)
    }

    #[test]
    fn noiseless_passes_through_in_one_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = tiny(10, 3, 783, 4);
        let tx = encode_stream(&p, 20, &mut rng);
        for mode in [DecoderMode::Intrinsic, DecoderMode::Extrinsic] {
            let out = run(&p, &tx, 7, 8, mode);
            assert_eq!(out.len(), tx.len());
            for (d, b) in out.iter().zip(&tx) {
                assert_eq!(&d.block, b);
                assert_eq!(d.iterations, 1);
                assert!(d.converged);
            }
        }
    }

    #[test]
    fn zero_iterations_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = tiny(5, 1, 3, 2);
        let tx = encode_stream(&p, 10, &mut rng);
        let rx = flip(&tx, 0.05, &mut rng);
        let out = run(&p, &rx, 3, 0, DecoderMode::Intrinsic);
        for (d, b) in out.iter().zip(&rx) {
            assert_eq!(&d.block, b);
            assert_eq!(d.iterations, 0);
        }
    }

    #[test]
    fn corrects_one_component_word_in_one_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = tiny(10, 3, 647, 4);
        let side = p.side();
        let tx = encode_stream(&p, 10, &mut rng);
        for mode in [DecoderMode::Intrinsic, DecoderMode::Extrinsic] {
            for trial in 0..10 {
                let mut rx = tx.clone();
                // t errors inside the codeword (column j of B_k, row j of B_{k+1})
                let k = 1 + trial % 7;
                let j = rng.random_range(0..side);
                let mut picks = rand::seq::index::sample(&mut rng, 2 * side, 3).into_vec();
                picks.sort();
                for pos in picks {
                    if pos < side {
                        rx[k - 1].bits_mut()[pos * side + j] ^= 1;
                    } else {
                        rx[k].bits_mut()[j * side + pos - side] ^= 1;
                    }
                }
                let mut dec = WindowDecoder::new(&p, 10, 1, mode).unwrap();
                let mut out = Vec::new();
                for b in &rx {
                    out.extend(dec.push(b.clone()).unwrap());
                }
                assert_eq!(out.len(), 1);
                out.extend(dec.finish());
                for (d, b) in out.iter().zip(&tx) {
                    assert_eq!(&d.block, b, "mode={mode:?} block {}", d.index);
                }
            }
        }
    }

    #[test]
    fn matches_full_array_oracle_on_tiny_codes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (v, t, s, m) in [(5u32, 1usize, 3usize, 2u32), (6, 2, 7, 2)] {
            let p = tiny(v, t, s, m);
            for mode in [DecoderMode::Intrinsic, DecoderMode::Extrinsic] {
                let mut converged_runs = 0;
                for trial in 0..200 {
                    let len = 2 + trial % 6;
                    let tx = encode_stream(&p, len, &mut rng);
                    let rx = flip(&tx, 0.01 + 0.03 * rng.random::<f64>(), &mut rng);
                    let it = 1 + trial % 8;
                    let (oracle, converged) = full_array(&p, &rx, it, mode);
                    let out = run(&p, &rx, 8, it, mode);
                    assert_eq!(out[0].block.bits(), &oracle[0][..], "mode={mode:?} trial={trial}");
                    if converged {
                        converged_runs += 1;
                        for (d, o) in out.iter().zip(&oracle) {
                            assert_eq!(d.block.bits(), &o[..], "mode={mode:?} trial={trial}");
                        }
                    }
                }
                assert!(converged_runs > 20);
            }
        }
    }

    #[test]
    fn rejects_bad_window_and_sizes() {
        let p = tiny(5, 1, 3, 2);
        assert!(WindowDecoder::new(&p, 1, 8, DecoderMode::Intrinsic).is_err());
        let mut dec = WindowDecoder::new(&p, 2, 8, DecoderMode::Intrinsic).unwrap();
        assert!(dec.push(StaircaseBlock::zero(3)).is_err());
    }
}
