//! One end-to-end transmission chain per ASK rail.
//!
//! Uniform payload bits are split into `u^a` (matcher input) and `u^s` (sign
//! information). The matcher output is labelled, placed into the staircase
//! block together with `u^s`, and encoded; the parity and `u^s` bits of each
//! row become the signs of that row's symbols. After AWGN and MAP detection
//! the hard decisions are mapped back to a received block and decoded by the
//! sliding window, and the dematcher recovers `u^a`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::modem::{AwgnChannel, Constellation, MapDetector};
use crate::shaping::CcdmCodec;
use crate::staircase::{Geometry, StaircaseBlock, StaircaseEncoder, StaircaseParams, WindowDecoder};

use super::config::ResolvedConfig;

/// Randomness consumers within one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    Payload = 1,
    Noise = 2,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for one `(rail, stream, block, stage)` cell of a seeded run.
/// Every cell is independent of the order in which cells are visited, so
/// serial and parallel runs draw identical numbers.
pub fn cell_rng(seed: u64, rail: u64, stream: u64, block: u64, stage: Stage) -> ChaCha8Rng {
    let mut h = splitmix64(seed);
    for word in [rail, stream, block, stage as u64] {
        h = splitmix64(h ^ word);
    }
    ChaCha8Rng::seed_from_u64(h)
}

fn fill_bits(rng: &mut impl Rng, out: &mut [u8]) {
    for chunk in out.chunks_mut(64) {
        let w: u64 = rng.random();
        for (i, b) in chunk.iter_mut().enumerate() {
            *b = ((w >> i) & 1) as u8;
        }
    }
}

/// Everything that depends on the SNR but not on the block.
#[derive(Clone, Debug)]
pub struct PointSetup {
    pub params: StaircaseParams,
    pub constellation: Constellation,
    pub codec: CcdmCodec,
    pub lambda: f64,
    /// Point pmf implied by the matcher composition, used both to scale the
    /// alphabet and as the detector prior.
    pub px: Vec<f64>,
    pub channel: AwgnChannel,
    pub detector: MapDetector,
}

/// Counters accumulated over blocks. Addition is associative, so any
/// grouping of streams gives the same totals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub blocks: u64,
    pub block_errors: u64,
    /// Staircase information bits (labels and `u^s`) compared after decoding.
    pub info_bits: u64,
    pub info_bit_errors: u64,
    /// All code bits compared after decoding.
    pub code_bits: u64,
    pub code_bit_errors: u64,
    /// Code bits compared at the detector output.
    pub pre_fec_bits: u64,
    pub pre_fec_bit_errors: u64,
    /// Sum over symbols of the squared number of bit errors per symbol.
    pub pre_fec_sq_errors: u64,
    pub symbols: u64,
    /// Transmitted point histogram.
    pub symbol_counts: Vec<u64>,
    /// Payload bits `k + gamma n` per block, summed.
    pub payload_bits: u64,
    pub payload_bit_errors: u64,
    /// Blocks whose decoded amplitudes did not have the matcher composition.
    pub dematch_failures: u64,
    pub decoder_iterations: u64,
    pub unconverged_blocks: u64,
}

impl Counters {
    pub fn merge(&mut self, other: &Counters) {
        self.blocks += other.blocks;
        self.block_errors += other.block_errors;
        self.info_bits += other.info_bits;
        self.info_bit_errors += other.info_bit_errors;
        self.code_bits += other.code_bits;
        self.code_bit_errors += other.code_bit_errors;
        self.pre_fec_bits += other.pre_fec_bits;
        self.pre_fec_bit_errors += other.pre_fec_bit_errors;
        self.pre_fec_sq_errors += other.pre_fec_sq_errors;
        self.symbols += other.symbols;
        if self.symbol_counts.len() < other.symbol_counts.len() {
            self.symbol_counts.resize(other.symbol_counts.len(), 0);
        }
        for (a, b) in self.symbol_counts.iter_mut().zip(&other.symbol_counts) {
            *a += b;
        }
        self.payload_bits += other.payload_bits;
        self.payload_bit_errors += other.payload_bit_errors;
        self.dematch_failures += other.dematch_failures;
        self.decoder_iterations += other.decoder_iterations;
        self.unconverged_blocks += other.unconverged_blocks;
    }
}

/// What was sent in one counted block.
struct Sent {
    block: StaircaseBlock,
    payload_a: Vec<u8>,
}

/// Per-block outcome of one stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamOutcome {
    /// Block error indicator of every counted block, in stream order.
    pub errors: Vec<bool>,
    pub counters: Counters,
}

/// Runs stream `stream` of rail `rail`: `stream_blocks` counted blocks
/// followed by the tail, starting from the all-zero block.
pub fn run_chain_frame(cfg: &ResolvedConfig, setup: &PointSetup, rail: u64, stream: u64) -> Result<StreamOutcome> {
    let counted = cfg.config.trials.stream_blocks;
    let total = counted + cfg.tail_blocks();
    let dec = &cfg.config.decoder;
    let seed = cfg.config.seed;
    let params = &setup.params;
    let g = *params.geometry();
    let con = &setup.constellation;
    let w = (con.m() - 1) as usize;
    let side = g.side;

    let mut encoder = StaircaseEncoder::new(params.clone());
    let mut decoder = if dec.iterations > 0 {
        Some(WindowDecoder::new(params, dec.window, dec.iterations, dec.mode)?)
    } else {
        None
    };
    let mut sent: VecDeque<Sent> = VecDeque::new();
    let mut outcome = StreamOutcome {
        errors: Vec::with_capacity(counted),
        counters: Counters {
            symbol_counts: vec![0; con.num_points()],
            ..Counters::default()
        },
    };

    let k_in = setup.codec.input_bits();
    let mut payload_a = vec![0u8; k_in];
    let mut payload_s = vec![0u8; g.sign_info_bits_per_block()];
    let mut labels = vec![0u8; g.label_bits_per_block()];
    let mut x = vec![0i32; g.n];
    let mut tx_points = vec![0usize; g.n];
    let mut y = Vec::with_capacity(g.n);
    let mut dec_indices = Vec::with_capacity(g.n);

    for b in 0..total {
        let mut rng = cell_rng(seed, rail, stream, b as u64, Stage::Payload);
        fill_bits(&mut rng, &mut payload_a);
        fill_bits(&mut rng, &mut payload_s);
        let amps = setup.codec.encode_indices(&payload_a)?;
        for (q, &k) in amps.iter().enumerate() {
            let label = con.amplitude_label(k);
            for (bit, slot) in labels[q * w..(q + 1) * w].iter_mut().enumerate() {
                *slot = ((label >> (w - 1 - bit)) & 1) as u8;
            }
        }
        let block = encoder.encode(&labels, &payload_s)?;
        for j in 0..side {
            for (i, sign) in block.sign_bits_of_row(&g, j).enumerate() {
                let q = j * g.symbols_per_row + i;
                let pi = con.point_index(amps[q], sign == 1);
                tx_points[q] = pi;
                x[q] = con.point(pi);
            }
        }

        let mut noise = cell_rng(seed, rail, stream, b as u64, Stage::Noise);
        setup.channel.transmit_into(&x, &mut noise, &mut y);

        // hard decisions back into block layout
        let mut rx = StaircaseBlock::zero(side);
        let counted_block = b < counted;
        {
            let bits = rx.bits_mut();
            for j in 0..side {
                let row = &mut bits[j * side..(j + 1) * side];
                for i in 0..g.symbols_per_row {
                    let q = j * g.symbols_per_row + i;
                    let pi = setup.detector.detect_index(y[q]);
                    let label = con.label(pi);
                    for bit in 0..w {
                        row[i * w + bit] = ((label >> (w - 1 - bit)) & 1) as u8;
                    }
                    let sign = (label >> w) as u8 & 1;
                    if i < g.parity {
                        row[g.alpha + i] = sign;
                    } else {
                        row[g.alpha_b + i - g.parity] = sign;
                    }
                    if counted_block {
                        let e = (con.label(tx_points[q]) ^ label).count_ones() as u64;
                        let c = &mut outcome.counters;
                        c.pre_fec_bit_errors += e;
                        c.pre_fec_sq_errors += e * e;
                        c.symbol_counts[tx_points[q]] += 1;
                    }
                }
            }
        }
        if counted_block {
            let c = &mut outcome.counters;
            c.symbols += g.n as u64;
            c.pre_fec_bits += (side * side) as u64;
            sent.push_back(Sent {
                block,
                payload_a: payload_a.clone(),
            });
        }

        let decoded = match decoder.as_mut() {
            Some(d) => d.push(rx)?.map(|o| (o.block, o.iterations, o.converged)),
            None => Some((rx, 0, true)),
        };
        if let Some((blk, iters, converged)) = decoded {
            if let Some(s) = sent.pop_front() {
                score(setup, &g, &s, &blk, iters, converged, &mut dec_indices, &mut outcome)?;
            }
        }
    }
    if !sent.is_empty() {
        if let Some(d) = decoder.as_mut() {
            for o in d.finish() {
                match sent.pop_front() {
                    Some(s) => score(setup, &g, &s, &o.block, o.iterations, o.converged, &mut dec_indices, &mut outcome)?,
                    None => break,
                }
            }
        }
    }
    Ok(outcome)
}

#[allow(clippy::too_many_arguments)]
fn score(
    setup: &PointSetup,
    g: &Geometry,
    sent: &Sent,
    got: &StaircaseBlock,
    iterations: usize,
    converged: bool,
    indices: &mut Vec<usize>,
    outcome: &mut StreamOutcome,
) -> Result<()> {
    let side = g.side;
    let c = &mut outcome.counters;
    let (tx, rx) = (sent.block.bits(), got.bits());
    let code_errors = tx.iter().zip(rx).filter(|(a, b)| a != b).count() as u64;
    let mut info_errors = 0u64;
    for j in 0..side {
        let r = j * side..j * side + g.alpha;
        info_errors += tx[r.clone()].iter().zip(&rx[r]).filter(|(a, b)| a != b).count() as u64;
    }
    // sign information compares directly; the label part goes through the
    // dematcher
    let sign_errors = sent
        .block
        .sign_info(g)
        .iter()
        .zip(got.sign_info(g))
        .filter(|(a, b)| **a != *b)
        .count() as u64;
    setup.constellation.bits_to_amplitude_indices(&got.label_bits(g), indices)?;
    let k_in = sent.payload_a.len() as u64;
    let payload_a_errors = match setup.codec.decode_indices(indices) {
        Ok(bits) => bits.iter().zip(&sent.payload_a).filter(|(a, b)| a != b).count() as u64,
        Err(_) => {
            c.dematch_failures += 1;
            k_in
        }
    };
    c.blocks += 1;
    c.info_bits += (side * g.alpha) as u64;
    c.info_bit_errors += info_errors;
    c.code_bits += (side * side) as u64;
    c.code_bit_errors += code_errors;
    c.payload_bits += k_in + g.sign_info_bits_per_block() as u64;
    c.payload_bit_errors += payload_a_errors + sign_errors;
    c.decoder_iterations += iterations as u64;
    if !converged {
        c.unconverged_blocks += 1;
    }
    let error = payload_a_errors + sign_errors > 0;
    if error {
        c.block_errors += 1;
    }
    outcome.errors.push(error);
    Ok(())
}
