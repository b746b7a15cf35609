//! ASK constellation handling: labelling, the amplitude-to-bit and
//! bit-to-sign mappers, power normalisation, the AWGN channel and symbol-wise
//! MAP hard detection.
//!
//! Points of the `2^m`-ASK alphabet are `-(2^m - 1), ..., -1, 1, ..., 2^m - 1`
//! and are indexed in ascending order. Amplitudes `1, 3, ..., 2^m - 1` are
//! indexed `0 .. 2^(m-1)`.
//!
//! Labelling convention: the amplitude with index `k` carries the
//! `(m-1)`-bit binary reflected Gray code `k ^ (k >> 1)`, most significant bit
//! first. The `m`-bit label of a point is its sign bit (`1` for positive,
//! matching `s = 2t - 1`) followed by the amplitude label. This differs from
//! the textbook BRGC of the ASK points only by a fixed XOR mask on the
//! amplitude bits, so all Hamming distances, and hence all bit error rates,
//! are identical. SNR is per real dimension; QAM is two independent ASK rails.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Binary reflected Gray code of `k`.
#[inline]
pub fn gray(k: u32) -> u32 {
    k ^ (k >> 1)
}

/// Inverse of [`gray`].
#[inline]
pub fn gray_inverse(mut g: u32) -> u32 {
    let mut k = g;
    while g > 1 {
        g >>= 1;
        k ^= g;
    }
    k
}

/// `2^m`-ASK alphabet with its labelling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constellation {
    m: u32,
}

impl Constellation {
    pub fn new(m: u32) -> Result<Self> {
        if !(1..=10).contains(&m) {
            return Err(Error::Parameter(format!("bits per symbol m={m} outside 1..=10")));
        }
        Ok(Self { m })
    }

    /// Bits per ASK symbol.
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn num_points(&self) -> usize {
        1 << self.m
    }

    pub fn num_amplitudes(&self) -> usize {
        1 << (self.m - 1)
    }

    /// Point with ascending index `i`.
    #[inline]
    pub fn point(&self, i: usize) -> i32 {
        2 * i as i32 - (self.num_points() as i32 - 1)
    }

    pub fn points(&self) -> Vec<i32> {
        (0..self.num_points()).map(|i| self.point(i)).collect()
    }

    /// Index of point `x`, if it belongs to the alphabet.
    pub fn index_of(&self, x: i32) -> Option<usize> {
        let shifted = x + self.num_points() as i32 - 1;
        if shifted < 0 || shifted % 2 != 0 || shifted / 2 >= self.num_points() as i32 {
            None
        } else {
            Some((shifted / 2) as usize)
        }
    }

    /// Amplitude `2k + 1` for amplitude index `k`.
    #[inline]
    pub fn amplitude(&self, k: usize) -> u32 {
        2 * k as u32 + 1
    }

    pub fn amplitudes(&self) -> Vec<u32> {
        (0..self.num_amplitudes()).map(|k| self.amplitude(k)).collect()
    }

    /// Index of amplitude `a`, if valid.
    pub fn amplitude_index(&self, a: u32) -> Option<usize> {
        if a % 2 == 1 && (a as usize) < self.num_points() {
            Some((a / 2) as usize)
        } else {
            None
        }
    }

    /// `(m-1)`-bit label of amplitude index `k`.
    #[inline]
    pub fn amplitude_label(&self, k: usize) -> u32 {
        gray(k as u32)
    }

    /// `m`-bit label of point index `i`: sign bit followed by the amplitude label.
    pub fn label(&self, i: usize) -> u32 {
        let half = self.num_amplitudes();
        let (sign, k) = if i >= half {
            (1u32, i - half)
        } else {
            (0u32, half - 1 - i)
        };
        (sign << (self.m - 1)) | self.amplitude_label(k)
    }

    /// Amplitude index of point index `i`.
    #[inline]
    pub fn amplitude_index_of_point(&self, i: usize) -> usize {
        let half = self.num_amplitudes();
        if i >= half {
            i - half
        } else {
            half - 1 - i
        }
    }

    /// Point index of the signed amplitude.
    #[inline]
    pub fn point_index(&self, amplitude_index: usize, positive: bool) -> usize {
        let half = self.num_amplitudes();
        if positive {
            half + amplitude_index
        } else {
            half - 1 - amplitude_index
        }
    }

    /// Amplitude-to-bit mapper: concatenated `(m-1)`-bit labels.
    pub fn map_amplitudes_to_bits(&self, amplitudes: &[u32]) -> Result<Vec<u8>> {
        let w = (self.m - 1) as usize;
        let mut bits = Vec::with_capacity(amplitudes.len() * w);
        for &a in amplitudes {
            let k = self
                .amplitude_index(a)
                .ok_or_else(|| Error::Input(format!("amplitude {a} not in the {}-ASK alphabet", self.num_points())))?;
            let label = self.amplitude_label(k);
            bits.extend((0..w).rev().map(|b| ((label >> b) & 1) as u8));
        }
        Ok(bits)
    }

    /// Inverse of [`map_amplitudes_to_bits`](Self::map_amplitudes_to_bits)
    /// returning amplitude indices.
    pub fn bits_to_amplitude_indices(&self, bits: &[u8], out: &mut Vec<usize>) -> Result<()> {
        let w = (self.m - 1) as usize;
        if w == 0 {
            out.clear();
            return Ok(());
        }
        if bits.len() % w != 0 {
            return Err(Error::Input(format!(
                "label bit count {} is not a multiple of {w}",
                bits.len()
            )));
        }
        out.clear();
        out.extend(bits.chunks_exact(w).map(|chunk| {
            let label = chunk.iter().fold(0u32, |acc, &b| (acc << 1) | (b as u32 & 1));
            gray_inverse(label) as usize
        }));
        Ok(())
    }

    /// Inverse amplitude mapper returning amplitudes.
    pub fn map_bits_to_amplitudes(&self, bits: &[u8]) -> Result<Vec<u32>> {
        let mut idx = Vec::new();
        self.bits_to_amplitude_indices(bits, &mut idx)?;
        Ok(idx.into_iter().map(|k| self.amplitude(k)).collect())
    }

    /// Second moment `E[X^2]` under a pmf over point indices.
    pub fn second_moment(&self, pmf: &[f64]) -> f64 {
        pmf.iter()
            .enumerate()
            .map(|(i, &p)| {
                let x = self.point(i) as f64;
                p * x * x
            })
            .sum()
    }
}

/// Bit-to-sign mapper `s = 2t - 1`.
pub fn map_bits_to_signs(bits: &[u8]) -> Vec<i8> {
    bits.iter().map(|&t| 2 * (t & 1) as i8 - 1).collect()
}

/// Linear power from decibels.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Scaling `Delta` such that `E[(Delta X)^2] = P = 10^(snr_db/10)`.
pub fn compute_delta(constellation: &Constellation, pmf: &[f64], snr_db: f64) -> f64 {
    (db_to_linear(snr_db) / constellation.second_moment(pmf)).sqrt()
}

/// Real AWGN channel `y = Delta x + z` with `z ~ N(0, noise_std^2)`.
///
/// `noise_std` is 1 for the channel model; other values are a test hook.
#[derive(Clone, Copy, Debug)]
pub struct AwgnChannel {
    pub delta: f64,
    pub noise_std: f64,
}

impl AwgnChannel {
    pub fn new(delta: f64) -> Self {
        Self { delta, noise_std: 1.0 }
    }

    /// Noiseless variant.
    pub fn noiseless(delta: f64) -> Self {
        Self { delta, noise_std: 0.0 }
    }

    pub fn transmit_into<R: Rng + ?Sized>(&self, x: &[i32], rng: &mut R, y: &mut Vec<f64>) {
        y.clear();
        y.extend(x.iter().map(|&xi| {
            let z: f64 = rng.sample(StandardNormal);
            self.delta * xi as f64 + self.noise_std * z
        }));
    }

    pub fn transmit<R: Rng + ?Sized>(&self, x: &[i32], rng: &mut R) -> Vec<f64> {
        let mut y = Vec::with_capacity(x.len());
        self.transmit_into(x, rng, &mut y);
        y
    }
}

/// Symbol-wise MAP detector for a scaled ASK alphabet with unit-variance noise.
///
/// The decision regions are intervals; the detector stores the points that
/// own a non-empty region and the thresholds between consecutive ones. Ties
/// at a threshold go to the point with smaller magnitude.
#[derive(Clone, Debug)]
pub struct MapDetector {
    constellation: Constellation,
    delta: f64,
    // Point indices with non-empty decision regions, ascending.
    owners: Vec<usize>,
    // thresholds[k] separates owners[k] and owners[k+1].
    thresholds: Vec<f64>,
}

impl MapDetector {
    pub fn new(constellation: &Constellation, prior: &[f64], delta: f64) -> Result<Self> {
        if prior.len() != constellation.num_points() {
            return Err(Error::Length {
                what: "detector prior",
                expected: constellation.num_points(),
                got: prior.len(),
            });
        }
        if !(delta > 0.0) {
            return Err(Error::Parameter(format!("scaling delta={delta} must be positive")));
        }
        // Log-posterior of point i is linear in y: slope delta*x_i,
        // intercept ln P(x_i) - delta^2 x_i^2 / 2. MAP regions follow the
        // upper envelope of these lines.
        let line = |i: usize| {
            let x = constellation.point(i) as f64;
            (delta * x, prior[i].ln() - 0.5 * delta * delta * x * x)
        };
        let cross = |a: usize, b: usize| {
            let (sa, ca) = line(a);
            let (sb, cb) = line(b);
            (ca - cb) / (sb - sa)
        };
        let mut owners: Vec<usize> = Vec::new();
        for i in (0..constellation.num_points()).filter(|&i| prior[i] > 0.0) {
            while owners.len() >= 2 {
                let a = owners[owners.len() - 2];
                let b = owners[owners.len() - 1];
                if cross(a, i) <= cross(a, b) {
                    owners.pop();
                } else {
                    break;
                }
            }
            owners.push(i);
        }
        if owners.is_empty() {
            return Err(Error::Parameter("detector prior has no support".into()));
        }
        let thresholds = owners.windows(2).map(|w| cross(w[0], w[1])).collect();
        Ok(Self {
            constellation: constellation.clone(),
            delta,
            owners,
            thresholds,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Decision interval `(lo, hi)` of every point index; empty regions are `None`.
    pub fn regions(&self) -> Vec<Option<(f64, f64)>> {
        let mut out = vec![None; self.constellation.num_points()];
        for (k, &i) in self.owners.iter().enumerate() {
            let lo = if k == 0 { f64::NEG_INFINITY } else { self.thresholds[k - 1] };
            let hi = self.thresholds.get(k).copied().unwrap_or(f64::INFINITY);
            out[i] = Some((lo, hi));
        }
        out
    }

    /// Detected point index for observation `y`.
    #[inline]
    pub fn detect_index(&self, y: f64) -> usize {
        let k = self.thresholds.partition_point(|&t| t < y);
        if k < self.thresholds.len() && self.thresholds[k] == y {
            let a = self.owners[k];
            let b = self.owners[k + 1];
            let (xa, xb) = (self.constellation.point(a), self.constellation.point(b));
            return if xa.abs() < xb.abs() { a } else { b };
        }
        self.owners[k]
    }

    /// Detected point value.
    pub fn detect(&self, y: f64) -> i32 {
        self.constellation.point(self.detect_index(y))
    }
}
