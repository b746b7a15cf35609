//! Monte Carlo sweeps over SNR.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modem::{compute_delta, AwgnChannel, Constellation, MapDetector};
use crate::rates::{pre_fec_ber_with, r_hdd, r_hdd_sup};
use crate::shaping::{optimize_lambda, CcdmCodec, ShapingDistribution};

use super::chain::{run_chain_frame, Counters, PointSetup};
use super::config::{ResolvedConfig, SimConfig};

/// Two-sided 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let denom = 1.0 + z * z / n_f;
    let centre = (p + z * z / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z * z / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Builds the per-SNR chain state.
pub fn point_setup(cfg: &ResolvedConfig, snr_db: f64) -> Result<PointSetup> {
    let m = cfg.m();
    let lambda = match cfg.config.shaping.lambda {
        Some(l) => l,
        None => optimize_lambda(m, snr_db)?,
    };
    let dist = ShapingDistribution::maxwell_boltzmann(m, lambda)?;
    let codec = CcdmCodec::new(dist.pa(), cfg.params.n())?;
    let realised = ShapingDistribution::from_amplitude_pmf(m, &codec.composition_pmf())?;
    let constellation = Constellation::new(m)?;
    let px = realised.px().to_vec();
    let delta = compute_delta(&constellation, &px, snr_db);
    let channel = if cfg.config.noiseless {
        AwgnChannel::noiseless(delta)
    } else {
        AwgnChannel::new(delta)
    };
    let detector = MapDetector::new(&constellation, &px, delta)?;
    Ok(PointSetup {
        params: cfg.params.clone(),
        constellation,
        codec,
        lambda,
        px,
        channel,
        detector,
    })
}

/// Result of one SNR point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub snr_db: f64,
    pub lambda: f64,
    pub delta: f64,
    /// Matcher input bits and composition.
    pub k_dm: usize,
    pub composition: Vec<u32>,
    pub counters: Counters,
    pub bler: f64,
    pub bler_ci: (f64, f64),
    pub pre_fec_ber: f64,
    /// Standard error of `pre_fec_ber`, from the per-symbol error counts.
    pub pre_fec_ber_std: f64,
    /// Detector-output bit error probability computed from the same
    /// composition and detector.
    pub pre_fec_ber_analytic: f64,
    /// Information-bit error rate after decoding.
    pub post_fec_ber: f64,
    /// Code-bit error rate after decoding.
    pub post_fec_code_ber: f64,
    /// Payload-bit error rate after dematching.
    pub payload_ber: f64,
    /// Spectral efficiency per channel use from the realised matcher rate,
    /// `(k_dm + gamma n) / n` per rail.
    pub se_realised: f64,
    /// Spectral efficiency per channel use from the entropy, `H(A) + gamma`
    /// per rail.
    pub se_entropy: f64,
    /// Hard-decision achievable rate of the shaped distribution per channel
    /// use, closed form and sup form.
    pub r_hdd: f64,
    pub r_hdd_sup: f64,
    /// Fewer than `min_block_errors` errors were seen before the block budget
    /// ran out; `bler` and its interval are then only an upper-bound estimate.
    pub budget_exhausted: bool,
    pub wall_time_s: f64,
}

impl SimPoint {
    /// Upper end of the BLER confidence interval.
    pub fn bler_upper(&self) -> f64 {
        self.bler_ci.1
    }
}

/// Simulates one SNR point under the configured stopping rule.
pub fn simulate_point(cfg: &ResolvedConfig, snr_db: f64) -> Result<SimPoint> {
    let start = Instant::now();
    let setup = point_setup(cfg, snr_db)?;
    let tr = &cfg.config.trials;
    let rails = cfg.format().rails();
    let per_stream = tr.stream_blocks as u64 * rails;
    let mut total = Counters::default();
    let mut next_stream = 0u64;
    loop {
        let done_min = total.blocks >= tr.min_blocks && total.block_errors >= tr.min_block_errors;
        if done_min || total.blocks >= tr.max_blocks {
            break;
        }
        let remaining = tr.max_blocks - total.blocks;
        let streams = (tr.batch_streams as u64).min(remaining.div_ceil(per_stream));
        let jobs: Vec<(u64, u64)> = (next_stream..next_stream + streams)
            .flat_map(|s| (0..rails).map(move |r| (r, s)))
            .collect();
        let outcomes: Vec<Counters> = jobs
            .par_iter()
            .map(|&(rail, s)| run_chain_frame(cfg, &setup, rail, s).map(|o| o.counters))
            .collect::<Result<_>>()?;
        for c in &outcomes {
            total.merge(c);
        }
        next_stream += streams;
    }
    summarise(cfg, &setup, snr_db, total, start.elapsed().as_secs_f64())
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn summarise(cfg: &ResolvedConfig, setup: &PointSetup, snr_db: f64, c: Counters, wall: f64) -> Result<SimPoint> {
    let m = cfg.m();
    let g = setup.params.geometry();
    let gamma = setup.params.gamma();
    let factor = cfg.format().rails() as f64;
    let dist = ShapingDistribution::maxwell_boltzmann(m, setup.lambda)?;
    let pre = ratio(c.pre_fec_bit_errors, c.pre_fec_bits);
    let pre_std = if c.symbols > 1 {
        // per-symbol error counts e_q; BER = mean(e) / m
        let n = c.symbols as f64;
        let mean = c.pre_fec_bit_errors as f64 / n;
        let var = (c.pre_fec_sq_errors as f64 / n - mean * mean).max(0.0);
        (var / n).sqrt() / m as f64
    } else {
        0.0
    };
    let rate_sup = r_hdd_sup(&dist, snr_db, cfg.config.shaping.epsilon)?;
    Ok(SimPoint {
        snr_db,
        lambda: setup.lambda,
        delta: setup.channel.delta,
        k_dm: setup.codec.input_bits(),
        composition: setup.codec.composition().to_vec(),
        bler: ratio(c.block_errors, c.blocks),
        bler_ci: wilson_interval(c.block_errors, c.blocks),
        pre_fec_ber: pre,
        pre_fec_ber_std: pre_std,
        pre_fec_ber_analytic: pre_fec_ber_with(&setup.detector, &setup.px),
        post_fec_ber: ratio(c.info_bit_errors, c.info_bits),
        post_fec_code_ber: ratio(c.code_bit_errors, c.code_bits),
        payload_ber: ratio(c.payload_bit_errors, c.payload_bits),
        se_realised: factor * (setup.codec.input_bits() + g.sign_info_bits_per_block()) as f64 / g.n as f64,
        se_entropy: factor * (dist.entropy_a() + gamma),
        r_hdd: factor * r_hdd(&dist, snr_db),
        r_hdd_sup: factor * rate_sup,
        budget_exhausted: c.block_errors < cfg.config.trials.min_block_errors,
        wall_time_s: wall,
        counters: c,
    })
}

/// Outcome of a sweep: the resolved configuration and one row per SNR.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub s: usize,
    pub gamma: f64,
    pub n: usize,
    pub points: Vec<SimPoint>,
}

impl SimResult {
    /// True when BLER does not increase with SNR beyond what the confidence
    /// intervals allow.
    pub fn bler_monotone(&self) -> bool {
        let mut pts: Vec<&SimPoint> = self.points.iter().collect();
        pts.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
        pts.windows(2).all(|w| w[1].bler_ci.0 <= w[0].bler_ci.1)
    }
}

/// Simulates every SNR in the configuration in order.
pub fn run_sweep(config: &SimConfig) -> Result<SimResult> {
    let cfg = config.resolve()?;
    let points = cfg
        .config
        .snr_db
        .iter()
        .map(|&snr| simulate_point(&cfg, snr))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimResult {
        s: cfg.params.code().shortening(),
        gamma: cfg.params.gamma(),
        n: cfg.params.n(),
        config: cfg.config,
        points,
    })
}

/// Bisection for the smallest SNR whose estimated BLER is at most `target`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlerSearch {
    pub target: f64,
    pub snr_db: f64,
    /// Every evaluated point, in evaluation order.
    pub evaluations: Vec<SimPoint>,
}

pub fn snr_for_target_bler(config: &SimConfig, target: f64, lo_db: f64, hi_db: f64, tol_db: f64) -> Result<BlerSearch> {
    if !(target > 0.0 && target < 1.0) || !(lo_db < hi_db) || !(tol_db > 0.0) {
        return Err(Error::Parameter(format!(
            "bad search: target={target}, bracket=[{lo_db}, {hi_db}], tol={tol_db}"
        )));
    }
    let cfg = config.resolve()?;
    let mut evaluations = Vec::new();
    let eval = |snr: f64, evaluations: &mut Vec<SimPoint>| -> Result<bool> {
        let p = simulate_point(&cfg, snr)?;
        let ok = p.bler <= target;
        evaluations.push(p);
        Ok(ok)
    };
    if !eval(hi_db, &mut evaluations)? {
        return Err(Error::Unreachable(format!("BLER above {target} at {hi_db} dB")));
    }
    if eval(lo_db, &mut evaluations)? {
        return Ok(BlerSearch {
            target,
            snr_db: lo_db,
            evaluations,
        });
    }
    let (mut lo, mut hi) = (lo_db, hi_db);
    while hi - lo > tol_db {
        let mid = 0.5 * (lo + hi);
        if eval(mid, &mut evaluations)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BlerSearch {
        target,
        snr_db: hi,
        evaluations,
    })
}

