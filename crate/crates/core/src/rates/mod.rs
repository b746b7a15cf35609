//! Achievable-rate analytics for ASK with a symbol-wise MAP hard detector.
//!
//! SNR is always per real dimension with unit noise variance; QAM numbers
//! are twice the ASK numbers at the same SNR.

mod codes;
mod planner;
mod quad;

pub use codes::{search_code_params, CodeParams};
pub use planner::{
    operating_point, shaped_r_hdd, shaping_gain, snr_for_rate, Crossing, OperatingPoint,
    CROSSING_TOLERANCE_DB, GAIN_TOLERANCE_DB, SCAN_MAX_DB, SCAN_MIN_DB, SCAN_STEP_DB,
};

use crate::error::Result;
use crate::modem::{compute_delta, Constellation, MapDetector};
use crate::shaping::{optimize_lambda, ShapingDistribution};

/// `H_b(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Gaussian tail `Q(z) = P(Z > z)`.
pub fn q_function(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// `P(a < Z < b)` for a standard normal `Z`, evaluated on whichever side
/// keeps both tails small so deep-tail probabilities keep full precision.
pub fn normal_interval(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let p = if a >= 0.0 {
        q_function(a) - q_function(b)
    } else if b <= 0.0 {
        q_function(-b) - q_function(-a)
    } else {
        1.0 - q_function(-a) - q_function(b)
    };
    p.max(0.0)
}

/// Row-major `P(x_hat | x)` for the detector, indexed by point indices.
pub fn transition_matrix(detector: &MapDetector) -> Vec<f64> {
    let c = detector.constellation();
    let size = c.num_points();
    let delta = detector.delta();
    let regions = detector.regions();
    let mut out = vec![0.0; size * size];
    for i in 0..size {
        let mean = delta * c.point(i) as f64;
        for (j, region) in regions.iter().enumerate() {
            if let Some((lo, hi)) = *region {
                out[i * size + j] = normal_interval(lo - mean, hi - mean);
            }
        }
    }
    out
}

/// Pre-FEC bit error probability for transmit pmf `px` (over point indices)
/// seen through `detector`. The detector prior need not equal `px`.
pub fn pre_fec_ber_with(detector: &MapDetector, px: &[f64]) -> f64 {
    let c = detector.constellation();
    let size = c.num_points();
    let trans = transition_matrix(detector);
    let mut acc = 0.0;
    for i in 0..size {
        if px[i] <= 0.0 {
            continue;
        }
        let li = c.label(i);
        let mut row = 0.0;
        for j in 0..size {
            if j != i {
                row += trans[i * size + j] * (li ^ c.label(j)).count_ones() as f64;
            }
        }
        acc += px[i] * row;
    }
    acc / c.m() as f64
}

fn matched_detector(dist: &ShapingDistribution, snr_db: f64) -> Result<MapDetector> {
    let c = Constellation::new(dist.m())?;
    let delta = compute_delta(&c, dist.px(), snr_db);
    MapDetector::new(&c, dist.px(), delta)
}

/// Pre-FEC BER `p` with the MAP detector matched to `dist`.
pub fn pre_fec_ber(dist: &ShapingDistribution, snr_db: f64) -> f64 {
    let det = matched_detector(dist, snr_db).expect("distribution is a valid detector prior");
    pre_fec_ber_with(&det, dist.px())
}

/// `[H(X) - m H_b(p)]^+`.
pub fn r_hdd_from(entropy_x: f64, m: u32, p: f64) -> f64 {
    (entropy_x - m as f64 * binary_entropy(p)).max(0.0)
}

/// Hard-decision achievable rate in closed form.
pub fn r_hdd(dist: &ShapingDistribution, snr_db: f64) -> f64 {
    r_hdd_from(dist.entropy_x(), dist.m(), pre_fec_ber(dist, snr_db))
}

/// Upper end of the `s` search in [`r_hdd_sup`]. The optimum sits at
/// `s = log(p / (1 - p)) / log(eps)`, which stays below this bound unless `p`
/// is below roughly `eps^200`, where the residual is far below `1e-12` bits.
pub const SUP_S_MAX: f64 = 200.0;

/// Hard-decision achievable rate evaluated from its definition as a supremum
/// over `s` of the mismatched-decoding rate with the bit-wise Hamming metric
/// `q(x, x_hat) = eps^d_H`, using the explicit joint distribution of
/// `(X, X_hat)`. Used to cross-check [`r_hdd`].
pub fn r_hdd_sup(dist: &ShapingDistribution, snr_db: f64, eps: f64) -> Result<f64> {
    let det = matched_detector(dist, snr_db)?;
    let c = det.constellation();
    let size = c.num_points();
    let px = dist.px();
    let trans = transition_matrix(&det);
    let dist_h = |i: usize, j: usize| (c.label(i) ^ c.label(j)).count_ones() as f64;
    let mut p_hat = vec![0.0; size];
    // E[d_H(L(X), L(X_hat))]
    let mut mean_d = 0.0;
    for i in 0..size {
        for j in 0..size {
            let pij = px[i] * trans[i * size + j];
            p_hat[j] += pij;
            mean_d += pij * dist_h(i, j);
        }
    }
    let log_eps = eps.log2();
    let value = |s: f64| -> Result<f64> {
        // E[log2 q^s] - E[log2 sum_x' q(x', X_hat)^s]
        let mut norm = 0.0;
        for j in 0..size {
            if p_hat[j] <= 0.0 {
                continue;
            }
            let total: f64 = (0..size).map(|i| eps.powf(s * dist_h(i, j))).sum();
            norm += p_hat[j] * total.log2();
        }
        Ok(dist.entropy_x() + s * log_eps * mean_d - norm)
    };
    let (_, best) = crate::shaping::golden_max(value, 0.0, SUP_S_MAX, 1e-10)?;
    // s -> 0 limit is always available and gives H(X) - m
    let best = best.max(value(0.0)?);
    Ok(best.max(0.0))
}

/// Mutual information `I(X;Y)` in bits.
pub fn mutual_information(dist: &ShapingDistribution, snr_db: f64) -> f64 {
    let c = Constellation::new(dist.m()).expect("valid order");
    let px = dist.px();
    let delta = compute_delta(&c, px, snr_db);
    let support: Vec<(f64, f64)> = (0..c.num_points())
        .filter(|&i| px[i] > 0.0)
        .map(|i| (c.point(i) as f64, px[i].ln()))
        .collect();
    let inv_sqrt_2pi = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut total = 0.0;
    for &(x, lp) in &support {
        // -log2 sum_x' P(x') exp(-d z - d^2/2), d = delta (x - x'), via log-sum-exp
        let integrand = |z: f64| {
            let exponent = |&(xp, lpp): &(f64, f64)| {
                let d = delta * (x - xp);
                lpp - d * z - 0.5 * d * d
            };
            let mx = support.iter().map(exponent).fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = support.iter().map(|t| (exponent(t) - mx).exp()).sum();
            let ln_sum = mx + s.ln();
            inv_sqrt_2pi * (-0.5 * z * z).exp() * (-ln_sum) / std::f64::consts::LN_2
        };
        let v = quad::integrate(integrand, -12.0, 12.0, 1e-9);
        total += lp.exp() * v;
    }
    total.clamp(0.0, dist.entropy_x())
}

/// One sample of an achievable-rate curve.
#[derive(Clone, Debug, PartialEq)]
pub struct RatePoint {
    pub snr_db: f64,
    pub lambda: f64,
    pub mi: f64,
    pub p: f64,
    pub r_hdd: f64,
    /// Entropy of the amplitudes under the chosen distribution.
    pub h_a: f64,
    /// Achievable spectral efficiency per channel use of the transmitted
    /// format: `r_hdd` for ASK, `2 r_hdd` for QAM.
    pub se: f64,
}

/// Rate-curve sample; `lambda = None` re-optimises the shaping at this SNR.
pub fn rate_point(m: u32, snr_db: f64, lambda: Option<f64>, qam: bool) -> Result<RatePoint> {
    let lambda = match lambda {
        Some(l) => l,
        None => optimize_lambda(m, snr_db)?,
    };
    let dist = ShapingDistribution::maxwell_boltzmann(m, lambda)?;
    let p = pre_fec_ber(&dist, snr_db);
    let r = r_hdd_from(dist.entropy_x(), m, p);
    let factor = if qam { 2.0 } else { 1.0 };
    Ok(RatePoint {
        snr_db,
        lambda,
        mi: mutual_information(&dist, snr_db),
        p,
        r_hdd: r,
        h_a: dist.entropy_a(),
        se: factor * r,
    })
}

/// Rate curve over an SNR list, evaluated in parallel.
pub fn rate_curve(m: u32, snrs_db: &[f64], lambda: Option<f64>, qam: bool) -> Result<Vec<RatePoint>> {
    use rayon::prelude::*;
    snrs_db
        .par_iter()
        .map(|&snr| rate_point(m, snr, lambda, qam))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn entropy_and_tail_basics() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        // Q(3) from tables
        assert!((q_function(3.0) - 1.349_898_031_630_094_6e-3).abs() < 1e-15);
        assert!((normal_interval(-1.0, 1.0) - 0.682_689_492_137_085_9).abs() < 1e-14);
        // deep tail keeps relative precision
        let far = normal_interval(30.0, f64::INFINITY);
        assert!(far > 0.0 && (far / q_function(30.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bpsk_ber_is_q_of_delta() {
        let d = ShapingDistribution::uniform(1).unwrap();
        for snr in [-5.0, 0.0, 3.0, 7.0, 10.0] {
            let p = pre_fec_ber(&d, snr);
            let delta = crate::modem::db_to_linear(snr).sqrt();
            assert!((p - q_function(delta)).abs() <= 1e-15 * q_function(delta).max(1e-300) + 1e-17);
        }
    }

    #[test]
    fn uniform_4ask_ber_closed_form() {
        // Gray-labelled uniform 4-ASK with delta = sqrt(P/5), summed region
        // by region independently of the transition-matrix code path.
        let d = ShapingDistribution::uniform(2).unwrap();
        let snr = 9.0;
        let delta = (crate::modem::db_to_linear(snr) / 5.0).sqrt();
        let pts = [-3.0, -1.0, 1.0, 3.0];
        let labels = [0b00u32, 0b01, 0b11, 0b10];
        let edges = [f64::NEG_INFINITY, -2.0, 0.0, 2.0, f64::INFINITY];
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let lo = delta * (edges[j] - pts[i]);
                let hi = delta * (edges[j + 1] - pts[i]);
                let pr = q_function(lo) - q_function(hi);
                acc += 0.25 * pr * (labels[i] ^ labels[j]).count_ones() as f64;
            }
        }
        assert!((pre_fec_ber(&d, snr) - acc / 2.0).abs() < 1e-15);
    }

    #[test]
    fn clipping_and_limits() {
        let d = ShapingDistribution::uniform(3).unwrap();
        assert_eq!(r_hdd_from(3.0, 3, 0.0), 3.0);
        assert_eq!(r_hdd_from(3.0, 3, 0.5), 0.0);
        assert!((r_hdd(&d, 60.0) - 3.0).abs() < 1e-12);
        // H(X) close to 1 bit against 3 H_b(p) with p around 0.2
        let peaked = ShapingDistribution::maxwell_boltzmann(3, 1.0).unwrap();
        assert_eq!(r_hdd(&peaked, -3.0), 0.0);
        assert!(pre_fec_ber(&d, 60.0) < 1e-100);
    }

    #[test]
    fn sup_form_matches_closed_form() {
        for m in [2u32, 3, 4] {
            for lambda in [0.0, 0.01, 0.05, 0.2] {
                for snr in [0.0, 8.0, 14.0, 20.0] {
                    let d = ShapingDistribution::maxwell_boltzmann(m, lambda).unwrap();
                    let closed = r_hdd(&d, snr);
                    let sup = r_hdd_sup(&d, snr, 0.5).unwrap();
                    assert!((closed - sup).abs() < 1e-8, "m={m} l={lambda} snr={snr}: {closed} vs {sup}");
                }
            }
        }
    }

    #[test]
    fn sup_form_independent_of_eps() {
        let d = ShapingDistribution::maxwell_boltzmann(3, 0.03).unwrap();
        let a = r_hdd_sup(&d, 10.0, 0.5).unwrap();
        let b = r_hdd_sup(&d, 10.0, 0.1).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn mi_limits() {
        let d = ShapingDistribution::maxwell_boltzmann(3, 0.02).unwrap();
        assert!((mutual_information(&d, 60.0) - d.entropy_x()).abs() < 1e-6);
        assert!(mutual_information(&d, -40.0) < 1e-3);
    }

    #[test]
    fn bpsk_mi_against_monte_carlo() {
        let d = ShapingDistribution::uniform(1).unwrap();
        let mi = mutual_information(&d, 0.0);
        // I = 1 - E[log2(1 + exp(-2 y))] with y = 1 + z (transmit +1 by symmetry)
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            let y = 1.0 + z;
            let v = 1.0 - (-2.0 * y).exp().ln_1p() / std::f64::consts::LN_2;
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let sd = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mi - mean).abs() < 3.0 * sd, "mi={mi} mc={mean}±{sd}");
    }

    #[test]
    fn hard_decisions_do_not_beat_mi() {
        for m in [1u32, 2, 4] {
            for lambda in [0.0, 0.02, 0.1] {
                for snr in [-3.0, 5.0, 12.0, 25.0] {
                    let d = ShapingDistribution::maxwell_boltzmann(m, lambda).unwrap();
                    assert!(r_hdd(&d, snr) <= mutual_information(&d, snr) + 1e-9);
                }
            }
        }
    }
}
