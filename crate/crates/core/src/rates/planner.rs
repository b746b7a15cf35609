//! Shaping gains and operating points derived from the rate curves.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::shaping::{optimize_lambda, ShapingDistribution};

/// SNR bracket used when inverting rate curves.
const INVERT_MIN_DB: f64 = -10.0;
const INVERT_MAX_DB: f64 = 60.0;

/// Resolution of [`shaping_gain`] and [`snr_for_rate`].
pub const GAIN_TOLERANCE_DB: f64 = 1e-4;
/// Resolution of the crossing found by [`operating_point`].
pub const CROSSING_TOLERANCE_DB: f64 = 1e-3;
/// Operating-point scan range and grid.
pub const SCAN_MIN_DB: f64 = 0.0;
pub const SCAN_MAX_DB: f64 = 40.0;
pub const SCAN_STEP_DB: f64 = 0.05;

/// `(lambda*, R_HDD at lambda*)` at one SNR.
pub fn shaped_r_hdd(m: u32, snr_db: f64) -> Result<(f64, f64)> {
    let lambda = optimize_lambda(m, snr_db)?;
    let dist = ShapingDistribution::maxwell_boltzmann(m, lambda)?;
    Ok((lambda, super::r_hdd(&dist, snr_db)))
}

/// Smallest SNR at which a non-decreasing rate curve reaches `target`.
pub fn snr_for_rate<F>(mut rate: F, target: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (INVERT_MIN_DB, INVERT_MAX_DB);
    if rate(hi)? < target {
        return Err(Error::Unreachable(format!(
            "rate {target} not reached below {INVERT_MAX_DB} dB"
        )));
    }
    if rate(lo)? >= target {
        return Err(Error::Unreachable(format!(
            "rate {target} already exceeded at {INVERT_MIN_DB} dB"
        )));
    }
    while hi - lo > GAIN_TOLERANCE_DB {
        let mid = 0.5 * (lo + hi);
        if rate(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Horizontal gap in dB between the uniform and the optimally shaped
/// hard-decision rate curves of `2^m`-ASK at spectral efficiency `se`.
pub fn shaping_gain(m: u32, se: f64) -> Result<f64> {
    if !(se > 0.0 && se < m as f64) {
        return Err(Error::Unreachable(format!(
            "spectral efficiency {se} outside (0, {m}) for m={m}"
        )));
    }
    let uniform = ShapingDistribution::uniform(m)?;
    let snr_uniform = snr_for_rate(|snr| Ok(super::r_hdd(&uniform, snr)), se)?;
    let snr_shaped = snr_for_rate(|snr| Ok(shaped_r_hdd(m, snr)?.1), se)?;
    Ok(snr_uniform - snr_shaped)
}

/// Where the rate `H(A) + gamma` meets the hard-decision achievable rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Crossing {
    /// The condition first holds at this SNR.
    At { snr_db: f64 },
    /// The condition already holds at the bottom of the scan range.
    EntireRange { floor_db: f64 },
    /// The condition never holds in the scan range.
    Nowhere,
}

/// Operating point of a shaping/code-rate pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub m: u32,
    pub gamma: f64,
    pub crossing: Crossing,
    /// Shaping parameter, `H(A)` and spectral efficiencies at the crossing
    /// (or at the scan floor); `NaN` when there is no crossing.
    pub lambda: f64,
    pub h_a: f64,
    pub se_per_ask: f64,
    pub se_per_qam: f64,
    /// Maximal runs of scan points where the condition holds, as
    /// `(first, last)` grid SNRs in dB.
    pub feasible_intervals: Vec<(f64, f64)>,
}

impl OperatingPoint {
    pub fn feasible(&self) -> bool {
        !matches!(self.crossing, Crossing::Nowhere)
    }

    /// SNR of the crossing, when one was found inside the scan range.
    pub fn snr_min_db(&self) -> Option<f64> {
        match self.crossing {
            Crossing::At { snr_db } => Some(snr_db),
            _ => None,
        }
    }
}

/// Margin `R_HDD - H(A) - gamma` with the shaping re-optimised at `snr_db`.
fn margin(m: u32, gamma: f64, snr_db: f64) -> Result<(f64, f64, f64)> {
    let lambda = optimize_lambda(m, snr_db)?;
    let dist = ShapingDistribution::maxwell_boltzmann(m, lambda)?;
    let g = super::r_hdd(&dist, snr_db) - dist.entropy_a() - gamma;
    Ok((g, lambda, dist.entropy_a()))
}

/// Scans the SNR range for the first point where `H(A) + gamma` lies strictly
/// below the achievable rate and refines it by bisection. The feasible set
/// need not be a single interval, so every feasible run of the scan is
/// reported as well.
pub fn operating_point(m: u32, gamma: f64) -> Result<OperatingPoint> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Parameter(format!("gamma={gamma} outside [0, 1)")));
    }
    let steps = ((SCAN_MAX_DB - SCAN_MIN_DB) / SCAN_STEP_DB).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| SCAN_MIN_DB + i as f64 * SCAN_STEP_DB).collect();
    let margins: Vec<f64> = grid
        .par_iter()
        .map(|&snr| margin(m, gamma, snr).map(|r| r.0))
        .collect::<Result<_>>()?;
    let first = margins.iter().position(|&g| g > 0.0);
    let mut feasible_intervals = Vec::new();
    let mut start = None;
    for (i, &g) in margins.iter().enumerate() {
        match (g > 0.0, start) {
            (true, None) => start = Some(i),
            (false, Some(s0)) => {
                feasible_intervals.push((grid[s0], grid[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s0) = start {
        feasible_intervals.push((grid[s0], grid[steps]));
    }
    let at = |crossing: Crossing, snr: f64| -> Result<OperatingPoint> {
        let (_, lambda, h_a) = margin(m, gamma, snr)?;
        Ok(OperatingPoint {
            m,
            gamma,
            crossing,
            lambda,
            h_a,
            se_per_ask: h_a + gamma,
            se_per_qam: 2.0 * (h_a + gamma),
            feasible_intervals: feasible_intervals.clone(),
        })
    };
    match first {
        None => Ok(OperatingPoint {
            m,
            gamma,
            crossing: Crossing::Nowhere,
            lambda: f64::NAN,
            h_a: f64::NAN,
            se_per_ask: f64::NAN,
            se_per_qam: f64::NAN,
            feasible_intervals: Vec::new(),
        }),
        Some(0) => at(Crossing::EntireRange { floor_db: SCAN_MIN_DB }, SCAN_MIN_DB),
        Some(i) => {
            let (mut lo, mut hi) = (grid[i - 1], grid[i]);
            while hi - lo > CROSSING_TOLERANCE_DB {
                let mid = 0.5 * (lo + hi);
                if margin(m, gamma, mid)?.0 > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            at(Crossing::At { snr_db: hi }, hi)
        }
    }
}
