//! Search for the Maxwell-Boltzmann parameter that maximises the
//! hard-decision achievable rate at a given SNR.

use crate::error::Result;
use crate::rates;
use crate::shaping::ShapingDistribution;

/// Absolute tolerance on the returned `lambda`.
pub const LAMBDA_TOLERANCE: f64 = 1e-7;

const GRID_MIN: f64 = 1e-5;
const GRID_MAX: f64 = 4.0;
const GRID_POINTS: usize = 120;

fn objective(m: u32, snr_db: f64, lambda: f64) -> Result<f64> {
    let dist = ShapingDistribution::maxwell_boltzmann(m, lambda)?;
    Ok(rates::r_hdd(&dist, snr_db))
}

/// Coarse scan over `{0} ∪ geometric grid`, then golden-section refinement
/// between the neighbours of the best grid point. Among equal rates the
/// smaller `lambda` wins, so a clipped (all-zero) curve yields `0`.
pub fn optimize_lambda(m: u32, snr_db: f64) -> Result<f64> {
    let ratio = (GRID_MAX / GRID_MIN).powf(1.0 / (GRID_POINTS - 1) as f64);
    let mut grid = Vec::with_capacity(GRID_POINTS + 1);
    grid.push(0.0);
    let mut l = GRID_MIN;
    for _ in 0..GRID_POINTS {
        grid.push(l);
        l *= ratio;
    }
    let mut best = 0usize;
    let mut best_val = objective(m, snr_db, 0.0)?;
    for (i, &lam) in grid.iter().enumerate().skip(1) {
        let v = objective(m, snr_db, lam)?;
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    if best_val <= 0.0 {
        return Ok(0.0);
    }
    let lo = if best == 0 { 0.0 } else { grid[best - 1] };
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (lam, val) = golden_max(|x| objective(m, snr_db, x), lo, hi, LAMBDA_TOLERANCE)?;
    // never return something worse than the grid point itself
    Ok(if val >= best_val { lam } else { grid[best] })
}

/// Golden-section maximisation on `[lo, hi]`; returns the best abscissa seen
/// and its value.
pub(crate) fn golden_max<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        // ties move toward the lower end
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_on_parabola() {
        let (x, v) = golden_max(|x| Ok(-(x - 0.3) * (x - 0.3)), 0.0, 1.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
        assert!(v <= 0.0 && v > -1e-16);
    }

    #[test]
    fn high_snr_is_near_uniform() {
        let lam = optimize_lambda(2, 40.0).unwrap();
        assert!(lam < 1e-3, "lambda*={lam}");
        let d = ShapingDistribution::maxwell_boltzmann(2, lam).unwrap();
        assert!((rates::r_hdd(&d, 40.0) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn matches_dense_grid_m3() {
        let snr = 12.0;
        let lam = optimize_lambda(3, snr).unwrap();
        let mut best = (0.0, f64::NEG_INFINITY);
        for i in 0..=2000 {
            let l = i as f64 * 1e-4;
            let v = objective(3, snr, l).unwrap();
            if v > best.1 {
                best = (l, v);
            }
        }
        assert!((lam - best.0).abs() <= 1e-4, "lambda*={lam} grid={}", best.0);
        assert!(objective(3, snr, lam).unwrap() >= best.1 - 1e-12);
    }

    #[test]
    fn shaped_never_below_uniform() {
        for m in [2u32, 4] {
            for k in 0..12 {
                let snr = -2.0 + 2.5 * k as f64;
                let lam = optimize_lambda(m, snr).unwrap();
                let shaped = objective(m, snr, lam).unwrap();
                let uniform = objective(m, snr, 0.0).unwrap();
                assert!(shaped >= uniform, "m={m} snr={snr}");
            }
        }
    }
}
