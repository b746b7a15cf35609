//! Plot-data export: achievable-rate curves, entropy lines and simulated
//! operating points as CSV.
//!
//! Files are appended to; the header row is written only when a file is new
//! or empty, so an export with no rows still leaves a valid CSV behind.

use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::rates::RatePoint;

use super::config::Format;
use super::sweep::SimResult;

/// A rate curve together with the system it belongs to.
#[derive(Clone, Debug)]
pub struct RateCurve {
    pub m: u32,
    pub format: Format,
    pub points: Vec<RatePoint>,
}

#[derive(Serialize)]
struct RateRow {
    m: u32,
    format: Format,
    snr_db: f64,
    lambda: f64,
    mi: f64,
    p: f64,
    r_hdd: f64,
    h_a: f64,
    se: f64,
}
const RATE_HEADER: [&str; 9] = ["m", "format", "snr_db", "lambda", "mi", "p", "r_hdd", "h_a", "se"];

#[derive(Serialize)]
struct LineRow {
    m: u32,
    format: Format,
    gamma: f64,
    snr_db: f64,
    lambda: f64,
    h_a: f64,
    /// `H(A) + gamma` per rail, times the number of rails.
    se_line: f64,
    /// Achievable rate at the same point, for reading off the crossing.
    se_rate: f64,
}
const LINE_HEADER: [&str; 8] = ["m", "format", "gamma", "snr_db", "lambda", "h_a", "se_line", "se_rate"];

/// Lowest simulated SNR of a sweep that meets the target BLER.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatingRow {
    pub m: u32,
    pub format: Format,
    pub v: u32,
    pub t: usize,
    pub s: usize,
    pub gamma: f64,
    pub target_bler: f64,
    pub snr_db: f64,
    pub lambda: f64,
    pub blocks: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub bler_lo: f64,
    pub bler_hi: f64,
    pub pre_fec_ber: f64,
    pub post_fec_ber: f64,
    pub se_realised: f64,
    pub se_entropy: f64,
    pub budget_exhausted: bool,
}
const OPERATING_HEADER: [&str; 19] = [
    "m",
    "format",
    "v",
    "t",
    "s",
    "gamma",
    "target_bler",
    "snr_db",
    "lambda",
    "blocks",
    "block_errors",
    "bler",
    "bler_lo",
    "bler_hi",
    "pre_fec_ber",
    "post_fec_ber",
    "se_realised",
    "se_entropy",
    "budget_exhausted",
];

impl OperatingRow {
    /// `None` when no point of the sweep reaches `target`.
    pub fn from_result(result: &SimResult, target: f64) -> Option<Self> {
        let p = result
            .points
            .iter()
            .filter(|p| p.bler <= target)
            .min_by(|a, b| a.snr_db.total_cmp(&b.snr_db))?;
        let cfg = &result.config;
        Some(Self {
            m: cfg.modulation.m,
            format: cfg.modulation.format,
            v: cfg.code.v,
            t: cfg.code.t,
            s: result.s,
            gamma: result.gamma,
            target_bler: target,
            snr_db: p.snr_db,
            lambda: p.lambda,
            blocks: p.counters.blocks,
            block_errors: p.counters.block_errors,
            bler: p.bler,
            bler_lo: p.bler_ci.0,
            bler_hi: p.bler_ci.1,
            pre_fec_ber: p.pre_fec_ber,
            post_fec_ber: p.post_fec_ber,
            se_realised: p.se_realised,
            se_entropy: p.se_entropy,
            budget_exhausted: p.budget_exhausted,
        })
    }
}

/// Appends `rows` to the CSV at `path`, writing `header` first if the file
/// is new or empty.
pub fn append_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let empty = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if empty {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Paths written by [`export_curves`].
#[derive(Clone, Debug)]
pub struct ExportPaths {
    pub rates: PathBuf,
    pub entropy_lines: PathBuf,
    pub operating_points: PathBuf,
}

/// Writes `rates.csv`, `entropy_lines.csv` (one line per curve and `gamma`,
/// evaluated at the shaping of each curve point) and `operating_points.csv`
/// into `dir`.
pub fn export_curves(
    dir: &Path,
    curves: &[RateCurve],
    gammas: &[f64],
    results: &[SimResult],
    target_bler: f64,
) -> Result<ExportPaths> {
    fs::create_dir_all(dir)?;
    let paths = ExportPaths {
        rates: dir.join("rates.csv"),
        entropy_lines: dir.join("entropy_lines.csv"),
        operating_points: dir.join("operating_points.csv"),
    };
    let mut rate_rows = Vec::new();
    let mut line_rows = Vec::new();
    for c in curves {
        let factor = c.format.rails() as f64;
        for p in &c.points {
            rate_rows.push(RateRow {
                m: c.m,
                format: c.format,
                snr_db: p.snr_db,
                lambda: p.lambda,
                mi: p.mi,
                p: p.p,
                r_hdd: p.r_hdd,
                h_a: p.h_a,
                se: p.se,
            });
        }
        for &gamma in gammas {
            for p in &c.points {
                line_rows.push(LineRow {
                    m: c.m,
                    format: c.format,
                    gamma,
                    snr_db: p.snr_db,
                    lambda: p.lambda,
                    h_a: p.h_a,
                    se_line: factor * (p.h_a + gamma),
                    se_rate: p.se,
                });
            }
        }
    }
    let op_rows: Vec<OperatingRow> = results
        .iter()
        .filter_map(|r| OperatingRow::from_result(r, target_bler))
        .collect();
    append_csv(&paths.rates, &RATE_HEADER, &rate_rows)?;
    append_csv(&paths.entropy_lines, &LINE_HEADER, &line_rows)?;
    append_csv(&paths.operating_points, &OPERATING_HEADER, &op_rows)?;
    Ok(paths)
}

/// SNR gap between a uniform and a shaped system at matched spectral
/// efficiency. Both inputs are `(se, snr_db)` operating points; every shaped
/// point inside the SE range of the uniform points yields
/// `(se, snr_uniform(se) - snr_shaped)`, with the uniform SNR interpolated
/// linearly in SE.
pub fn matched_se_gap(shaped: &[(f64, f64)], uniform: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut u = uniform.to_vec();
    u.sort_by(|a, b| a.0.total_cmp(&b.0));
    shaped
        .iter()
        .filter_map(|&(se, snr)| {
            let k = u.partition_point(|p| p.0 < se);
            let snr_u = if k < u.len() && u[k].0 == se {
                u[k].1
            } else if k == 0 || k == u.len() {
                return None;
            } else {
                let (a, b) = (u[k - 1], u[k]);
                a.1 + (se - a.0) * (b.1 - a.1) / (b.0 - a.0)
            };
            Some((se, snr_u - snr))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_export_writes_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let paths = export_curves(dir.path(), &[], &[0.5], &[], 1e-3).unwrap();
        let text = fs::read_to_string(&paths.rates).unwrap();
        assert_eq!(text, "m,format,snr_db,lambda,mi,p,r_hdd,h_a,se\n");
        let text = fs::read_to_string(&paths.operating_points).unwrap();
        assert_eq!(text.lines().count(), 1);
        // a second export must not repeat the header
        export_curves(dir.path(), &[], &[], &[], 1e-3).unwrap();
        assert_eq!(fs::read_to_string(&paths.entropy_lines).unwrap().lines().count(), 1);
    }

    #[test]
    fn gap_interpolates_uniform_curve() {
        let uniform = [(3.0, 20.0), (1.0, 10.0)];
        let gaps = matched_se_gap(&[(2.0, 13.0), (0.5, 1.0), (3.0, 18.0)], &uniform);
        assert_eq!(gaps, vec![(2.0, 2.0), (3.0, 2.0)]);
    }
}
