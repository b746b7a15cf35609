//! Enumeration of shortened component codes that fit the shaping geometry.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::staircase::Geometry;

/// One feasible shortening for a `(v, t, m)` triple.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeParams {
    pub s: usize,
    pub gamma: f64,
    pub n_c: usize,
    pub k_c: usize,
    pub n: usize,
    pub alpha_u: usize,
    pub r_s: f64,
}

/// All shortenings `s` in `s_range` whose code yields a valid staircase
/// geometry for `m` bits per symbol, ordered by increasing `s`.
pub fn search_code_params(
    v: u32,
    t: usize,
    m: u32,
    s_range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<CodeParams>> {
    if !(3..=16).contains(&v) || t == 0 || m < 2 {
        return Err(Error::Parameter(format!("invalid search parameters v={v}, t={t}, m={m}")));
    }
    let parent = (1usize << v) - 1;
    let parity = v as usize * t;
    let mut out = Vec::new();
    for s in s_range {
        if s >= parent || parent - s <= parity {
            continue;
        }
        let n_c = parent - s;
        let k_c = n_c - parity;
        if let Ok(g) = Geometry::new(n_c, k_c, m) {
            out.push(CodeParams {
                s,
                gamma: g.gamma(),
                n_c,
                k_c,
                n: g.n,
                alpha_u: g.alpha_u,
                r_s: g.rate(),
            });
        }
    }
    Ok(out)
}
