//! Simulation configuration and its resolution into concrete parameters.

use serde::{Deserialize, Serialize};

use crate::bch::BchCode;
use crate::error::{Error, Result};
use crate::gf::{default_primitive_poly, GaloisField};
use crate::rates::search_code_params;
use crate::staircase::{DecoderMode, StaircaseParams, GAMMA_TOLERANCE};

/// Transmitted format: one ASK rail, or two independent rails forming QAM.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Ask,
    Qam,
}

impl Format {
    /// ASK rails per channel use.
    pub fn rails(self) -> u64 {
        match self {
            Format::Ask => 1,
            Format::Qam => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationConfig {
    /// Bits per ASK symbol.
    pub m: u32,
    #[serde(default)]
    pub format: Format,
}

/// Component code. Give either the shortening `s` or the target `gamma`;
/// when both are present they must agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub v: u32,
    pub t: usize,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Field polynomial as an integer bit mask; the default table is used
    /// when absent.
    #[serde(default)]
    pub primitive_poly: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapingConfig {
    /// Fixed Maxwell-Boltzmann parameter; `None` optimises it per SNR.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Metric parameter of the sup-form achievable rate reported with each
    /// point.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

impl Default for ShapingConfig {
    fn default() -> Self {
        Self {
            lambda: None,
            epsilon: default_epsilon(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderConfig {
    #[serde(default = "default_window")]
    pub window: usize,
    /// `0` disables decoding (blocks pass through).
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub mode: DecoderMode,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            window: default_window(),
            iterations: default_iterations(),
            mode: DecoderMode::default(),
        }
    }
}

/// Stopping rule. A point stops once it has at least `min_blocks` blocks and
/// `min_block_errors` block errors, or once `max_blocks` blocks were run.
/// The rule is checked between batches of `batch_streams` streams, each of
/// `stream_blocks` counted blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialsConfig {
    #[serde(default = "default_min_blocks")]
    pub min_blocks: u64,
    #[serde(default = "default_min_block_errors")]
    pub min_block_errors: u64,
    #[serde(default = "default_max_blocks")]
    pub max_blocks: u64,
    #[serde(default = "default_stream_blocks")]
    pub stream_blocks: usize,
    /// Extra uncounted blocks sent after each stream so the last counted
    /// blocks see a full window; `None` means `window - 1`.
    #[serde(default)]
    pub tail_blocks: Option<usize>,
    #[serde(default = "default_batch_streams")]
    pub batch_streams: usize,
}

impl Default for TrialsConfig {
    fn default() -> Self {
        Self {
            min_blocks: default_min_blocks(),
            min_block_errors: default_min_block_errors(),
            max_blocks: default_max_blocks(),
            stream_blocks: default_stream_blocks(),
            tail_blocks: None,
            batch_streams: default_batch_streams(),
        }
    }
}

/// One simulation campaign: a fixed system swept over an SNR list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub modulation: ModulationConfig,
    pub code: CodeConfig,
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub shaping: ShapingConfig,
    #[serde(default)]
    pub decoder: DecoderConfig,
    #[serde(default)]
    pub trials: TrialsConfig,
    #[serde(default)]
    pub seed: u64,
    /// Test hook: transmit without noise.
    #[serde(default)]
    pub noiseless: bool,
}

fn default_epsilon() -> f64 {
    0.5
}
fn default_window() -> usize {
    7
}
fn default_iterations() -> usize {
    8
}
fn default_min_blocks() -> u64 {
    100
}
fn default_min_block_errors() -> u64 {
    100
}
fn default_max_blocks() -> u64 {
    1_000_000
}
fn default_stream_blocks() -> usize {
    32
}
fn default_batch_streams() -> usize {
    4
}

/// A configuration with every default filled in and the code constructed.
#[derive(Clone, Debug)]
pub struct ResolvedConfig {
    /// Echo of the input with `s`, `gamma`, the field polynomial and the tail
    /// length made explicit.
    pub config: SimConfig,
    pub params: StaircaseParams,
}

impl ResolvedConfig {
    pub fn m(&self) -> u32 {
        self.config.modulation.m
    }

    pub fn format(&self) -> Format {
        self.config.modulation.format
    }

    pub fn tail_blocks(&self) -> usize {
        self.config.trials.tail_blocks.unwrap_or(self.config.decoder.window - 1)
    }
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Convenience constructor with all defaults.
    pub fn new(m: u32, v: u32, t: usize, s: usize, snr_db: Vec<f64>) -> Self {
        Self {
            modulation: ModulationConfig { m, format: Format::Ask },
            code: CodeConfig {
                v,
                t,
                s: Some(s),
                gamma: None,
                primitive_poly: None,
            },
            snr_db,
            shaping: ShapingConfig::default(),
            decoder: DecoderConfig::default(),
            trials: TrialsConfig::default(),
            seed: 0,
            noiseless: false,
        }
    }

    /// Validates the configuration and builds the component code.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let m = self.modulation.m;
        if !(2..=10).contains(&m) {
            return Err(Error::Parameter(format!("bits per symbol m={m} outside 2..=10")));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Parameter("snr_db must be a non-empty list of finite values".into()));
        }
        if let Some(l) = self.shaping.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::Parameter(format!("lambda={l} must be finite and >= 0")));
            }
        }
        if !(self.shaping.epsilon > 0.0 && self.shaping.epsilon.is_finite()) {
            return Err(Error::Parameter(format!("epsilon={} must be positive", self.shaping.epsilon)));
        }
        if self.decoder.window < 2 {
            return Err(Error::Parameter(format!("window size {} must be >= 2", self.decoder.window)));
        }
        let tr = &self.trials;
        if tr.stream_blocks == 0 || tr.batch_streams == 0 || tr.max_blocks == 0 {
            return Err(Error::Parameter(
                "stream_blocks, batch_streams and max_blocks must be >= 1".into(),
            ));
        }

        let c = &self.code;
        let poly = match c.primitive_poly {
            Some(p) => p,
            None => default_primitive_poly(c.v)
                .ok_or_else(|| Error::Parameter(format!("no default field polynomial for v={}", c.v)))?,
        };
        let s = match (c.s, c.gamma) {
            (Some(s), _) => s,
            (None, Some(g)) => {
                let parent = (1usize << c.v.min(16)) - 1;
                search_code_params(c.v, c.t, m, 0..=parent)?
                    .into_iter()
                    .find(|row| (row.gamma - g).abs() <= GAMMA_TOLERANCE)
                    .map(|row| row.s)
                    .ok_or_else(|| {
                        Error::Parameter(format!("no shortening of (v={}, t={}) gives gamma={g} for m={m}", c.v, c.t))
                    })?
            }
            (None, None) => return Err(Error::Parameter("code needs either s or gamma".into())),
        };
        let code = BchCode::new(GaloisField::new(c.v, poly)?, c.t, s)?;
        let params = StaircaseParams::derive(code, m, c.gamma)?;

        let mut config = self.clone();
        config.code.s = Some(s);
        config.code.gamma = Some(params.gamma());
        config.code.primitive_poly = Some(poly);
        config.trials.tail_blocks = Some(tr.tail_blocks.unwrap_or(self.decoder.window - 1));
        Ok(ResolvedConfig { config, params })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_defaults_are_materialised() {
        let cfg = SimConfig::from_json(
            r#"{"modulation": {"m": 4}, "code": {"v": 10, "t": 3, "gamma": 0.0}, "snr_db": [20.0]}"#,
        )
        .unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.config.code.s, Some(783));
        assert_eq!(r.config.code.primitive_poly, Some(0b100_0000_1001));
        assert_eq!(r.config.decoder.window, 7);
        assert_eq!(r.config.decoder.iterations, 8);
        assert_eq!(r.config.shaping.epsilon, 0.5);
        assert_eq!(r.config.trials.tail_blocks, Some(6));
        assert_eq!(r.params.n(), 3600);
    }

    #[test]
    fn rejects_inconsistent_input() {
        let mut cfg = SimConfig::new(4, 10, 3, 783, vec![10.0]);
        cfg.code.gamma = Some(0.5);
        assert!(matches!(cfg.resolve(), Err(Error::Parameter(_))));
        let mut cfg = SimConfig::new(4, 10, 3, 244, vec![10.0]);
        assert!(cfg.resolve().is_err());
        cfg.code.s = Some(783);
        cfg.decoder.window = 1;
        assert!(cfg.resolve().is_err());
        assert!(SimConfig::from_json(r#"{"modulation": {"m": 4}, "bogus": 1}"#).is_err());
    }
}
