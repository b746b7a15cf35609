//! End-to-end simulation: configuration, the transmission chain, Monte Carlo
//! sweeps and plot-data export.

mod chain;
mod config;
mod export;
mod sweep;

pub use chain::{cell_rng, run_chain_frame, Counters, PointSetup, Stage, StreamOutcome};
pub use config::{
    CodeConfig, DecoderConfig, Format, ModulationConfig, ResolvedConfig, ShapingConfig, SimConfig, TrialsConfig,
};
pub use export::{append_csv, export_curves, matched_se_gap, ExportPaths, OperatingRow, RateCurve};
pub use sweep::{point_setup, run_sweep, simulate_point, snr_for_target_bler, wilson_interval, BlerSearch, SimPoint, SimResult};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::staircase::DecoderMode;

    fn small(snr: f64) -> SimConfig {
        // (v=6, t=2) shortened to n_c=56 gives a tiny 4-ASK geometry
        let mut cfg = SimConfig::new(2, 6, 2, 7, vec![snr]);
        cfg.trials = TrialsConfig {
            min_blocks: 40,
            min_block_errors: 0,
            max_blocks: 40,
            stream_blocks: 10,
            tail_blocks: None,
            batch_streams: 2,
        };
        cfg.seed = 7;
        cfg
    }

    #[test]
    fn wilson_reference_values() {
        // 0 of 10: upper end z^2 / (n + z^2)
        let (lo, hi) = wilson_interval(0, 10);
        let z2 = 1.959_963_984_540_054f64.powi(2);
        assert_eq!(lo, 0.0);
        assert!((hi - z2 / (10.0 + z2)).abs() < 1e-12);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo + hi - 1.0).abs() < 1e-12 && lo > 0.40 && hi < 0.60);
    }

    #[test]
    fn noiseless_chain_is_error_free() {
        for mode in [DecoderMode::Intrinsic, DecoderMode::Extrinsic] {
            let mut cfg = small(10.0);
            cfg.noiseless = true;
            cfg.decoder.mode = mode;
            let r = run_sweep(&cfg).unwrap();
            let c = &r.points[0].counters;
            assert_eq!(c.blocks, 40);
            assert_eq!((c.block_errors, c.pre_fec_bit_errors, c.payload_bit_errors), (0, 0, 0));
            assert_eq!(c.dematch_failures, 0);
        }
    }

    #[test]
    fn payload_accounting_matches_geometry() {
        let cfg = small(10.0).resolve().unwrap();
        let setup = point_setup(&cfg, 10.0).unwrap();
        let g = cfg.params.geometry();
        // the label bits carry n(m-1) bits, the matcher consumes fewer
        assert_eq!(g.side * g.alpha, g.n * (g.m as usize - 1) + g.sign_info_bits_per_block());
        let out = run_chain_frame(&cfg, &setup, 0, 0).unwrap();
        assert_eq!(out.errors.len(), 10);
        assert_eq!(out.counters.info_bits, 10 * (g.side * g.alpha) as u64);
        assert_eq!(
            out.counters.payload_bits,
            10 * (setup.codec.input_bits() + g.sign_info_bits_per_block()) as u64
        );
    }

    #[test]
    fn disabled_decoder_passes_detector_output() {
        let mut cfg = small(6.0);
        cfg.decoder.iterations = 0;
        let p = &run_sweep(&cfg).unwrap().points[0];
        assert!(p.counters.pre_fec_bit_errors > 0);
        assert_eq!(p.counters.code_bit_errors, p.counters.pre_fec_bit_errors);
        assert_eq!(p.post_fec_code_ber, p.pre_fec_ber);
    }

    #[test]
    fn stopping_rule_and_budget_flag() {
        let mut cfg = small(30.0);
        cfg.trials.min_block_errors = 5;
        cfg.trials.max_blocks = 60;
        let p = &run_sweep(&cfg).unwrap().points[0];
        assert_eq!(p.counters.blocks, 60);
        assert!(p.budget_exhausted);
        assert!(p.bler_ci.1 > 0.0);

        // a hopeless point stops as soon as enough errors are seen
        let mut cfg = small(-5.0);
        cfg.trials.min_blocks = 1;
        cfg.trials.min_block_errors = 3;
        cfg.trials.max_blocks = 10_000;
        let p = &run_sweep(&cfg).unwrap().points[0];
        assert_eq!(p.counters.blocks, 20);
        assert!(!p.budget_exhausted);
    }

    #[test]
    fn qam_runs_two_rails() {
        let mut cfg = small(8.0);
        cfg.modulation.format = Format::Qam;
        let r = run_sweep(&cfg).unwrap();
        let p = &r.points[0];
        assert_eq!(p.counters.blocks, 40);
        let ask = &run_sweep(&small(8.0)).unwrap().points[0];
        assert!((p.se_entropy - 2.0 * ask.se_entropy).abs() < 1e-12);
        assert!((p.se_realised - 2.0 * ask.se_realised).abs() < 1e-12);
    }

    #[test]
    fn rail_streams_are_distinct() {
        let cfg = small(4.0).resolve().unwrap();
        let setup = point_setup(&cfg, 4.0).unwrap();
        let a = run_chain_frame(&cfg, &setup, 0, 0).unwrap();
        let b = run_chain_frame(&cfg, &setup, 1, 0).unwrap();
        let c = run_chain_frame(&cfg, &setup, 0, 0).unwrap();
        assert_eq!(a, c);
        assert_ne!(a.counters, b.counters);
    }
}
