use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pas_core::rates::{operating_point, rate_curve, search_code_params, shaping_gain, Crossing};
use pas_core::sim::{
    export_curves, run_sweep, snr_for_target_bler, Format, RateCurve, SimConfig, SimResult,
};
use pas_core::staircase::DecoderMode;

/// Probabilistic amplitude shaping over staircase codes: rate analysis,
/// planning and Monte Carlo simulation.
#[derive(Parser)]
#[command(name = "pas-sim", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Achievable-rate table as CSV.
    Rates(RatesArgs),
    /// Code search, operating points and shaping gains.
    #[command(subcommand)]
    Plan(Plan),
    /// Monte Carlo sweep from a JSON configuration.
    Simulate(SimulateArgs),
    /// Plot-data CSVs from saved results.
    Export(ExportArgs),
}

#[derive(Args)]
struct SnrGrid {
    #[arg(long, default_value_t = 0.0)]
    snr_min: f64,
    #[arg(long, default_value_t = 30.0)]
    snr_max: f64,
    #[arg(long, default_value_t = 0.5)]
    snr_step: f64,
}

impl SnrGrid {
    fn values(&self) -> Result<Vec<f64>> {
        if !(self.snr_step > 0.0) || self.snr_max < self.snr_min {
            bail!("bad SNR grid [{}, {}] step {}", self.snr_min, self.snr_max, self.snr_step);
        }
        let steps = ((self.snr_max - self.snr_min) / self.snr_step + 1e-9).floor() as usize;
        Ok((0..=steps).map(|i| self.snr_min + i as f64 * self.snr_step).collect())
    }
}

#[derive(Args)]
struct RatesArgs {
    /// Bits per ASK symbol.
    #[arg(long)]
    m: u32,
    #[command(flatten)]
    grid: SnrGrid,
    /// Fixed shaping parameter; optimised per SNR when absent.
    #[arg(long)]
    lambda: Option<f64>,
    /// Report spectral efficiency per QAM symbol.
    #[arg(long)]
    qam: bool,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Plan {
    /// Shortenings whose code fits the shaping geometry.
    Codes {
        #[arg(long, default_value_t = 10)]
        v: u32,
        #[arg(long, default_value_t = 3)]
        t: usize,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        s_min: usize,
        #[arg(long)]
        s_max: Option<usize>,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Lowest SNR at which `H(A) + gamma` lies below the achievable rate.
    Crossing {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        json: bool,
    },
    /// Shaping gain in dB at a spectral efficiency per ASK symbol.
    Gain {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        se: f64,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON configuration.
    #[arg(long)]
    config: PathBuf,
    /// Replace the configured SNR list.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    snr: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<DecoderMode>,
    #[arg(long)]
    min_blocks: Option<u64>,
    #[arg(long)]
    min_block_errors: Option<u64>,
    #[arg(long)]
    max_blocks: Option<u64>,
    /// Bisect for the lowest SNR with BLER at most this value instead of
    /// sweeping; the bracket comes from the smallest and largest SNR.
    #[arg(long)]
    target_bler: Option<f64>,
    /// Bisection resolution in dB.
    #[arg(long, default_value_t = 0.05)]
    tol_db: f64,
    /// JSON result manifest (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Result manifests written by `simulate`.
    #[arg(long, num_args = 0.., value_delimiter = ',')]
    results: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Bits per ASK symbol for the rate curves, when no results are given.
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    qam: bool,
    /// Code-rate parameters whose entropy lines are exported.
    #[arg(long, num_args = 0.., value_delimiter = ',')]
    gammas: Vec<f64>,
    #[command(flatten)]
    grid: SnrGrid,
    #[arg(long, default_value_t = 1e-3)]
    target_bler: f64,
}

fn parse_mode(s: &str) -> std::result::Result<DecoderMode, String> {
    match s {
        "intrinsic" => Ok(DecoderMode::Intrinsic),
        "extrinsic" => Ok(DecoderMode::Extrinsic),
        _ => Err(format!("unknown decoder mode {s:?} (intrinsic|extrinsic)")),
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout()),
    })
}

fn rates(a: &RatesArgs) -> Result<()> {
    let points = rate_curve(a.m, &a.grid.values()?, a.lambda, a.qam)?;
    let mut w = csv::Writer::from_writer(output(&a.out)?);
    w.write_record(["snr_db", "lambda", "mi", "p", "r_hdd", "se"])?;
    for p in points {
        w.serialize((p.snr_db, p.lambda, p.mi, p.p, p.r_hdd, p.se))?;
    }
    w.flush()?;
    Ok(())
}

fn plan(p: &Plan) -> Result<()> {
    match *p {
        Plan::Codes { v, t, m, s_min, s_max, json } => {
            let s_max = s_max.unwrap_or((1usize << v.min(16)) - 2);
            let rows = search_code_params(v, t, m, s_min..=s_max)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                println!("{:>6} {:>8} {:>6} {:>6} {:>7} {:>5} {:>8}", "s", "gamma", "n_c", "k_c", "n", "a_u", "R_s");
                for r in rows {
                    println!(
                        "{:>6} {:>8.4} {:>6} {:>6} {:>7} {:>5} {:>8.4}",
                        r.s, r.gamma, r.n_c, r.k_c, r.n, r.alpha_u, r.r_s
                    );
                }
            }
        }
        Plan::Crossing { m, gamma, json } => {
            let op = operating_point(m, gamma)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&op)?);
            } else {
                match op.crossing {
                    Crossing::At { snr_db } => println!("crossing at {snr_db:.3} dB"),
                    Crossing::EntireRange { floor_db } => println!("feasible from the scan floor {floor_db} dB"),
                    Crossing::Nowhere => println!("not feasible in the scanned range"),
                }
                if op.feasible() {
                    println!(
                        "lambda={:.6} H(A)={:.4} SE/ASK={:.4} SE/QAM={:.4}",
                        op.lambda, op.h_a, op.se_per_ask, op.se_per_qam
                    );
                }
                for (lo, hi) in &op.feasible_intervals {
                    println!("feasible on [{lo:.2}, {hi:.2}] dB");
                }
            }
        }
        Plan::Gain { m, se } => println!("{:.4}", shaping_gain(m, se)?),
    }
    Ok(())
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut cfg = SimConfig::from_json(&text)?;
    if let Some(s) = &a.snr {
        cfg.snr_db = s.clone();
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.lambda.is_some() {
        cfg.shaping.lambda = a.lambda;
    }
    if let Some(w) = a.window {
        cfg.decoder.window = w;
    }
    if let Some(i) = a.iterations {
        cfg.decoder.iterations = i;
    }
    if let Some(m) = a.mode {
        cfg.decoder.mode = m;
    }
    if let Some(n) = a.min_blocks {
        cfg.trials.min_blocks = n;
    }
    if let Some(n) = a.min_block_errors {
        cfg.trials.min_block_errors = n;
    }
    if let Some(n) = a.max_blocks {
        cfg.trials.max_blocks = n;
    }
    let json = if let Some(target) = a.target_bler {
        let lo = cfg.snr_db.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = cfg.snr_db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let search = snr_for_target_bler(&cfg, target, lo, hi, a.tol_db)?;
        for p in &search.evaluations {
            eprintln!("{}", summary_line(p));
        }
        eprintln!("BLER <= {target} from {:.3} dB", search.snr_db);
        serde_json::to_string_pretty(&search)?
    } else {
        let result = run_sweep(&cfg)?;
        for p in &result.points {
            eprintln!("{}", summary_line(p));
        }
        serde_json::to_string_pretty(&result)?
    };
    let mut w = output(&a.out)?;
    writeln!(w, "{json}")?;
    Ok(())
}

fn summary_line(p: &pas_core::sim::SimPoint) -> String {
    format!(
        "snr={:.3} dB lambda={:.5} blocks={} errors={} bler={:.3e} [{:.3e}, {:.3e}] pre={:.4e} post={:.4e} se={:.4}/{:.4}{}",
        p.snr_db,
        p.lambda,
        p.counters.blocks,
        p.counters.block_errors,
        p.bler,
        p.bler_ci.0,
        p.bler_ci.1,
        p.pre_fec_ber,
        p.post_fec_ber,
        p.se_realised,
        p.se_entropy,
        if p.budget_exhausted { " (budget exhausted)" } else { "" }
    )
}

fn export(a: &ExportArgs) -> Result<()> {
    let mut results = Vec::new();
    for path in &a.results {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let r: SimResult = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        results.push(r);
    }
    let mut systems: Vec<(u32, Format)> = results
        .iter()
        .map(|r| (r.config.modulation.m, r.config.modulation.format))
        .collect();
    if let Some(m) = a.m {
        systems.push((m, if a.qam { Format::Qam } else { Format::Ask }));
    }
    systems.sort_by_key(|&(m, f)| (m, f == Format::Qam));
    systems.dedup();
    let snrs = a.grid.values()?;
    let curves = systems
        .into_iter()
        .map(|(m, format)| {
            Ok(RateCurve {
                m,
                format,
                points: rate_curve(m, &snrs, None, format == Format::Qam)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let paths = export_curves(&a.out_dir, &curves, &a.gammas, &results, a.target_bler)?;
    for p in [paths.rates, paths.entropy_lines, paths.operating_points] {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Rates(a) => rates(a),
        Command::Plan(p) => plan(p),
        Command::Simulate(a) => simulate(a),
        Command::Export(a) => export(a),
    }
}
