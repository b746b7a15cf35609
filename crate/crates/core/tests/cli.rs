use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pas_core::sim::SimResult;

fn pas_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pas-sim")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
    "modulation": {"m": 4, "format": "ask"},
    "code": {"v": 10, "t": 3, "s": 783},
    "snr_db": [2.0, 20.0],
    "trials": {"min_blocks": 20, "min_block_errors": 0, "max_blocks": 20, "stream_blocks": 10},
    "seed": 5
}"#;

#[test]
fn plan_codes_lists_known_shortenings() {
    let text = stdout(&pas_sim(&["plan", "codes", "--m", "4", "--s-min", "640", "--s-max", "660"]));
    // s, gamma, n_c and k_c of a known shortening for m = 4
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split_whitespace().collect()).collect();
    assert!(rows.iter().any(|r| r[..4] == ["647", "0.3617", "376", "346"]), "{text}");
    assert!(rows.iter().all(|r| r[0].parse::<usize>().unwrap() % 2 == 1));
}

#[test]
fn bad_parameters_fail_with_a_message() {
    let out = pas_sim(&["plan", "gain", "--m", "4", "--se", "9"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = pas_sim(&["rates", "--m", "3", "--snr-min", "5", "--snr-max", "1"]);
    assert!(!out.status.success());
}

#[test]
fn rates_writes_csv() {
    let text = stdout(&pas_sim(&["rates", "--m", "3", "--snr-min", "0", "--snr-max", "10", "--snr-step", "5"]));
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rd.headers().unwrap(), vec!["snr_db", "lambda", "mi", "p", "r_hdd", "se"]);
    let rows: Vec<Vec<f64>> = rd
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r[4] <= r[2] + 1e-9 && r[4] <= 3.0);
    }
    assert!(rows.windows(2).all(|w| w[1][4] > w[0][4]));
}

#[test]
fn simulate_then_export() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let result_path = dir.path().join("result.json");
    let out = pas_sim(&["--threads", "1", "simulate", "--config", &cfg, "--out", result_path.to_str().unwrap()]);
    stdout(&out);
    let result: SimResult = serde_json::from_str(&fs::read_to_string(&result_path).unwrap()).unwrap();
    assert_eq!((result.s, result.gamma, result.points.len()), (783, 0.0, 2));
    assert_eq!(result.points[1].counters.block_errors, 0);
    assert_eq!(result.config.trials.tail_blocks, Some(6));

    let csv_dir = dir.path().join("csv");
    let out = pas_sim(&[
        "export",
        "--results",
        result_path.to_str().unwrap(),
        "--out-dir",
        csv_dir.to_str().unwrap(),
        "--gammas",
        "0,0.25",
        "--snr-min",
        "0",
        "--snr-max",
        "4",
        "--snr-step",
        "2",
        "--target-bler",
        "1e-2",
    ]);
    stdout(&out);
    let read = |name: &str| fs::read_to_string(csv_dir.join(name)).unwrap();
    assert_eq!(read("rates.csv").lines().count(), 1 + 3);
    assert_eq!(read("entropy_lines.csv").lines().count(), 1 + 6);
    let ops = read("operating_points.csv");
    assert_eq!(ops.lines().count(), 2);
    assert!(ops.lines().nth(1).unwrap().starts_with("4,ask,10,3,783,"));
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("\"seed\"", "\"sed\""));
    let out = pas_sim(&["simulate", "--config", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sed"));
}
