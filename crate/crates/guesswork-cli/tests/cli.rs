//! End-to-end tests of the `guesswork` binary: file formats, exit codes,
//! unit handling, and byte-level reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_guesswork"))
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn ber_pmf(dir: &Path) -> PathBuf {
    write(dir, "ber.json", r#"{"symbols":["0","1"],"probs":[0.2,0.8]}"#)
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn ingest_builds_a_canonical_pmf() {
    let dir = TempDir::new().unwrap();
    let tsv = write(
        dir.path(),
        "corpus.tsv",
        "password\t100\n123456\t300\nqwerty\t50\n# a comment line\nletmein\t50\n",
    );
    let out_dir = dir.path().join("out");
    let out = bin().args(["--out"]).arg(&out_dir).arg("ingest").arg(&tsv).output().unwrap();
    assert_success(&out);

    let doc = read_json(&out_dir.join("pmf.json"));
    let symbols: Vec<&str> = doc["symbols"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap())
        .collect();
    // descending count, lexicographic ties: letmein before qwerty at 50
    assert_eq!(symbols, vec!["123456", "password", "letmein", "qwerty"]);
    let probs: Vec<f64> = doc["probs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((probs[0] - 0.6).abs() < 1e-12);
    assert!(doc["source_hash"].as_str().unwrap().len() == 64);
    assert!(out_dir.join("resolved_config.json").exists());
}

#[test]
fn ingest_top_k_renormalizes() {
    let dir = TempDir::new().unwrap();
    let tsv = write(dir.path(), "c.tsv", "a\t3\nb\t2\nc\t1\n");
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["--out"])
        .arg(&out_dir)
        .args(["ingest", "--top-k", "2"])
        .arg(&tsv)
        .output()
        .unwrap();
    assert_success(&out);
    let doc = read_json(&out_dir.join("pmf.json"));
    assert_eq!(doc["symbols"].as_array().unwrap().len(), 2);
    let probs: Vec<f64> = doc["probs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((probs[0] - 0.6).abs() < 1e-12);
    assert!((probs[1] - 0.4).abs() < 1e-12);
}

#[test]
fn ingest_reports_bad_lines_with_numbers() {
    let dir = TempDir::new().unwrap();
    let tsv = write(dir.path(), "bad.tsv", "a\t5\na\t6\nnb 7\nc\t0\n");
    let out = bin()
        .args(["--out"])
        .arg(dir.path().join("out"))
        .arg("ingest")
        .arg(&tsv)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
    assert!(stderr.contains("line 4"), "stderr: {stderr}");
}

#[test]
fn moments_reports_the_known_bernoulli_values() {
    let dir = TempDir::new().unwrap();
    let pmf = ber_pmf(dir.path());
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["--out"])
        .arg(&out_dir)
        .args(["--verify", "moments", "--rho", "1.0", "--pmf"])
        .arg(&pmf)
        .output()
        .unwrap();
    assert_success(&out);
    let doc = read_json(&out_dir.join("moments_report.json"));
    assert!((doc["exact_moment"].as_f64().unwrap() - 1.2).abs() < 1e-12);
    assert!((doc["arikan_upper"].as_f64().unwrap() - 1.8).abs() < 1e-12);
    let tilt: Vec<f64> = doc["optimal_tilt"]["probs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((tilt[0] - 1.0 / 3.0).abs() < 1e-12);
    assert!((tilt[1] - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(doc["unit"], "nats");
}

#[test]
fn bits_flag_rescales_exponents() {
    let dir = TempDir::new().unwrap();
    let pmf = ber_pmf(dir.path());
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["--out"])
        .arg(&out_dir)
        .args(["--bits", "moments", "--rho", "1.0", "--pmf"])
        .arg(&pmf)
        .output()
        .unwrap();
    assert_success(&out);
    let doc = read_json(&out_dir.join("moments_report.json"));
    assert_eq!(doc["unit"], "bits");
    let expected_bits = (1.8f64).ln() / std::f64::consts::LN_2;
    assert!((doc["sync_exponent"].as_f64().unwrap() - expected_bits).abs() < 1e-12);
    // linear moments stay unit-free
    assert!((doc["v_moment_optimal"].as_f64().unwrap() - 1.8).abs() < 1e-12);
}

#[test]
fn moments_emits_rho_curves() {
    let dir = TempDir::new().unwrap();
    let pmf = ber_pmf(dir.path());
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["--out"])
        .arg(&out_dir)
        .args(["moments", "--rho", "1.0", "--gamma", "1.0", "--rho-grid", "0.2:2.0:10", "--pmf"])
        .arg(&pmf)
        .output()
        .unwrap();
    assert_success(&out);
    let csv = std::fs::read_to_string(out_dir.join("moments_curves.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "series,x,y");
    assert!(csv.contains("optimal_exponent"));
    assert!(csv.contains("mismatch_gamma_1"));
}

#[test]
fn zipf_reports_the_harmonic_closed_form() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["--out"])
        .arg(&out_dir)
        .args(["--verify", "zipf", "--m", "100", "--s", "1.0", "--rho", "1.0"])
        .output()
        .unwrap();
    assert_success(&out);
    let doc = read_json(&out_dir.join("zipf_report.json"));
    assert!((doc["guesser_s"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    // frozen from a high-precision evaluation of 2 ln H_{100,1/2} - ln H_{100,1}
    assert!((doc["log_v_moment_optimal"].as_f64().unwrap() - 4.198976706391039).abs() < 1e-12);
}

#[test]
fn exponents_vanish_above_the_source_entropy() {
    let dir = TempDir::new().unwrap();
    let pmf = ber_pmf(dir.path());
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["--out"])
        .arg(&out_dir)
        .args(["--verify", "exponents", "--alpha", "0.6", "--pmf"])
        .arg(&pmf)
        .output()
        .unwrap();
    assert_success(&out);
    let doc = read_json(&out_dir.join("exponents_report.json"));
    assert_eq!(doc["sync_success"]["value"].as_f64().unwrap(), 0.0);
    // failure exponent is positive above the entropy
    assert!(doc["failure"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn exponents_accept_alphabet_relative_rates() {
    let dir = TempDir::new().unwrap();
    let pmf = ber_pmf(dir.path());
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["--out"])
        .arg(&out_dir)
        .args(["exponents", "--alpha-base-x", "0.5", "--pmf"])
        .arg(&pmf)
        .output()
        .unwrap();
    assert_success(&out);
    let doc = read_json(&out_dir.join("exponents_report.json"));
    let expected = 0.5 * (2.0f64).ln();
    assert!((doc["alpha"].as_f64().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn exponents_full_budget_failure_is_infinite() {
    let dir = TempDir::new().unwrap();
    let pmf = ber_pmf(dir.path());
    let out_dir = dir.path().join("out");
    let ln2 = format!("{}", (2.0f64).ln());
    let out = bin()
        .args(["--out"])
        .arg(&out_dir)
        .args(["exponents", "--alpha", &ln2, "--pmf"])
        .arg(&pmf)
        .output()
        .unwrap();
    assert_success(&out);
    let doc = read_json(&out_dir.join("exponents_report.json"));
    assert_eq!(doc["failure"]["value"], "infinity");
}

#[test]
fn markov_emits_the_guessing_chain() {
    let dir = TempDir::new().unwrap();
    let model = write(
        dir.path(),
        "chain.json",
        r#"{"states":["0","1"],"transitions":[[0.9,0.1],[0.3,0.7]]}"#,
    );
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["--out"])
        .arg(&out_dir)
        .args(["--verify", "markov", "--rho", "1.0", "--model"])
        .arg(&model)
        .output()
        .unwrap();
    assert_success(&out);
    let report = read_json(&out_dir.join("markov_report.json"));
    // frozen from the closed-form 2x2 eigenvalue
    assert!((report["perron_eigenvalue"].as_f64().unwrap() - 1.3126030663301436).abs() < 1e-9);
    assert!((report["exponent"].as_f64().unwrap() - 0.5440244782566163).abs() < 1e-9);
    let guesser = read_json(&out_dir.join("markov_guesser.json"));
    let rows = guesser["transitions"].as_array().unwrap();
    for row in rows {
        let sum: f64 = row.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}

fn sim_config(dir: &Path, seed: u64) -> PathBuf {
    let pmf = ber_pmf(dir);
    write(
        dir,
        &format!("sim_{seed}.json"),
        &format!(
            r#"{{
  "seed": {seed},
  "simulate": {{
    "source": {{"kind": "iid", "pmf": {pmf:?}, "n": 1}},
    "agents": 2,
    "strategies": [
      {{"kind": "iid-tilt", "label": "tilted", "rho": 1.0}},
      {{"kind": "iid-source", "label": "naive"}}
    ],
    "schedules": [{{"kind": "round-robin"}}],
    "trials": 20000,
    "rho": 1.0,
    "trace": true,
    "success_curve": true
  }}
}}"#,
            pmf = pmf.to_str().unwrap()
        ),
    )
}

#[test]
fn simulate_emits_monotone_success_curves() {
    let dir = TempDir::new().unwrap();
    let cfg = sim_config(dir.path(), 42);
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["--out"])
        .arg(&out_dir)
        .args(["--verify", "--config"])
        .arg(&cfg)
        .arg("simulate")
        .output()
        .unwrap();
    assert_success(&out);

    let csv = std::fs::read_to_string(out_dir.join("success_curves.csv")).unwrap();
    let mut by_series: std::collections::BTreeMap<String, Vec<(f64, f64)>> = Default::default();
    for line in csv.lines().skip(1) {
        let mut parts = line.splitn(3, ',');
        let series = parts.next().unwrap().to_string();
        let x: f64 = parts.next().unwrap().parse().unwrap();
        let y: f64 = parts.next().unwrap().parse().unwrap();
        by_series.entry(series).or_default().push((x, y));
    }
    assert_eq!(by_series.len(), 2, "one series per strategy/schedule cell");
    for (series, points) in &by_series {
        let mut prev = -1.0;
        for &(_, y) in points {
            assert!(y >= prev, "{series} not monotone");
            prev = y;
        }
    }

    // the naive strategy leads at a single query, the tilted one wins on
    // the mean: the classic crossover
    let naive_first = by_series["naive/round-robin"][0].1;
    let tilted_first = by_series["tilted/round-robin"][0].1;
    assert!(
        naive_first > tilted_first,
        "naive {naive_first} should lead tilted {tilted_first} at one query"
    );
    let cells = read_json(&out_dir.join("simulate_report.json"));
    let mean = |label: &str| -> f64 {
        cells
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["strategy"] == label)
            .unwrap()["stats"]["mean_g"]
            .as_f64()
            .unwrap()
    };
    assert!(mean("tilted") < mean("naive"));

    // per-trial traces with the documented columns
    let trace = std::fs::read_to_string(out_dir.join("trace_tilted_round-robin.csv")).unwrap();
    assert!(trace.starts_with("trial_index,total_queries,success"));
    assert_eq!(trace.lines().count(), 20_001);
}

#[test]
fn simulate_replay_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = sim_config(dir.path(), 7);
    let run = |out_name: &str| {
        let out_dir = dir.path().join(out_name);
        let out = bin()
            .args(["--out"])
            .arg(&out_dir)
            .args(["--config"])
            .arg(&cfg)
            .arg("simulate")
            .output()
            .unwrap();
        assert_success(&out);
        out_dir
    };
    let a = run("out_a");
    let b = run("out_b");
    for name in [
        "simulate_report.json",
        "success_curves.csv",
        "trace_tilted_round-robin.csv",
        "trace_naive_round-robin.csv",
    ] {
        let bytes_a = std::fs::read(a.join(name)).unwrap();
        let bytes_b = std::fs::read(b.join(name)).unwrap();
        assert_eq!(bytes_a, bytes_b, "{name} differs between replays");
    }
}

#[test]
fn report_flags_disagreements() {
    let dir = TempDir::new().unwrap();
    let entries = write(
        dir.path(),
        "cmp.json",
        r#"[
 {"label": "good", "alphabet": ["0","1"], "analytic": 1.8, "simulated": 1.797, "std_error": 0.002},
 {"label": "bad", "analytic": 1.8, "simulated": 1.5, "std_error": 0.002}
]"#,
    );
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["--out"])
        .arg(&out_dir)
        .arg("report")
        .arg(&entries)
        .output()
        .unwrap();
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("good") && stdout.contains("OK"));
    assert!(stdout.contains("bad") && stdout.contains("MISMATCH"));
    let table = std::fs::read_to_string(out_dir.join("report_table.csv")).unwrap();
    assert!(table.starts_with("label,analytic,simulated,std_error,z,status"));

    // under --verify a mismatch is a failure
    let out = bin()
        .args(["--out"])
        .arg(dir.path().join("out2"))
        .args(["--verify", "report"])
        .arg(&entries)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_rejects_conflicting_alphabets_and_empty_input() {
    let dir = TempDir::new().unwrap();
    let entries = write(
        dir.path(),
        "cmp.json",
        r#"[
 {"label": "dup", "alphabet": ["0","1"], "analytic": 1.0, "simulated": 1.0, "std_error": 0.1},
 {"label": "dup", "alphabet": ["a","b"], "analytic": 1.0, "simulated": 1.0, "std_error": 0.1}
]"#,
    );
    let out = bin()
        .args(["--out"])
        .arg(dir.path().join("out"))
        .arg("report")
        .arg(&entries)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["--out"])
        .arg(dir.path().join("out3"))
        .arg("report")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tilt_roundtrips_through_files() {
    let dir = TempDir::new().unwrap();
    let pmf = ber_pmf(dir.path());
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["--out"])
        .arg(&out_dir)
        .args(["--verify", "tilt", "--theta", "0.5", "--pmf"])
        .arg(&pmf)
        .output()
        .unwrap();
    assert_success(&out);
    let doc = read_json(&out_dir.join("tilted_pmf.json"));
    let probs: Vec<f64> = doc["probs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((probs[0] - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn config_values_are_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    let pmf = ber_pmf(dir.path());
    let cfg = write(
        dir.path(),
        "cfg.json",
        &format!(
            r#"{{"moments": {{"pmf": {:?}, "rho": 2.0}}}}"#,
            pmf.to_str().unwrap()
        ),
    );
    let out_dir = dir.path().join("out");
    // --rho 1.0 overrides the config's 2.0
    let out = bin()
        .args(["--out"])
        .arg(&out_dir)
        .args(["--config"])
        .arg(&cfg)
        .args(["moments", "--rho", "1.0"])
        .output()
        .unwrap();
    assert_success(&out);
    let doc = read_json(&out_dir.join("moments_report.json"));
    assert_eq!(doc["rho"].as_f64().unwrap(), 1.0);
    let echo = read_json(&out_dir.join("resolved_config.json"));
    assert_eq!(echo["rho"].as_f64().unwrap(), 1.0);
}
