use std::path::Path;
use std::process::{Command, Output};

use paley_core::cayley_graph::build_graph;
use paley_core::clique_solver::{max_clique_exact, SearchBudget};
use paley_core::sign_models::sample_multiplicative;

fn paley(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paley")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = paley(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn sample_file_feeds_graph_and_clique() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    ok(&["sample", "--N", "101", "--Q", "5", "--seed", "3", "--out", p(&s)]);

    let g = build_graph(&sample_multiplicative(101, 5, 3).unwrap());
    let edges = ok(&["graph", "--input", p(&s)]);
    assert_eq!(edges.lines().count(), g.edge_count());

    let r = json(&["clique", "--input", p(&s)]);
    assert_eq!(r["size"], max_clique_exact(&g, SearchBudget::unlimited()).size);
    assert_eq!(r["optimal"], true);
}

#[test]
fn concentration_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested").join("runs.jsonl");
    let args = ["concentration", "--primes", "101,151", "--trials", "3", "--seed", "5", "--out", p(&out)];
    let summary = json(&args);
    assert_eq!(summary["summary"].as_array().unwrap().len(), 4);
    assert_eq!(summary["comparisons"].as_array().unwrap().len(), 2);

    let names = ["runs.jsonl", "runs.summary.csv", "runs.meta.json"];
    let read = || names.map(|n| std::fs::read(out.with_file_name(n)).unwrap());
    let first = read();
    ok(&args);
    assert_eq!(first, read());
    assert_eq!(String::from_utf8_lossy(&first[0]).lines().count(), 12);
}

#[test]
fn records_without_out_are_jsonl() {
    let text = ok(&["concentration", "--primes", "101", "--models", "iid", "--trials", "2"]);
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|r| r["model"] == "iid" && r["Q"] == 0));
}

#[test]
fn csv_summary_header() {
    let text = ok(&["--format", "csv", "concentration", "--primes", "101", "--trials", "2"]);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("N,model,Q,trials,"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "trials = 4\nprimes = [101]\nmodels = [\"iid\"]\n").unwrap();
    assert_eq!(ok(&["concentration", "--config", p(&cfg)]).lines().count(), 4);
    assert_eq!(ok(&["concentration", "--config", p(&cfg), "--trials", "1"]).lines().count(), 1);

    std::fs::write(&cfg, "trials = 4\nbogus = 1\n").unwrap();
    let out = paley(&["concentration", "--config", p(&cfg)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn invalid_modulus_is_reported() {
    for args in [&["clique", "--N", "100"][..], &["concentration", "--primes", "1000"]] {
        let out = paley(args);
        assert!(!out.status.success());
        assert!(String::from_utf8_lossy(&out.stderr).contains("not an odd prime"));
    }
}

#[test]
fn borel_cantelli_rows() {
    let rows = json(&["borel-cantelli", "--primes", "101", "--Q", "4", "--trials", "2000", "--seed", "1"]);
    let row = &rows[0];
    assert_eq!(row["pi_q"], 2);
    assert_eq!(row["predicted"], 0.25);
    assert_eq!(row["forced"]["is_clique"], true);
    assert!(row["forced"]["omega"].as_u64().unwrap() >= 2);

    let csv = ok(&["--format", "csv", "borel-cantelli", "--primes", "101,103", "--Q", "4", "--trials", "100"]);
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn paley_scan_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let setters = json(&["paley-scan", "--limit", "1000", "--out", p(&out)]);
    assert_eq!(setters[0]["p"], 3);
    let text = std::fs::read_to_string(&out).unwrap();
    // 168 primes below 1000, minus 2, plus the header
    assert_eq!(text.lines().count(), 168);
    assert!(text.lines().any(|l| l == "3,2,"));
    assert!(text.lines().any(|l| l.starts_with("7,3,")));
}

#[test]
fn character_baseline_one_record_per_prime() {
    let text = ok(&["character-baseline", "--primes", "13,17"]);
    let omegas: Vec<u64> =
        text.lines().map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["omega"].as_u64().unwrap()).collect();
    assert_eq!(omegas.len(), 2);
    assert!(omegas.iter().all(|&w| w >= 2));
}

#[test]
fn fourier_scan_and_tail() {
    let v = json(&["fourier", "--N", "1009", "--Q", "16", "--l", "8", "--seed", "1", "--trials", "5"]);
    let scan = &v["scan"];
    assert!(scan["certified_sup_bound"].as_f64().unwrap() >= scan["grid_max"].as_f64().unwrap());
    assert_eq!(v["tail"]["trials"], 5);
}

#[test]
fn independence_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&["independence", "--x", "500", "--y", "7", "--out", p(dir.path())]);
    let (d, s) = (v["variance_direct"].as_f64().unwrap(), v["variance_parseval"].as_f64().unwrap());
    assert!((d - s).abs() <= 1e-9 * d);
    let counts = std::fs::read_to_string(dir.path().join("counts.csv")).unwrap();
    assert_eq!(counts.lines().count(), 1 + 16);
    let spectrum = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(spectrum.lines().count(), 1 + 16);
}

#[test]
fn second_moment_family_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fam.jsonl");
    let v = json(&["second-moment", "--N", "101", "--k", "3", "--Q", "10", "--trials", "200", "--out", p(&out)]);
    let size = v["family_size"].as_u64().unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count() as u64, size);
    assert_eq!(v["expected_r"].as_f64().unwrap(), size as f64 / 8.0);
}
