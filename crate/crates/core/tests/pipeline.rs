use paley_core::cayley_graph::build_graph;
use paley_core::clique_solver::{max_clique_exact, SearchBudget};
use paley_core::harness::{
    persist_run, read_jsonl_file, run_character_baseline, run_concentration, sidecar_path, summarize, ExperimentConfig,
};
use paley_core::rng::derive_seed;
use paley_core::sign_models::{sample, Model};

#[test]
fn persisted_records_read_back_and_resummarize() {
    let cfg = ExperimentConfig { primes: vec![101, 61], trials: 4, master_seed: 2, ..Default::default() };
    let records = run_concentration(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs.jsonl");
    let rows = persist_run("concentration", &cfg, &records, &out).unwrap();

    assert_eq!(read_jsonl_file(&out).unwrap(), records);
    assert_eq!(summarize(&records, cfg.epsilon).unwrap(), rows);
    let csv = std::fs::read_to_string(sidecar_path(&out, "summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + rows.len());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(sidecar_path(&out, "meta.json")).unwrap()).unwrap();
    assert_eq!(meta["record_count"], 16);
    assert_eq!(meta["config"]["master_seed"], 2);
}

#[test]
fn records_can_be_regenerated_from_their_seed() {
    let cfg = ExperimentConfig { primes: vec![61], trials: 3, master_seed: 9, ..Default::default() };
    for r in run_concentration(&cfg).unwrap() {
        let seed = r.seed.unwrap();
        assert_eq!(seed, derive_seed(9, 61, r.trial_index));
        let g = build_graph(&sample(r.model, r.n, r.q.max(1), seed).unwrap());
        assert!(g.is_clique(&r.witness));
        assert_eq!(r.omega, max_clique_exact(&g, SearchBudget::unlimited()).size);
    }
}

#[test]
fn character_records_are_seedless() {
    let cfg = ExperimentConfig { primes: vec![29, 37], models: vec![Model::Character], ..Default::default() };
    let rs = run_character_baseline(&cfg).unwrap();
    assert_eq!(rs.len(), 2);
    assert!(rs.iter().all(|r| r.seed.is_none() && r.model == Model::Character && r.optimal));
}
