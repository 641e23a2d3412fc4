//! Every JSON artifact the CLI emits validates against its shipped schema.

mod common;

use common::{fixture, path_str, run_ok, workspace_file};
use serde_json::Value;

fn validator(name: &str) -> jsonschema::Validator {
    let path = workspace_file(&format!("schemas/{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn assert_valid(name: &str, instance: &Value) {
    let v = validator(name);
    let errors: Vec<String> = v.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}");
}

fn read_json(path: &std::path::Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn emitted_json_validates() {
    let dir = tempfile::tempdir().unwrap();
    let d = path_str(dir.path());
    run_ok(&["--seed", "9", "--out", d, "synth", "--documents", "30", "--codes", "10", "--topics", "3", "--mean-length", "12"]);
    assert_valid("ground_truth", &read_json(&dir.path().join("ground_truth.json")));

    let events = dir.path().join("events.csv");
    let events = path_str(&events);
    run_ok(&["--out", d, "fit", "--events", events, "--topics", "3", "--burn-in", "3", "--samples", "2", "--thin", "1", "--include-theta"]);
    assert_valid("model", &read_json(&dir.path().join("model.json")));
    assert_valid("corpus", &read_json(&dir.path().join("corpus.json")));
    assert_valid("vocabulary", &read_json(&dir.path().join("vocabulary.json")));

    let model = dir.path().join("model.json");
    let model = path_str(&model);
    run_ok(&["--out", d, "eval", model]);
    assert_valid("eval", &read_json(&dir.path().join("eval.json")));
    let eval: Value = serde_json::from_str(&run_ok(&["--format", "json", "eval", model])).unwrap();
    assert_valid("eval", &eval);

    let labels = fixture("topic_a_labels.csv");
    let report: Value =
        serde_json::from_str(&run_ok(&["--format", "json", "report", model, "--labels", path_str(&labels)])).unwrap();
    assert_valid("report", &report);

    let stats: Value = serde_json::from_str(&run_ok(&["--format", "json", "stats", "--events", events])).unwrap();
    assert_valid("stats", &stats);
}

#[test]
fn schemas_reject_tampered_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = path_str(dir.path());
    let events = fixture("small_events.csv");
    run_ok(&["--out", d, "fit", "--events", path_str(&events), "--topics", "2", "--burn-in", "1", "--samples", "1", "--thin", "1"]);
    let mut model = read_json(&dir.path().join("model.json"));
    assert!(validator("model").is_valid(&model));
    model["hyperparameters"]["rng"] = "mt19937".into();
    assert!(!validator("model").is_valid(&model));
    let mut model = read_json(&dir.path().join("model.json"));
    model["phi"][0][0] = (-0.5).into();
    assert!(!validator("model").is_valid(&model));
    let mut model = read_json(&dir.path().join("model.json"));
    model["theta"] = serde_json::json!([[1.0]]);
    assert!(!validator("model").is_valid(&model));
}
