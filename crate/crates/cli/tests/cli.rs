use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn locc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locc")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn build_eq5_gives_a_complete_basis() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eq5.json");
    let out = locc(&["sets", "build", "eq5", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let set: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(set["states"].as_array().unwrap().len(), 81);
    let report = json(&locc(&["sets", "verify", path.to_str().unwrap()]));
    assert_eq!(report["result"]["complete"], true);
}

#[test]
fn build_then_verify_matches_the_built_in_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eq2.json");
    assert_eq!(code(&locc(&["sets", "build", "eq2", "--output", path.to_str().unwrap()])), 0);
    let from_file = json(&locc(&["sets", "verify", path.to_str().unwrap()]));
    let direct = json(&locc(&["sets", "verify", "eq2"]));
    assert_eq!(from_file["result"], direct["result"]);
    assert_eq!(from_file["result"]["orthogonal"], true);
    assert_eq!(from_file["result"]["complete"], false);
    assert_eq!(from_file["result"]["count"], 10);
    assert_eq!(from_file["result"]["dimension"], 12);
}

#[test]
fn eq1_has_twelve_states_for_qutrits() {
    let out = locc(&["sets", "build", "eq1", "--d", "3"]);
    assert_eq!(json(&out)["states"].as_array().unwrap().len(), 12);
}

#[test]
fn list_names_every_built_in() {
    let names: Vec<String> = json(&locc(&["sets", "list"]))["result"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["name"].as_str().unwrap().to_string())
        .collect();
    for n in ["bennett-qutrit", "bennett-S", "bennett-3qubit", "eq1", "eq2", "eq3", "eq5", "six-state"] {
        assert!(names.iter().any(|x| x == n), "{n} missing");
    }
}

#[test]
fn eq2_is_indistinguishable_across_a_bc() {
    let out = locc(&["analyze", "eq2", "--partition", "1|2,3"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["result"]["status"], "indistinguishable");
    assert_eq!(v["result"]["partition"], "1|2,3");
    assert_eq!(v["config"]["tolerances"]["amplitude"], 1e-9);
}

#[test]
fn eq2_has_a_protocol_across_c_ab() {
    let v = json(&locc(&["analyze", "eq2", "--partition", "3|1,2"]));
    assert_eq!(v["result"]["status"], "distinguishable");
    assert_eq!(v["result"]["certificate"]["type"], "measure");
}

#[test]
fn eq5_threshold_is_three() {
    let out = locc(&["threshold", "eq5"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["result"]["threshold"], 3);
}

#[test]
fn eq3_resource_pairs_are_adjacent() {
    let v = json(&locc(&["resource", "eq3", "--m", "4", "--d", "3"]));
    let pairs: Vec<Vec<u64>> = serde_json::from_value(v["result"]["valid"].clone()).unwrap();
    assert_eq!(pairs, vec![vec![1, 2], vec![1, 4], vec![2, 3], vec![3, 4]]);
}

#[test]
fn sweep_with_k_lists_each_partition() {
    let v = json(&locc(&["sweep", "eq3", "--m", "5", "--k", "2"]));
    assert_eq!(v["result"].as_array().unwrap().len(), 15);
}

#[test]
fn classification_of_eq2() {
    let v = json(&locc(&["classify", "eq2"]));
    assert_eq!(v["result"]["class"], "indistinguishable-in-one");
    assert_eq!(v["result"]["class_label"], "iii");
}

#[test]
fn inconclusive_verdicts_exit_with_two() {
    let out = locc(&["classify", "six-state"]);
    assert_eq!(code(&out), 2);
    assert!(json(&out)["result"]["class"].is_null());
}

#[test]
fn default_bound_entanglement_run() {
    let out = locc(&["bound-ent"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let kinds: Vec<&str> = v["result"]["cuts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["separable", "separable", "ppt-entangled"]);
    let w = v["result"]["cuts"][2]["witness_min_eig"].as_f64().unwrap();
    assert!(w < -1e-9);
}

#[test]
fn identity_unitary_is_reported_without_detection() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("identity.json");
    fs::write(&path, "[[[1,0],[0,0],[0,0]],[[0,0],[1,0],[0,0]],[[0,0],[0,0],[1,0]]]").unwrap();
    let out = locc(&["bound-ent", "--unitary", path.to_str().unwrap()]);
    let v = json(&out);
    let w = v["result"]["cuts"][2]["witness_min_eig"].as_f64().unwrap();
    assert!((w - 0.008_648_203_639_131_817).abs() < 1e-10);
    assert_eq!(code(&out), 2);
}

#[test]
fn non_unitary_matrix_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "[[[2,0],[0,0],[0,0]],[[0,0],[1,0],[0,0]],[[0,0],[0,0],[1,0]]]").unwrap();
    let out = locc(&["bound-ent", "--unitary", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not unitary"));
}

#[test]
fn completion_failure_exits_with_three() {
    let out = locc(&["bound-ent", "--tol", "1e-300"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn output_is_deterministic() {
    let a = locc(&["sweep", "eq2", "--seed", "11"]);
    let b = locc(&["sweep", "eq2", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["config"]["seed"], 11);
}

#[test]
fn bad_input_is_rejected() {
    assert_eq!(code(&locc(&["analyze", "eq2", "--partition", "1|2"])), 1);
    assert_eq!(code(&locc(&["analyze", "eq2", "--partition", "1,1|2,3"])), 1);
    assert_eq!(code(&locc(&["sets", "build", "eq9"])), 1);
    assert_eq!(code(&locc(&["threshold", "eq2", "--tol=-1"])), 1);
    assert_eq!(code(&locc(&["threshold", "eq2", "--tol", "-1"])), 1);
    assert_eq!(code(&locc(&["analyze", "eq2"])), 1);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("overlap.json");
    fs::write(
        &path,
        r#"{"name":"overlap","dims":[2,2],"states":[
            {"label":"a","factors":[[[1,0],[0,0]],[[1,0],[0,0]]]},
            {"label":"b","factors":[[[1,0],[1,0]],[[1,0],[0,0]]]}]}"#,
    )
    .unwrap();
    let out = locc(&["analyze", path.to_str().unwrap(), "--partition", "1|2"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not orthogonal"));
    let out = locc(&["sets", "verify", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["result"]["orthogonal"], false);

    fs::write(&path, "{not json").unwrap();
    assert_eq!(code(&locc(&["sets", "verify", path.to_str().unwrap()])), 1);
}
