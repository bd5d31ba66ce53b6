use std::process::{Command, Output};

fn latkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latkit")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn temp_file(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("latkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn reproduce_section_text() {
    let out = latkit(&["reproduce", "--section", "z2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS     Z2.rot90"));
    assert!(text.ends_with("5 passed, 0 failed, 0 flagged\n"));
}

#[test]
fn reproduce_json_lists_cases() {
    let out = latkit(&["reproduce", "--section", "a3", "--format", "json", "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let cases = v["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 10);
    let flagged = cases.iter().find(|c| c["id"] == "A3.neg_4cycle").unwrap();
    assert_eq!(flagged["status"], "flagged");
    assert_eq!(flagged["computed"]["det"], 32);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(latkit(&["reproduce", "--section", "e8"]).status.code(), Some(2));
    assert_eq!(latkit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(latkit(&["identify", "--lattice", "Q3"]).status.code(), Some(2));
}

#[test]
fn failing_fixture_file_exits_one() {
    let path = temp_file(
        "bad.json",
        r#"[{"id":"Z2.rot90","group":"z2","base":"Z2","spec":{"kind":"signed","images":[2,-1]},"expect_det":8}]"#,
    );
    let out = Command::new(env!("CARGO_BIN_EXE_latkit"))
        .args(["reproduce"])
        .env("LATKIT_FIXTURES", &path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn construct_rot90() {
    let out = latkit(&["construct", "--lattice", "Z2", "--isometry", r#"{"kind":"signed","images":[2,-1]}"#]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["det"], 4);
    assert_eq!(v["rank"], 4);
    assert_eq!(v["index"], 2);
    assert_eq!(v["even"], true);
    assert_eq!(v["smith"], serde_json::json!([1, 1, 2, 2]));
}

#[test]
fn identify_from_file() {
    let path = temp_file("d4.json", r#"{"gram":[[2,-1,0,0],[-1,2,-1,-1],[0,-1,2,0],[0,-1,0,2]]}"#);
    let out = latkit(&["identify", "--lattice", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"]["named"], "D4");
    assert_eq!(v["revalidated"], true);
    assert_eq!(v["certificate"].as_array().unwrap().len(), 4);
}

#[test]
fn smith_reports_discriminant() {
    let out = latkit(&["smith", "--lattice", "A2(x)A2"]);
    let v = json(&out);
    assert_eq!(v["det"], 81);
    assert_eq!(v["discriminant_orders"], serde_json::json!([3, 3, 9]));
}

#[test]
fn overlattice_search_and_doubling() {
    let k = latkit(&["construct", "--lattice", "A3", "--isometry", r#"{"kind":"perm","cycles":[[1,2]]}"#]);
    let v = json(&k);
    let file = temp_file("k.json", &serde_json::json!({ "gram": v["gram"] }).to_string());
    let path = file.to_str().unwrap();
    let found = json(&latkit(&["overlattice", "--lattice", path, "--strategy", "search", "--index", "4"]));
    assert!(found.as_array().unwrap().iter().all(|h| h["det"] == 2 && h["index"] == 4));
    let doubled = json(&latkit(&["overlattice", "--lattice", path, "--strategy", "double4", "--index", "2"]));
    assert_eq!(doubled.as_array().unwrap().last().unwrap()["det"], 2);
    assert_eq!(latkit(&["overlattice", "--lattice", path, "--strategy", "search"]).status.code(), Some(2));
}

#[test]
fn tensor_of_a2() {
    let v = json(&latkit(&["tensor", "--left", "A2", "--right", "A2"]));
    assert_eq!(v["gram"][0], serde_json::json!([4, -2, -2, 1]));
}
