use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orbisymp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn text(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&text(p)).unwrap()
}

#[test]
fn dims_of_shipped_signatures() {
    for (name, expected) in [("genus2-fuchsian", 16), ("s2-2233-fuchsian", 4), ("s2-237", 0)] {
        let sig = corpus(&format!("{name}.signature.json"));
        let rep = corpus(&format!("{name}.rep.json"));
        let out = run(&["dims", sig.to_str().unwrap(), "--rep", rep.to_str().unwrap()]);
        assert!(out.status.success());
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["formula"], expected, "{name}");
        assert_eq!(v["numeric"], expected, "{name}");
    }
}

#[test]
fn missing_file_exits_2() {
    let out = run(&["dims", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("here.json"));
}

#[test]
fn unknown_suite_exits_2() {
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn fox_suite_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = run(&["verify", "--suite", "fox", "--seed", "7", "--report", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(text(&a), text(&b));
    assert_eq!(json(&a)["checks"][0]["status"], "pass");
}

#[test]
fn pairing_on_shipped_corpus() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["genus2-fuchsian", "genus2-deformed", "s2-2233-fuchsian", "s2-2233-deformed", "pants-generic"] {
        let report = dir.path().join(format!("{name}.json"));
        let f = |tag: &str| corpus(&format!("{name}.{tag}.json")).to_str().unwrap().to_string();
        let out = bin()
            .args(["pairing", "--rep", &f("rep"), "--u", &f("u"), "--v", &f("v"), "--report"])
            .arg(&report)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let d = json(&report)["discrepancy"].as_f64().unwrap();
        assert!(d < 1e-10, "{name}: {d:e}");
    }
}

#[test]
fn fuchsian_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("rep.json");
    let sig = corpus("genus2-fuchsian.signature.json");
    assert!(run(&["fuchsian", sig.to_str().unwrap(), "-o", out_path.to_str().unwrap()]).status.success());
    assert_eq!(json(&out_path)["generators"], json(&corpus("genus2-fuchsian.rep.json"))["generators"]);
}

#[test]
fn flow_at_zero_reproduces_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let split = dir.path().join("split.json");
    let spec = dir.path().join("flow.json");
    let out_path = dir.path().join("out.json");
    fs::write(&split, r#"{"curves": [{"type": "scc-separating", "first": 1, "last": 1}]}"#).unwrap();
    fs::write(&spec, r#"{"curve": 0, "flavor": "L", "t": 0.0}"#).unwrap();
    let rep = corpus("genus2-fuchsian.rep.json");
    let out = bin()
        .args(["flow", "--rep"])
        .arg(&rep)
        .arg("--splitting")
        .arg(&split)
        .arg("--spec")
        .arg(&spec)
        .arg("-o")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out_path)["generators"], json(&rep)["generators"]);

    fs::write(&spec, r#"{"curve": 0, "flavor": "M", "t": 0.5}"#).unwrap();
    let split2 = dir.path().join("full.json");
    fs::write(&split2, r#"{"curves": [{"type": "full-suborbifold", "i": 1, "j": 2}]}"#).unwrap();
    let out = bin()
        .args(["flow", "--rep"])
        .arg(corpus("s2-2233-fuchsian.rep.json"))
        .arg("--splitting")
        .arg(&split2)
        .arg("--spec")
        .arg(&spec)
        .arg("-o")
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "bulge flows do not exist along full suborbifolds");
}

#[test]
fn split_writes_two_pieces() {
    let dir = tempfile::tempdir().unwrap();
    let split = dir.path().join("split.json");
    let out_path = dir.path().join("pieces.json");
    fs::write(&split, r#"{"curves": [{"type": "scc-separating", "first": 1, "last": 1}]}"#).unwrap();
    let sig = corpus("genus2-fuchsian.signature.json");
    let out = bin().arg("split").arg(&sig).arg(&split).arg("-o").arg(&out_path).output().unwrap();
    assert!(out.status.success());
    let v = json(&out_path);
    assert_eq!(v["pieces"].as_array().unwrap().len(), 2);
}
