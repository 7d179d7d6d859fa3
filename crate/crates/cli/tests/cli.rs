use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sumset(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumset"))
        .args(args)
        .env("SUMSET_OUT", out)
        .output()
        .expect("spawn sumset")
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_writes_pair_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = sumset(&["gen", "--dims", "97", "--generator", "interval", "--seed", "4"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let lines = json_lines(&out);
    assert_eq!(lines[0]["schema"], "sumset.pair/1");
    let a: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(a["dims"], serde_json::json!([97]));
    assert_eq!(a, lines[0]["a"]);
}

#[test]
fn gen_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "--dims", "60", "--seed", "11"];
    let first = sumset(&args, dir.path()).stdout;
    let second = sumset(&args, dir.path()).stdout;
    assert_eq!(first, second);
    let other = sumset(&["gen", "--dims", "60", "--seed", "12"], dir.path()).stdout;
    assert_ne!(first, other);
}

#[test]
fn gen_csv_lists_elements() {
    let dir = tempfile::tempdir().unwrap();
    let out = sumset(&["--format", "csv", "gen", "--dims", "10", "--generator", "interval"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("set,element\n"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("a,") || l.starts_with("b,")));
}

#[test]
fn adversarial_kneser_exits_with_violation() {
    let dir = tempfile::tempdir().unwrap();
    let out = sumset(&["check", "--law", "kneser", "--dims", "6", "--generator", "adversarial-subgroup"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let lines = json_lines(&out);
    assert_eq!(lines[0]["schema"], "sumset.instance/1");
    assert_eq!(lines[0]["verdict"], "violation");
    assert_eq!(lines.last().unwrap()["schema"], "sumset.run/1");
}

#[test]
fn ruzsa_batch_holds() {
    let dir = tempfile::tempdir().unwrap();
    let out = sumset(&["check", "--law", "ruzsa", "--dims", "97", "--trials", "20"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let lines = json_lines(&out);
    assert_eq!(lines.len(), 21);
    assert_eq!(lines[20]["aggregate"]["holds"], 20);
}

#[test]
fn check_on_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    fs::write(&a, r#"{"dims":[6],"members":[0,2,4]}"#).unwrap();
    fs::write(&b, r#"{"dims":[6],"members":[0,1]}"#).unwrap();
    let out = sumset(&["check", "--law", "kneser", "--a", path_str(&a), "--b", path_str(&b)], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let lines = json_lines(&out);
    assert_eq!(lines[0]["verdict"], "holds");
}

#[test]
fn conv_reports_partial_size() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    fs::write(&a, r#"{"dims":[10],"members":[0,1,2]}"#).unwrap();
    let out = sumset(&["conv", "--a", path_str(&a), "--b", path_str(&a), "--threshold", "1/10"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = &json_lines(&out)[0];
    assert_eq!(v["sumset_size"], 5);
    assert_eq!(v["partial_size"], 5);
    assert!(dir.path().join("profile.csv").exists());
}

#[test]
fn recover_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let gen = sumset(&["gen", "--dims", "6000", "--generator", "bohr-noise", "--freq", "5", "--seed", "2"], dir.path());
    assert_eq!(gen.status.code(), Some(0));
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let spec = dir.path().join("spec.csv");
    let out = sumset(
        &[
            "recover",
            "--a",
            path_str(&a),
            "--b",
            path_str(&b),
            "--delta",
            "1/30",
            "--spectrum-csv",
            path_str(&spec),
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = &json_lines(&out)[0];
    assert_eq!(v["schema"], "sumset.recovery/1");
    assert_eq!(v["success"], true);
    assert_eq!(v["residual_a"], "0");
    let header = fs::read_to_string(&spec).unwrap();
    assert!(header.starts_with("xi_0,magnitude"));
}

#[test]
fn shrink_writes_log_and_set() {
    let dir = tempfile::tempdir().unwrap();
    sumset(&["gen", "--dims", "6000", "--generator", "bohr-noise", "--seed", "1"], dir.path());
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let out = sumset(
        &["--format", "csv", "shrink", "--a", path_str(&a), "--b", path_str(&b), "--delta-target", "1/20", "--delta", "1/30"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("step,size,defect"));
    assert!(dir.path().join("c.json").exists());
    assert!(dir.path().join("shrink_log.csv").exists());
}

#[test]
fn run_config_persists_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"dims":[64],"generator":{"kind":"random"},"task":{"law":"kneser"},"seed":3,"trials":5}"#).unwrap();
    let out = sumset(&["run", "--config", path_str(&cfg)], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let jsonl = fs::read_to_string(dir.path().join("run.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 6);
    assert!(dir.path().join("instances.csv").exists());
}

#[test]
fn config_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"dims":[64],"generator":{"kind":"random"},"task":{"law":"nope"}}"#).unwrap();
    assert_eq!(sumset(&["run", "--config", path_str(&cfg)], dir.path()).status.code(), Some(3));
    assert_eq!(sumset(&["gen", "--dims", "0"], dir.path()).status.code(), Some(3));
    assert_eq!(sumset(&["check", "--law", "kneser"], dir.path()).status.code(), Some(3));
    assert_eq!(sumset(&["conv", "--a", "/missing.json", "--b", "/missing.json"], dir.path()).status.code(), Some(3));
    assert_eq!(sumset(&["gen", "--dims", "10", "--generator", "random", "--density", "2"], dir.path()).status.code(), Some(3));
}

#[test]
fn shipped_configs_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (name, code) in [("ruzsa-97.json", 0), ("recover-6000.json", 0), ("kneser-z6.json", 2)] {
        let dir = tempfile::tempdir().unwrap();
        let out = sumset(&["run", "--config", path_str(&root.join(name))], dir.path());
        assert_eq!(out.status.code(), Some(code), "{name}");
    }
}

#[test]
fn empty_batch_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"dims":[97],"generator":{"kind":"random"},"task":{"law":"ruzsa"},"trials":0}"#).unwrap();
    let out = sumset(&["run", "--config", path_str(&cfg)], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_lines(&out)[0]["aggregate"]["trials"], 0);
}
