use std::process::{Command, Output};

use serde_json::Value;

fn postlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_postlab"))
        .args(args)
        .env_remove("POSTLAB_PRIME")
        .output()
        .expect("binary runs")
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn expected_command() {
    let out = postlab(&["expected", "--n", "3", "--m", "2", "--d", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = &json_lines(&out)[0];
    assert_eq!((v["c"].as_u64(), v["r"].as_u64(), v["q"].as_u64()), (Some(19), Some(9), Some(2)));
    assert_eq!(postlab(&["expected", "--n", "1", "--m", "1", "--d", "5"]).status.code(), Some(3));
    assert_eq!(postlab(&["expected", "--m", "1"]).status.code(), Some(2));
}

#[test]
fn verify_bijective_hh_case() {
    let out = postlab(&["verify", "--m", "1", "--d", "6", "--variant", "bijective"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json_lines(&out)[0]["report"];
    assert_eq!((r["rows"].as_u64(), r["cols"].as_u64(), r["rank"].as_u64()), (Some(84), Some(84), Some(84)));
    assert_eq!(r["verdict"], "CERTIFIED_MAXIMAL");
}

#[test]
fn verify_p4_exception_exits_one() {
    let out = postlab(&["verify", "--m", "2", "--d", "2", "--n", "4", "--custom", "m=2,r=2"]);
    assert_eq!(out.status.code(), Some(1));
    let r = &json_lines(&out)[0]["report"];
    assert_eq!(r["verdict"], "NOT_CERTIFIED");
    assert!(r["rank"].as_u64().unwrap() < r["expected_rank"].as_u64().unwrap());
}

#[test]
fn verify_main_theorem_instance() {
    let out = postlab(&["verify", "--m", "3", "--d", "12", "--variant", "injective"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn prime_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_postlab"))
        .args(["verify", "--m", "1", "--d", "3", "--variant", "bijective"])
        .env("POSTLAB_PRIME", "32003")
        .output()
        .unwrap();
    assert_eq!(json_lines(&out)[0]["report"]["prime"], 32003);
}

#[test]
fn output_is_byte_identical() {
    let args = ["verify", "--m", "2", "--d", "5", "--seed", "12"];
    assert_eq!(postlab(&args).stdout, postlab(&args).stdout);
    let scan = ["scan", "--m", "2..3", "--d", "2..6", "--parallelism", "3"];
    assert_eq!(postlab(&scan).stdout, postlab(&scan).stdout);
}

#[test]
fn random_seed_is_echoed() {
    let out = postlab(&["verify", "--m", "1", "--d", "2", "--variant", "bijective", "--seed", "random"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json_lines(&out)[0]["report"]["seed"].is_u64());
}

#[test]
fn ledger_table_rows() {
    let out = postlab(&["ledger", "--kind", "I", "--k", "5", "--eps", "1", "--m", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["steps"].as_array().unwrap().len(), 2);
    assert_eq!(v["final_label"]["kind"], "I");
    assert_eq!((v["final_label"]["k"].as_u64(), v["final_label"]["eps"].as_u64()), (Some(4), Some(2)));

    let out = postlab(&["ledger", "--kind", "I", "--k", "4", "--eps", "2", "--m", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["steps"].as_array().unwrap().len(), 3);
    assert_eq!(v["final_label"]["kind"], "B");
    let step = &v["steps"][0];
    for key in ["delta", "l", "l_s", "l_z", "t", "t_s", "t_z"] {
        assert!(step["move"][key].is_u64(), "{key}");
    }
    for key in ["a", "b", "p", "p_d", "p_m", "m_pt"] {
        assert!(!step["trace"][key].is_null(), "{key}");
    }
}

#[test]
fn ledger_failure_exits_one() {
    let out = postlab(&["ledger", "--kind", "I", "--d", "12", "--m", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("violation"));
}

#[test]
fn scan_csv() {
    let out = postlab(&["scan", "--m", "2", "--d", "2..2"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(&out.stdout[..]);
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["m", "d", "variant", "rows", "cols", "rank", "expected", "defect", "verdict", "prime", "seed"]
    );
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| &r[8] == "CERTIFIED_MAXIMAL"));
}

#[test]
fn p1p1_command() {
    let out = postlab(&["p1p1", "--a", "0", "--b", "3", "--pd", "1", "--q", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = &json_lines(&out)[0];
    assert_eq!(v["rank_special"], true);
    assert_eq!(v["predicate_special"], true);

    let out = postlab(&["p1p1", "--a", "3", "--b", "12", "--pm", "2", "--mpt", "3", "--fill"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_lines(&out)[0]["rank_special"], false);
}

#[test]
fn config_file_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.cfg");
    let dump = dir.path().join("m.txt");
    let report = dir.path().join("report.json");
    std::fs::write(&cfg, format!("seed = 5\nretries = 2\noutput = {}\n", report.display())).unwrap();
    let out = postlab(&[
        "--config",
        cfg.to_str().unwrap(),
        "verify",
        "--m",
        "1",
        "--d",
        "3",
        "--variant",
        "bijective",
        "--dump",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(std::fs::read_to_string(&report).unwrap().trim()).unwrap();
    assert_eq!(v["report"]["seed"], 5);
    let text = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(text.lines().next(), Some("20 20 65521"));
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn column_budget() {
    let out = postlab(&["--max-cols", "100", "verify", "--m", "1", "--d", "9", "--variant", "bijective"]);
    assert_eq!(out.status.code(), Some(2));
    let out = postlab(&["--max-cols", "100", "--force", "verify", "--m", "1", "--d", "9", "--variant", "bijective"]);
    assert_eq!(out.status.code(), Some(0));
}
