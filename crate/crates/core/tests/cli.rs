mod common;

use common::*;
use hardnet::relu_ir::from_document;
use serde_json::Value;

#[test]
fn every_subcommand_runs_and_matches_the_schema() {
    let schema = schema();
    for args in SMALL_RUNS {
        let (code, v) = report(args);
        assert_eq!(code, 0, "{args:?}: {v}");
        assert_eq!(v["status"], "pass", "{args:?}");
        validate(&schema, &v, "$").unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert!(v["runtime"]["runtime_ms"].is_u64());
    }
}

#[test]
fn canonical_only_drops_runtime() {
    let (_, v) = report(&["--canonical-only", "mq-demo", "--queries", "10"]);
    assert!(v.get("runtime").is_none());
    validate(&schema(), &v, "$").unwrap();
}

#[test]
fn exact_fields_are_rational_strings() {
    let (_, v) = report(&["verify-pairwise", "--family", "all-functions", "--d", "2", "--tables", "5"]);
    assert_eq!(v["result"]["pairwise"]["eta_actual"], "1/4");
    assert!(is_rational_string(v["result"]["variance"]["max_variance"].as_str().unwrap()));
    let (_, g) = report(&["sq-game", "--tau", "1/8", "--queries", "3"]);
    for r in g["result"]["transcript"]["rounds"].as_array().unwrap() {
        assert!(is_rational_string(r["answer"].as_str().unwrap()));
        assert!(r["answer_f64"].is_f64());
    }
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["verify", "identity", "--bad-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["lift", "--family", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["sq-game", "--tau", "abc"]).status.code(), Some(2));
}

#[test]
fn malformed_family_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"parity\", \"d\": \"ten\"}").unwrap();
    let out = run(&["lift", "--family", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["lift", "--family", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn budget_exceedance_exits_2() {
    let out = run(&["verify-pairwise", "--family", "lwr", "--n", "3", "--q", "16", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("limit"));
}

#[test]
fn verification_failure_exits_1() {
    let (code, v) = report(&["attack", "parity-lift", "--d", "20", "--samples", "5"]);
    assert_eq!(code, 1);
    assert_eq!(v["status"], "fail");
    assert_eq!(v["result"]["exact_recovery"], false);
}

#[test]
fn family_file_and_network_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("lwr.json");
    std::fs::write(&spec, r#"{"kind":"lwr","n":2,"q":8,"p":2,"w":[3,5]}"#).unwrap();
    let net = dir.path().join("net.json");
    let (code, v) = report(&[
        "lift",
        "--family",
        spec.to_str().unwrap(),
        "--mode",
        "naive",
        "--out",
        net.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["family"]["w"], serde_json::json!([3, 5]));
    let parsed = from_document(&std::fs::read_to_string(&net).unwrap()).unwrap();
    assert_eq!(parsed.input_dim(), 6);
    assert_eq!(Value::from(parsed.hidden_layers()), v["result"]["lift"]["hidden_layers"]);

    let data = dir.path().join("data.jsonl");
    let (code, _) = report(&["transform", "--family", "parity", "--d", "5", "--count", "40", "--out", data.to_str().unwrap()]);
    assert_eq!(code, 0);
    let lines: Vec<Value> = std::fs::read_to_string(&data)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 40);
    for l in &lines {
        assert_eq!(l["z"].as_array().unwrap().len(), 5);
        assert!(is_rational_string(l["y_tilde_exact"].as_str().unwrap()));
    }

    let gadget = dir.path().join("n1.json");
    assert_eq!(run(&["compile", "--gadget", "n1", "--d", "10", "--out", gadget.to_str().unwrap()]).status.code(), Some(0));
    let n1 = from_document(&std::fs::read_to_string(&gadget).unwrap()).unwrap();
    let half = n1.eval_exact_scalar(&[hardnet::rational::rat(1, 200)]).unwrap();
    assert_eq!(half, hardnet::rational::rat(1, 2));
}

#[test]
fn report_file_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&["--report", path.to_str().unwrap(), "mq-demo", "--queries", "20"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["boolean_queries"], 20);

    let out = run(&["--format", "csv", "--canonical-only", "mq-demo", "--queries", "20"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let pairs: Vec<(String, String)> = rows
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].to_string())
        })
        .collect();
    assert!(pairs.contains(&("result.real_queries".into(), "20".into())));
    assert!(pairs.contains(&("status".into(), "pass".into())));
}

#[test]
fn seed_env_fallback() {
    let with_flag = run(&["--canonical-only", "--seed", "77", "lift", "--d", "6"]).stdout;
    let with_env = bin()
        .env("HARDNET_SEED", "77")
        .args(["--canonical-only", "lift", "--d", "6"])
        .output()
        .unwrap()
        .stdout;
    assert_eq!(with_flag, with_env);
    let other = run(&["--canonical-only", "--seed", "78", "lift", "--d", "6"]).stdout;
    assert_ne!(with_flag, other);
}
