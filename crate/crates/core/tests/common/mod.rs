#![allow(dead_code)]

use serde_json::Value;
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hardnet"));
    c.env_remove("HARDNET_SEED").env("RUST_LOG", "error");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn report(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let code = out.status.code().unwrap_or(-1);
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: bad report ({e}): {}", String::from_utf8_lossy(&out.stderr)));
    (code, v)
}

/// One small invocation per subcommand.
pub const SMALL_RUNS: &[&[&str]] = &[
    &["compile", "--gadget", "n2", "--d", "4"],
    &["compile", "--gadget", "family", "--family", "lwr"],
    &["lift", "--family", "parity", "--d", "6", "--mode", "compressed"],
    &["transform", "--family", "lwr", "--count", "200"],
    &["verify", "identity", "--family", "parity", "--d", "8", "--samples", "300", "--adversarial", "50"],
    &["verify", "goodset", "--d", "10", "--samples", "20000"],
    &["verify", "marginal", "--family", "parity", "--d", "4", "--samples", "5000"],
    &["verify", "case3", "--family", "lwr", "--samples", "100"],
    &["verify-pairwise", "--family", "lwr", "--n", "2", "--q", "4", "--p", "2", "--tables", "20"],
    &["sq-game", "--family", "lwr", "--n", "2", "--q", "8", "--p", "2", "--tau", "0.25", "--queries", "5"],
    &["sq-simulate", "--d", "6", "--trials", "2", "--ground-truth-samples", "20000", "--m", "300"],
    &["attack", "parity-lift", "--d", "12", "--samples", "400"],
    &["mq-demo", "--family", "lwr", "--queries", "500"],
];

fn type_ok(v: &Value, t: &str) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "integer" => v.is_i64() || v.is_u64(),
        "number" => v.is_number(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        _ => false,
    }
}

/// Checks the subset of JSON Schema used by the published report schema.
pub fn validate(schema: &Value, v: &Value, path: &str) -> Result<(), String> {
    let fail = |msg: String| Err(format!("{path}: {msg}"));
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        if !type_ok(v, t) {
            return fail(format!("expected {t}, found {v}"));
        }
    }
    if let Some(c) = schema.get("const") {
        if c != v {
            return fail(format!("expected {c}, found {v}"));
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(v) {
            return fail(format!("{v} not in {options:?}"));
        }
    }
    let Some(obj) = v.as_object() else { return Ok(()) };
    for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
        let key = key.as_str().unwrap();
        if !obj.contains_key(key) {
            return fail(format!("missing {key}"));
        }
    }
    let props = schema.get("properties").and_then(Value::as_object);
    let closed = schema.get("additionalProperties") == Some(&Value::Bool(false));
    for (k, child) in obj {
        match props.and_then(|p| p.get(k)) {
            Some(s) => validate(s, child, &format!("{path}.{k}"))?,
            None if closed => return fail(format!("unexpected {k}")),
            None => {}
        }
    }
    Ok(())
}

pub fn schema() -> Value {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn is_rational_string(s: &str) -> bool {
    let Some((n, d)) = s.split_once('/') else { return false };
    let n = n.strip_prefix('-').unwrap_or(n);
    !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()) && !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit())
}
