//! The `hardnet` command line.
//!
//! Every report has a canonical part (tool, version, command, config,
//! status, result) that depends only on the arguments and seed, and a
//! `runtime` part with wall time and thread count.

mod args;
mod commands;
mod family;

pub use args::Cli;

use clap::Parser;
use serde_json::{json, Map, Value};
use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// A command's result and whether its checks passed.
pub(crate) struct Outcome {
    pub result: Value,
    pub passed: bool,
}

impl Outcome {
    pub fn pass(result: Value) -> Self {
        Self { result, passed: true }
    }

    pub fn checked(result: Value, passed: bool) -> Self {
        Self { result, passed }
    }
}

fn command_name(c: &args::Command) -> &'static str {
    use args::{AttackTarget, Command, VerifyCheck};
    match c {
        Command::Compile { .. } => "compile",
        Command::Lift { .. } => "lift",
        Command::Transform { .. } => "transform",
        Command::Verify { check } => match check {
            VerifyCheck::Identity { .. } => "verify identity",
            VerifyCheck::Goodset { .. } => "verify goodset",
            VerifyCheck::Marginal { .. } => "verify marginal",
            VerifyCheck::Case3 { .. } => "verify case3",
        },
        Command::VerifyPairwise { .. } => "verify-pairwise",
        Command::SqGame { .. } => "sq-game",
        Command::SqSimulate { .. } => "sq-simulate",
        Command::Attack {
            target: AttackTarget::ParityLift { .. },
        } => "attack parity-lift",
        Command::MqDemo { .. } => "mq-demo",
    }
}

/// The report without its `runtime` member.
pub fn canonical(report: &Value) -> Value {
    let mut r = report.clone();
    if let Some(m) = r.as_object_mut() {
        m.remove("runtime");
    }
    r
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn render(report: &Value, format: args::Format) -> Result<Vec<u8>, CliError> {
    match format {
        args::Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(report).map_err(input_err)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        args::Format::Csv => {
            let mut rows = Vec::new();
            flatten("", report, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"]).map_err(input_err)?;
            for (k, v) in rows {
                w.write_record([k, v]).map_err(input_err)?;
            }
            w.into_inner().map_err(input_err)
        }
    }
}

/// Parses `args` (including the program name), runs, writes the report and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let started = Instant::now();
    let threads = cli.threads.max(1);
    let outcome = crate::rng::with_threads(threads, || commands::dispatch(&cli));
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("hardnet: {e}");
            return EXIT_USAGE;
        }
    };
    let mut report = Map::new();
    report.insert("tool".into(), json!("hardnet"));
    report.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    report.insert("command".into(), json!(command_name(&cli.command)));
    report.insert(
        "config".into(),
        json!({ "seed": cli.seed, "format": cli.format, "args": cli.command }),
    );
    report.insert("status".into(), json!(if outcome.passed { "pass" } else { "fail" }));
    report.insert("result".into(), outcome.result);
    if !cli.canonical_only {
        report.insert(
            "runtime".into(),
            json!({ "runtime_ms": started.elapsed().as_millis() as u64, "threads": threads }),
        );
    }
    let bytes = match render(&Value::Object(report), cli.format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("hardnet: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match &cli.report {
        Some(path) => std::fs::write(path, &bytes),
        None => std::io::stdout().lock().write_all(&bytes),
    };
    if let Err(e) = written {
        eprintln!("hardnet: cannot write report: {e}");
        return EXIT_USAGE;
    }
    if outcome.passed {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}
