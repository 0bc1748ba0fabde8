use super::{CompressibleFn, FamilyError, Result};
use crate::rational::{self, Rational};
use crate::rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanExample {
    pub x: Vec<i8>,
    pub y: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    /// `y = f(x)`.
    Realizable,
    /// `y` uniform on the family's label alphabet, independent of `x`.
    Random,
}

/// Uniform corners in the family's convention. Example `i` depends only on
/// `(seed, i)`.
pub fn sample_dataset(cf: &CompressibleFn, count: usize, mode: LabelMode, seed: u64) -> Result<Vec<BooleanExample>> {
    let d = cf.d();
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, rng::ids::DATASET, i);
            let x = cf.convention().random_corner(&mut r, d);
            let y = match mode {
                LabelMode::Realizable => cf.eval(&x)?,
                LabelMode::Random => {
                    let mut r = rng::stream(seed, rng::ids::DATASET_LABEL, i);
                    cf.labels()[r.random_range(0..cf.labels().len())].clone()
                }
            };
            Ok(BooleanExample { x, y })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct Record {
    x: Vec<i8>,
    y_exact: String,
    y_float: f64,
}

pub fn write_jsonl<W: Write>(examples: &[BooleanExample], mut out: W) -> Result<()> {
    for e in examples {
        let rec = Record {
            x: e.x.clone(),
            y_exact: rational::format(&e.y),
            y_float: rational::to_f64(&e.y),
        };
        serde_json::to_writer(&mut out, &rec).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads records written by [`write_jsonl`]; `y_exact` is authoritative.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<BooleanExample>> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| FamilyError::Dataset { line: n + 1, reason };
        let rec: Record = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let y = rational::parse(&rec.y_exact).map_err(|e| bad(e.to_string()))?;
        out.push(BooleanExample { x: rec.x, y });
    }
    Ok(out)
}
