use super::args::FamilyArgs;
use super::{input_err, CliError};
use crate::families::{CompressibleFn, FamilySpec};
use std::path::Path;

fn list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Input(format!("bad {what} entry {s:?}"))))
        .collect()
}

impl FamilyArgs {
    /// Spec from a file or from flags; a missing subset or secret is drawn
    /// from the seed.
    pub fn resolve(&self, seed: u64) -> Result<FamilySpec, CliError> {
        let name = self.family.as_str();
        if name.ends_with(".json") || Path::new(name).is_file() {
            let text = std::fs::read_to_string(name)
                .map_err(|e| CliError::Input(format!("cannot read family spec {name}: {e}")))?;
            return FamilySpec::from_json(&text).map_err(input_err);
        }
        match name {
            "parity" => {
                let d = self.d.unwrap_or(10);
                Ok(match &self.subset {
                    Some(s) => FamilySpec::Parity { d, subset: list(s, "subset")? },
                    None => FamilySpec::random_parity(d, seed),
                })
            }
            "lwr" => {
                let (n, q, p) = (self.n.unwrap_or(2), self.q.unwrap_or(8), self.p.unwrap_or(2));
                Ok(match &self.w {
                    Some(w) => FamilySpec::Lwr { n, q, p, w: list(w, "secret")? },
                    None => FamilySpec::random_lwr(n, q, p, seed),
                })
            }
            "keyed_toy" | "keyed-toy" => Ok(FamilySpec::KeyedToy {
                d: self.d.unwrap_or(8),
                key: self.key.unwrap_or(seed),
                depth_budget: self.depth_budget.unwrap_or(2),
            }),
            other => Err(CliError::Input(format!(
                "unknown family {other:?}: expected parity, lwr, keyed_toy or a .json spec"
            ))),
        }
    }

    pub fn build(&self, seed: u64) -> Result<(FamilySpec, CompressibleFn), CliError> {
        let spec = self.resolve(seed)?;
        let cf = spec.build().map_err(input_err)?;
        Ok((spec, cf))
    }
}
