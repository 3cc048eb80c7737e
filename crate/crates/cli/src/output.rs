//! Report envelopes and file writers.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

pub const SWEEP_HEADER: &str = "n,ell,m,rate,deficit,failure_mass";

/// Units of every number a report carries, keyed by field name.
pub type Units = BTreeMap<String, String>;

pub fn units(pairs: &[(&str, &str)]) -> Units {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub command: String,
    /// Seed of any random draw the report depends on.
    pub seed: Option<u64>,
    pub units: Units,
    pub report: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(command: &str, seed: Option<u64>, units: Units, report: T) -> Self {
        Envelope { schema_version: SCHEMA_VERSION, command: command.to_string(), seed, units, report }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes `text` to `path`, or to stdout without one.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

/// `<out>.meta.json` next to a CSV file.
pub fn meta_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u64,
    pub ell: u64,
    pub m: u64,
    pub rate: f64,
    pub deficit: f64,
    pub failure_mass: f64,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{},{},{},{},{},{}\n", r.n, r.ell, r.m, r.rate, r.deficit, r.failure_mass));
    }
    s
}
