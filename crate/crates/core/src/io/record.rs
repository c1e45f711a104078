use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use crate::error::IoError;
use crate::model::Scenario;
use crate::run::CommandResult;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Columns of the results CSV, in order.
pub const CSV_COLUMNS: [&str; 15] = [
    "scenario_digest",
    "command",
    "y_star",
    "net_resources",
    "condition_verdict",
    "theta_star",
    "tech_net",
    "path_feasible",
    "path_first_failure",
    "control_problem",
    "prop1_premises",
    "prop1_conclusion",
    "ai_holding",
    "prop3_holds",
    "certified",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario_digest: String,
    pub command: String,
    pub tool_version: String,
    /// RFC 3339, UTC. Not part of any digest.
    pub timestamp: String,
    pub result: CommandResult,
    /// Oracle checks run alongside the solver, by name.
    pub certification: BTreeMap<String, bool>,
}

impl RunRecord {
    pub fn new(scenario: &Scenario, command: &str, result: CommandResult, certification: BTreeMap<String, bool>) -> Self {
        RunRecord {
            scenario_digest: digest(scenario),
            command: command.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            timestamp: timestamp(),
            result,
            certification,
        }
    }

    pub fn certified(&self) -> Option<bool> {
        (!self.certification.is_empty()).then(|| self.certification.values().all(|&ok| ok))
    }

    fn csv_row(&self) -> String {
        let mut cells: BTreeMap<&str, String> = BTreeMap::new();
        cells.insert("scenario_digest", self.scenario_digest.clone());
        cells.insert("command", self.command.clone());
        for (k, v) in self.result.summary() {
            cells.insert(k, v.render());
        }
        if let Some(ok) = self.certified() {
            cells.insert("certified", ok.to_string());
        }
        CSV_COLUMNS.iter().map(|c| cells.remove(c).unwrap_or_default()).collect::<Vec<_>>().join(",")
    }
}

/// A summary cell of the results CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(usize),
    Bool(bool),
    Tag(String),
}

impl Cell {
    /// Reals carry 17 significant digits.
    pub fn render(&self) -> String {
        match self {
            Cell::Real(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Tag(t) => t.clone(),
        }
    }
}

/// Seconds since the epoch from `SOURCE_DATE_EPOCH`, else the clock.
pub fn timestamp() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .map(|secs| UNIX_EPOCH + Duration::from_secs(secs))
        .unwrap_or_else(SystemTime::now);
    humantime::format_rfc3339_seconds(now).to_string()
}

/// Compact JSON of the normalized scenario with object keys sorted.
pub fn canonical_json(s: &Scenario) -> String {
    // serde_json maps are ordered by key unless `preserve_order` is enabled
    serde_json::to_value(s).expect("scenario serializes").to_string()
}

/// SHA-256 of [`canonical_json`], hex encoded.
pub fn digest(s: &Scenario) -> String {
    let hash = Sha256::digest(canonical_json(s).as_bytes());
    hash.iter().fold(String::with_capacity(64), |mut out, b| {
        let _ = write!(out, "{b:02x}");
        out
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub digest: String,
    pub command: String,
    pub file: String,
    /// The same scenario was already recorded in this directory.
    pub duplicate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub format: String,
    pub entries: Vec<ManifestEntry>,
}

fn write(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|source| IoError::Write { path: path.to_path_buf(), source })
}

fn read_manifest(path: &Path) -> Result<Option<Manifest>, IoError> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).map_err(|source| IoError::Read { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map(Some).map_err(|e| IoError::Parse {
        origin: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn csv_header() -> String {
    CSV_COLUMNS.join(",")
}

/// Writes `runs/<digest>.<command>.<ext>` per record and appends to
/// `manifest.json`. A record whose digest and command are already present is
/// flagged as a duplicate.
pub fn write_results(records: &[RunRecord], dir: impl AsRef<Path>, format: Format) -> Result<PathBuf, IoError> {
    let dir = dir.as_ref();
    let runs = dir.join("runs");
    fs::create_dir_all(&runs).map_err(|source| IoError::Write { path: runs.clone(), source })?;
    let manifest_path = dir.join("manifest.json");
    let mut manifest = read_manifest(&manifest_path)?.unwrap_or_else(|| Manifest {
        tool_version: TOOL_VERSION.to_string(),
        format: format.extension().to_string(),
        entries: vec![],
    });
    let mut seen: BTreeSet<(String, String)> = manifest.entries.iter().map(|e| (e.digest.clone(), e.command.clone())).collect();

    for r in records {
        let file = format!("runs/{}.{}.{}", r.scenario_digest, r.command, format.extension());
        let body = match format {
            Format::Csv => format!("{}\n{}\n", csv_header(), r.csv_row()),
            Format::Json => serde_json::to_string_pretty(r).expect("record serializes") + "\n",
        };
        write(&dir.join(&file), &body)?;
        let duplicate = !seen.insert((r.scenario_digest.clone(), r.command.clone()));
        manifest.entries.push(ManifestEntry { digest: r.scenario_digest.clone(), command: r.command.clone(), file, duplicate });
    }
    write(&manifest_path, &(serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n"))?;
    Ok(manifest_path)
}

/// All records as one CSV table, one row per record.
pub fn csv_table(records: &[RunRecord]) -> String {
    let mut out = csv_header();
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn read_record(path: impl AsRef<Path>) -> Result<RunRecord, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IoError::Read { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| IoError::Parse {
        origin: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}
