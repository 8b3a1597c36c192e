//! Report assembly: CSV tables, checkpoints and a hashed JSON manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nlslab_core::checkpoint;
use nlslab_core::ComplexField;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::fit::RateFit;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        Ok(w.into_inner()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, bound: format!("<= {limit:e}"), pass: value <= limit }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, bound: format!(">= {limit:e}"), pass: value >= limit }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), value, bound: format!("in [{lo}, {hi}]"), pass: value >= lo && value <= hi }
    }

    pub fn holds(name: &str, pass: bool) -> Self {
        Self { name: name.into(), value: if pass { 1.0 } else { 0.0 }, bound: "true".into(), pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: RateFit,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub name: String,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub fits: Vec<NamedFit>,
    pub checkpoints: Vec<(String, ComplexField)>,
}

impl ExperimentReport {
    pub fn new(name: &str) -> Self {
        Self { name: name.into(), ..Self::default() }
    }

    /// True iff every check passes.
    pub fn verdict(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn fit(&self, name: &str) -> Option<&RateFit> {
        self.fits.iter().find(|f| f.name == name).map(|f| &f.fit)
    }

    pub fn add_fit(&mut self, name: &str, fit: Option<RateFit>) -> Option<f64> {
        let fit = fit?;
        let slope = fit.slope;
        self.fits.push(NamedFit { name: name.into(), fit });
        Some(slope)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentEntry {
    pub name: String,
    pub verdict: bool,
    pub checks: Vec<Check>,
    pub fits: Vec<serde_json::Value>,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub run_id: String,
    pub config_hash: String,
    pub input_hash: String,
    pub verdict: bool,
    pub experiments: Vec<ExperimentEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 over `blob <len>\0<bytes>`, the git object layout.
pub fn blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes CSVs, checkpoints and `manifest.json` under
/// `<config.output>/<run-id>/` and returns the manifest path.
pub fn write_run(config: &ExperimentConfig, config_text: &str, reports: &[ExperimentReport]) -> Result<PathBuf> {
    let canonical = config.to_toml();
    let config_hash = sha256_hex(canonical.as_bytes());
    let run_id = format!("{}-{}", config.name, &config_hash[..12]);
    let dir = config.output.join(&run_id);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut experiments = Vec::new();
    for rep in reports {
        let mut files = Vec::new();
        for table in &rep.tables {
            let name = format!("{}__{}.csv", rep.name, table.name);
            let bytes = table.to_csv()?;
            fs::write(dir.join(&name), &bytes)?;
            files.push(FileEntry { path: name, sha256: sha256_hex(&bytes) });
        }
        for (label, field) in &rep.checkpoints {
            let name = format!("{}__{label}.nlsf", rep.name);
            let bytes = checkpoint::encode_field(field);
            fs::write(dir.join(&name), &bytes)?;
            files.push(FileEntry { path: name, sha256: sha256_hex(&bytes) });
        }
        experiments.push(ExperimentEntry {
            name: rep.name.clone(),
            verdict: rep.verdict(),
            checks: rep.checks.clone(),
            fits: rep.fits.iter().map(|f| serde_json::to_value(f).expect("fit serializes")).collect(),
            files,
        });
    }
    let manifest = Manifest {
        run_id,
        config_hash,
        input_hash: blob_hash(config_text.as_bytes()),
        verdict: experiments.iter().all(|e| e.verdict),
        experiments,
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub manifest: Manifest,
    pub mismatched: Vec<String>,
}

impl VerifyOutcome {
    pub fn ok(&self) -> bool {
        self.mismatched.is_empty()
    }
}

/// Re-hashes every file listed in a manifest and re-derives the verdicts.
pub fn verify(manifest_path: &Path) -> Result<VerifyOutcome> {
    let text = fs::read_to_string(manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let mut mismatched = Vec::new();
    for exp in &manifest.experiments {
        if exp.verdict != exp.checks.iter().all(|c| c.pass) {
            mismatched.push(format!("{}: verdict", exp.name));
        }
        for f in &exp.files {
            match fs::read(dir.join(&f.path)) {
                Ok(bytes) if sha256_hex(&bytes) == f.sha256 => {}
                Ok(_) => mismatched.push(f.path.clone()),
                Err(_) => mismatched.push(format!("{} (missing)", f.path)),
            }
        }
    }
    if manifest.verdict != manifest.experiments.iter().all(|e| e.verdict) {
        mismatched.push("manifest verdict".into());
    }
    if manifest.experiments.is_empty() {
        bail!("manifest lists no experiments");
    }
    Ok(VerifyOutcome { manifest, mismatched })
}
