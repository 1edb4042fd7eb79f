use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

/// Everything a command produced. Timings live beside the report, not in it,
/// so reports from identical runs compare equal once the timestamp is removed.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub timestamp: u64,
    pub seed: u64,
    pub config: RunConfig,
    pub manifold: Option<Value>,
    pub covering: Option<Value>,
    pub sections: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub passed: bool,
    #[serde(skip)]
    pub timings: Vec<(String, Duration)>,
}

impl RunReport {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        RunReport {
            command: command.to_string(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            seed: config.seed,
            config: config.clone(),
            manifold: None,
            covering: None,
            sections: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            passed: true,
            timings: Vec::new(),
        }
    }

    /// Records `value ≤ threshold`.
    pub fn check_le(&mut self, name: impl Into<String>, value: f64, threshold: f64) {
        self.push(name.into(), value <= threshold, value, threshold);
    }

    /// Records an inequality outcome with its relative margin.
    pub fn push_margin(&mut self, name: impl Into<String>, passed: bool, margin: f64) {
        self.push(name.into(), passed, margin, 0.0);
    }

    pub fn check_true(&mut self, name: impl Into<String>, ok: bool) {
        self.push(name.into(), ok, if ok { 1.0 } else { 0.0 }, 1.0);
    }

    fn push(&mut self, name: String, passed: bool, value: f64, threshold: f64) {
        if !passed {
            log::warn!("check {name} failed: {value:e} vs {threshold:e}");
        }
        self.passed &= passed;
        self.checks.push(Check { name, passed, value, threshold });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        let text = text.into();
        log::info!("{text}");
        self.notes.push(text);
    }

    pub fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = std::time::Instant::now();
        let out = f();
        self.timings.push((label.to_string(), start.elapsed()));
        out
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    /// Writes `<command>_report.json` and `<command>_timings.json`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}_report.json", self.command));
        write_atomic(&path, serde_json::to_string_pretty(self)?.as_bytes())?;
        let timings: BTreeMap<&str, f64> = self.timings.iter().map(|(k, d)| (k.as_str(), d.as_secs_f64())).collect();
        write_atomic(&dir.join(format!("{}_timings.json", self.command)), serde_json::to_string_pretty(&timings)?.as_bytes())?;
        Ok(path)
    }

    pub fn summary(&self) -> String {
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        format!("{}: {} checks, {} failed", self.command, self.checks.len(), failed)
    }
}

/// Temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// A report with its timestamp removed, for comparing runs.
pub fn without_timestamp(report: &str) -> Result<Value> {
    let mut v: Value = serde_json::from_str(report)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("timestamp");
    }
    Ok(v)
}
