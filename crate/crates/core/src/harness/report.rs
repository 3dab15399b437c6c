use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::wiener::GENERATOR_ID;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub status: Status,
    pub cases: usize,
    pub failures: usize,
    /// Largest residual seen; statistical suites report z-scores here.
    pub max_residual: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SuiteResult {
    pub fn errored(name: &str, tolerance: f64, err: &Error) -> Self {
        Self {
            name: name.into(),
            status: Status::Error,
            cases: 0,
            failures: 0,
            max_residual: f64::NAN,
            tolerance,
            error: Some(err.to_string()),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Build and platform facts that do not change between runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub tool: &'static str,
    pub version: &'static str,
    pub arch: &'static str,
    pub os: &'static str,
    pub generator: &'static str,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            arch: std::env::consts::ARCH,
            os: std::env::consts::OS,
            generator: GENERATOR_ID,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub environment: Environment,
    pub config: RunConfig,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

impl RunReport {
    pub fn new(command: &str, config: &RunConfig, suites: Vec<SuiteResult>) -> Self {
        let passed = suites.iter().all(SuiteResult::passed);
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            environment: Environment::current(),
            config: config.clone(),
            suites,
            passed,
        }
    }

    pub fn to_json(&self) -> String {
        // NaN is not valid JSON; serde_json writes it as null
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Writes to a temporary file next to `path` and renames it into place, so a
/// failed run never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidArgument(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("r.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn report_json_has_schema_and_no_clock() {
        let r = RunReport::new("verify", &RunConfig::default(), vec![]);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["passed"], true);
        assert!(!r.to_json().contains("time"));
    }
}
