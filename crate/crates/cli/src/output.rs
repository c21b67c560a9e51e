//! CSV and JSON report files. Every CSV ends with a comment block holding
//! the tool version, the config hash and the effective config; JSON reports
//! carry the same fields.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value, json};

use crate::config::ExperimentConfig;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Writer<'a> {
    dir: PathBuf,
    config: &'a ExperimentConfig,
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

impl<'a> Writer<'a> {
    pub fn new(config: &'a ExperimentConfig) -> Result<Self, CliError> {
        fs::create_dir_all(&config.out).map_err(|e| io(&config.out, e))?;
        Ok(Writer { dir: config.out.clone(), config })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(|e| io(&path, e))?;
        for r in rows {
            w.write_record(r).map_err(|e| io(&path, e))?;
        }
        let mut bytes = w.into_inner().map_err(|e| io(&path, e))?;
        bytes.extend_from_slice(
            format!(
                "# signeq {VERSION}\n# config-sha256 {}\n# config {}\n",
                self.config.hash(),
                self.config.json()
            )
            .as_bytes(),
        );
        fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        Ok(path)
    }

    pub fn json(&self, name: &str, payload: Value) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let text = serde_json::to_string_pretty(&self.wrap(payload)).expect("json serializes") + "\n";
        fs::write(&path, text).map_err(|e| io(&path, e))?;
        Ok(path)
    }

    pub fn wrap(&self, payload: Value) -> Value {
        let mut map = Map::new();
        map.insert("version".into(), json!(VERSION));
        map.insert("config_hash".into(), json!(self.config.hash()));
        map.insert("config".into(), serde_json::to_value(self.config).expect("config serializes"));
        if let Value::Object(p) = payload {
            map.extend(p);
        } else {
            map.insert("result".into(), payload);
        }
        Value::Object(map)
    }
}

pub fn cell(x: impl ToString) -> String {
    x.to_string()
}
