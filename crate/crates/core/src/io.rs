//! Output files. Every CSV starts with `#` comment lines echoing the seed
//! and the resolved config; every JSON wraps its payload as
//! `{"seed", "config", "result"}`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::StudyConfig;
use crate::error::{Error, Result};

pub struct OutputDir {
    dir: PathBuf,
    config: StudyConfig,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

impl OutputDir {
    pub fn create(dir: impl AsRef<Path>, config: &StudyConfig) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        Ok(Self { dir, config: config.clone() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes a header row of unit-suffixed names followed by numeric rows.
    pub fn csv(&self, name: &str, headers: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf> {
        if let Some(r) = rows.iter().find(|r| r.len() != headers.len()) {
            return Err(Error::InvalidArgument(format!("{name}: row of {} values for {} columns", r.len(), headers.len())));
        }
        let path = self.path(name);
        let mut buf = Vec::new();
        writeln!(buf, "# seed = {}", self.config.seed).expect("write to Vec");
        for line in self.config.to_toml()?.lines() {
            writeln!(buf, "# {line}").expect("write to Vec");
        }
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(headers)?;
            for r in rows {
                w.write_record(r.iter().map(|v| format!("{v:.12e}")))?;
            }
            w.flush().map_err(|e| io_err(&path, e))?;
        }
        fs::write(&path, buf).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, result: &T) -> Result<PathBuf> {
        let path = self.path(name);
        let doc = serde_json::json!({
            "seed": self.config.seed,
            "config": self.config,
            "result": result,
        });
        let text = serde_json::to_string_pretty(&doc)?;
        fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
        Ok(path)
    }
}

/// Reads back a CSV written by [`OutputDir::csv`], skipping comment lines.
pub fn read_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let headers = r.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display()))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((headers, rows))
}
