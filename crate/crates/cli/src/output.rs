//! Output files are assembled in memory and written only once a command
//! has finished, so a failed run leaves no partial results behind.

use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::CliError;

pub const VERSION: &str = concat!("cphase ", env!("CARGO_PKG_VERSION"));

/// Shortest representation that parses back to the same f64.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Default)]
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<String>, body: impl Into<Vec<u8>>) {
        self.files.push((name.into(), body.into()));
    }

    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, body) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|source| CliError::Io { path: path.clone(), source })?;
            written.push(path);
        }
        Ok(written)
    }
}

/// CSV text with a `#` comment block holding the code version, the
/// command and the fully resolved config.
pub fn csv_document(cfg: &RunConfig, command: &str, header: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut out = format!("# {VERSION}\n# command: {command}\n# config:\n");
    let resolved = serde_json::to_string_pretty(cfg).expect("config serializes");
    for line in resolved.lines() {
        out.push_str("#   ");
        out.push_str(line);
        out.push('\n');
    }
    let mut w = csv::Writer::from_writer(out.into_bytes());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}
