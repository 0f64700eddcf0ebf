//! Provenance headers and JSON artifact envelopes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};

/// Which command wrote an artifact, with what settings and when.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub config: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(command: &str, cfg: &PipelineConfig, timestamps: bool) -> Self {
        Provenance {
            command: command.to_string(),
            generated_at: timestamps.then(|| chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string()),
            config: cfg.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    /// `# ` prefixed lines for the top of a CSV file.
    pub fn csv_comment(&self) -> String {
        let mut s = format!("# bargetow {}\n", self.command);
        if let Some(t) = &self.generated_at {
            s.push_str(&format!("# generated_at = {t}\n"));
        }
        for (k, v) in &self.config {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s
    }
}

/// A JSON artifact: provenance next to the payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub provenance: Provenance,
    pub payload: T,
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, provenance: &Provenance, payload: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &Envelope { provenance: provenance.clone(), payload })
        .map_err(|e| Error::format(path, None, e.to_string()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Envelope<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, Some(e.line() as u64), e.to_string()))
}
