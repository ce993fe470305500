use crate::CliError;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Where reports go: files in a directory, or stdout.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Sink { dir }
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    /// Write `name` under the output directory via a temporary file and rename.
    pub fn write_file(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let dir = self.dir.as_deref().ok_or_else(|| CliError::Run("no output directory".into()))?;
        write_atomic(&dir.join(name), bytes).map_err(|e| CliError::Run(format!("writing {}: {e}", dir.join(name).display())))
    }

    /// Pretty JSON to `name` in the output directory, or to stdout.
    pub fn emit_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Run(e.to_string()))?;
        text.push('\n');
        if self.has_dir() {
            self.write_file(name, text.as_bytes())
        } else {
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Run(e.to_string()))
        }
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
