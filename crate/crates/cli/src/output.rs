use std::fmt::Display;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Output directory. Every file is written whole, from one thread.
pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.to_path_buf(), source: e })?;
        Ok(OutDir { dir: dir.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
        Ok(path)
    }

    pub fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| paramlearn::Error::Internal(format!("cannot encode {name}: {e}")))?;
        text.push('\n');
        self.write(name, &text)
    }
}

/// CSV text with a fixed header. Float cells must be finite.
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Csv { text: format!("{header}\n"), columns: header.split(',').count() }
    }

    pub fn row(&mut self, cells: &[&dyn Display]) {
        debug_assert_eq!(cells.len(), self.columns);
        let line: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> CliResult<String> {
        let bad = self
            .text
            .lines()
            .skip(1)
            .flat_map(|l| l.split(','))
            .any(|c| matches!(c, "NaN" | "inf" | "-inf"));
        if bad {
            return Err(paramlearn::Error::Internal("non-finite value in CSV output".into()).into());
        }
        Ok(self.text)
    }
}
