//! Model lookup for `` `Name `` references: the `.mcdp` files of one directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Default)]
pub struct Library {
    dir: Option<PathBuf>,
    sources: BTreeMap<String, String>,
}

impl Library {
    pub fn new() -> Library {
        Library::default()
    }

    /// Loads every `*.mcdp` file directly inside `dir`, keyed by file stem.
    pub fn from_dir(dir: &Path) -> std::io::Result<Library> {
        let mut sources = BTreeMap::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "mcdp") && path.is_file() {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    sources.insert(stem.to_string(), std::fs::read_to_string(&path)?);
                }
            }
        }
        Ok(Library { dir: Some(dir.to_path_buf()), sources })
    }

    pub fn with_source(mut self, name: &str, source: &str) -> Library {
        self.sources.insert(name.into(), source.into());
        self
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.sources.get(name).map(String::as_str)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.sources.keys().map(String::as_str)
    }

    /// File name used in diagnostics for model `name`.
    pub fn file_name(&self, name: &str) -> String {
        match &self.dir {
            Some(d) => d.join(format!("{name}.mcdp")).display().to_string(),
            None => format!("{name}.mcdp"),
        }
    }
}
