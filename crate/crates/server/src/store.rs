use std::path::{Path, PathBuf};

use onboard_core::orchestrator::Assistant;

use crate::StartupError;

/// On-disk copies of loaded dashboards and session logs.
#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

impl Store {
    pub fn new(root: PathBuf) -> Self {
        Self { root }
    }

    fn dashboards(&self) -> PathBuf {
        self.root.join("dashboards")
    }

    fn sessions(&self) -> PathBuf {
        self.root.join("sessions")
    }

    pub fn save_dashboard(&self, id: &str, document: &str) -> std::io::Result<()> {
        write(&self.dashboards().join(format!("{}.json", file_stem(id))), document)
    }

    pub fn save_session(&self, id: &str, log: &str) -> std::io::Result<()> {
        write(&self.sessions().join(format!("{}.ndjson", file_stem(id))), log)
    }

    pub fn restore_dashboards(&self, assistant: &Assistant) -> Result<(), StartupError> {
        for path in files(&self.dashboards(), "json")? {
            let text = read(&path)?;
            assistant.load_dashboard(&text).map_err(|e| restore_err(&path, e))?;
        }
        Ok(())
    }

    /// Call after every dashboard is loaded; sessions refer to them.
    pub fn restore_sessions(&self, assistant: &Assistant) -> Result<(), StartupError> {
        for path in files(&self.sessions(), "ndjson")? {
            let text = read(&path)?;
            if text.trim().is_empty() {
                continue;
            }
            assistant.import_log(&text).map_err(|e| restore_err(&path, e))?;
        }
        Ok(())
    }
}

fn restore_err(path: &Path, e: impl std::fmt::Display) -> StartupError {
    StartupError::Restore {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn read(path: &Path) -> Result<String, StartupError> {
    std::fs::read_to_string(path).map_err(|e| restore_err(path, e))
}

fn files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, StartupError> {
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(restore_err(dir, e)),
    };
    let mut out: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .collect();
    out.sort();
    Ok(out)
}

// write to a sibling then rename so a crash never leaves half a file
fn write(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_become_safe_file_names() {
        assert_eq!(file_stem("sales-pipeline"), "sales-pipeline");
        assert_eq!(file_stem("../etc/passwd"), "___etc_passwd");
    }
}
