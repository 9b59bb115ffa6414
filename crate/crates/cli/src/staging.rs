//! All-or-nothing output directories.
//!
//! Files are written into a hidden temporary directory next to the target
//! and only moved into place once every file has been written. A run that
//! fails before [`Staging::commit`] leaves the target untouched.

use std::fs;
use std::path::{Path, PathBuf};

use tempfile::TempDir;

use crate::error::CliError;

pub struct Staging {
    target: PathBuf,
    dir: TempDir,
}

impl Staging {
    pub fn new(target: &Path) -> Result<Self, CliError> {
        if target.exists() && !target.is_dir() {
            return Err(CliError::Io(format!(
                "output path {} exists and is not a directory",
                target.display()
            )));
        }
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", parent.display())))?;
        let dir = tempfile::Builder::new()
            .prefix(".crowdfuse-stage-")
            .tempdir_in(&parent)
            .map_err(|e| CliError::Io(format!("cannot stage output in {}: {e}", parent.display())))?;
        Ok(Self {
            target: target.to_path_buf(),
            dir,
        })
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    /// Moves the staged files into the target directory, replacing files of
    /// the same name. Returns the final paths in name order.
    pub fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        let mut names: Vec<_> = fs::read_dir(self.dir.path())?
            .map(|e| e.map(|e| e.file_name()))
            .collect::<Result<_, _>>()?;
        names.sort();
        let io = |what: &str, p: &Path, e: std::io::Error| {
            CliError::Io(format!("cannot {what} {}: {e}", p.display()))
        };
        if !self.target.exists() {
            let staged = self.dir.keep();
            fs::rename(&staged, &self.target).map_err(|e| io("create", &self.target, e))?;
        } else {
            for name in &names {
                let to = self.target.join(name);
                fs::rename(self.dir.path().join(name), &to).map_err(|e| io("write", &to, e))?;
            }
        }
        Ok(names.iter().map(|n| self.target.join(n)).collect())
    }
}
