//! Output-directory handling: creation, the single-writer lock file, and
//! the TIDE_OUT_DIR environment override.

use std::path::{Path, PathBuf};

use crate::CliError;

/// Resolves the output directory (flag value unless TIDE_OUT_DIR is set),
/// creates it, and takes the lock.
pub fn prepare(flag_value: &Path) -> Result<RunDir, CliError> {
    let dir = match std::env::var_os("TIDE_OUT_DIR") {
        Some(v) => PathBuf::from(v),
        None => flag_value.to_path_buf(),
    };
    std::fs::create_dir_all(&dir)?;
    let lock_path = dir.join(".lock");
    match std::fs::OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(&lock_path)
    {
        Ok(_) => {}
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
            return Err(CliError::io(format!(
                "output directory is locked by another run ({}); remove the stale .lock if no process is using it",
                lock_path.display()
            )));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(RunDir {
        path: dir,
        lock_path,
    })
}

/// Owns the lock file; removes it when the run finishes (or unwinds).
pub struct RunDir {
    path: PathBuf,
    lock_path: PathBuf,
}

impl RunDir {
    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn join(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.lock_path);
    }
}
