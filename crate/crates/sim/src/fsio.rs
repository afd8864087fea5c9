//! Small filesystem helpers shared by the writers.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{SimError, SimResult};

pub fn read(path: &Path) -> SimResult<Vec<u8>> {
    fs::read(path).map_err(|e| SimError::io(path, e))
}

pub fn read_string(path: &Path) -> SimResult<String> {
    fs::read_to_string(path).map_err(|e| SimError::io(path, e))
}

pub fn create_dir_all(path: &Path) -> SimResult<()> {
    fs::create_dir_all(path).map_err(|e| SimError::io(path, e))
}

/// Write through a temporary file in the same directory and rename it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> SimResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| SimError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| SimError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| SimError::io(path, e))?;
    tmp.persist(path).map_err(|e| SimError::io(path, e.error))?;
    Ok(())
}
