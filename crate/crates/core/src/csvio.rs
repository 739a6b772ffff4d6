//! CSV plumbing shared by the loaders and report writers.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use csv::StringRecord;

use crate::error::{Error, Result};

pub(crate) fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .buffer_capacity(256 * 1024)
        .from_reader(source)
}

pub(crate) fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Every expected column must be present; extra columns are an error too.
pub(crate) fn require_header(found: &StringRecord, expected: &[&str]) -> Result<()> {
    for column in expected {
        if !found.iter().any(|h| h == *column) {
            return Err(Error::MissingColumn {
                column: (*column).to_string(),
                expected: expected.join(","),
            });
        }
    }
    if found.len() != expected.len() {
        return Err(Error::HeaderMismatch {
            expected: expected.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

pub(crate) fn line_of(record: &StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Files staged next to their destination and renamed into place together.
///
/// Dropping a batch without calling [`AtomicBatch::commit`] removes the staged files,
/// so a failed run leaves no partial output behind.
#[derive(Debug, Default)]
pub struct AtomicBatch {
    staged: Vec<(PathBuf, PathBuf)>,
}

impl AtomicBatch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stage(&mut self, dest: &Path, contents: &[u8]) -> Result<()> {
        self.stage_with(dest, |w| w.write_all(contents).map_err(|e| Error::io(dest, e)))
    }

    /// Streams a staged file through `write` instead of building it in memory.
    pub fn stage_with<T, F>(&mut self, dest: &Path, write: F) -> Result<T>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<T>,
    {
        if let Some(parent) = dest.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        let file_name = dest
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let tmp = dest.with_file_name(format!(".{file_name}.{}.tmp", std::process::id()));
        let f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        // Registered first so a failed write is still cleaned up on drop.
        self.staged.push((tmp.clone(), dest.to_path_buf()));
        let mut w = BufWriter::with_capacity(1 << 20, f);
        let out = write(&mut w)?;
        let f = w.into_inner().map_err(|e| Error::io(&tmp, e.into_error()))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
        Ok(out)
    }

    pub fn commit(mut self) -> Result<Vec<PathBuf>> {
        let staged = std::mem::take(&mut self.staged);
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, dest) in staged {
            fs::rename(&tmp, &dest).map_err(|e| Error::io(&dest, e))?;
            written.push(dest);
        }
        Ok(written)
    }
}

impl Drop for AtomicBatch {
    fn drop(&mut self) {
        for (tmp, _) in &self.staged {
            let _ = fs::remove_file(tmp);
        }
    }
}
