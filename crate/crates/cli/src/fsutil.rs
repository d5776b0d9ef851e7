//! Staged writes: outputs are produced under a temporary name next to their
//! destination and renamed into place only once complete.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

fn staging_name(dest: &Path, tag: &str) -> PathBuf {
    let name = dest
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    dest.with_file_name(format!(".{name}.{tag}-{}", std::process::id()))
}

/// Writes a file through `write` at a temporary path, then renames it over
/// `dest`.
pub fn atomic_file(dest: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    if let Some(parent) = dest.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let tmp = staging_name(dest, "partial");
    let outcome = write(&tmp).and_then(|_| {
        fs::rename(&tmp, dest).with_context(|| format!("renaming into {}", dest.display()))
    });
    if outcome.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    outcome
}

pub fn atomic_bytes(dest: &Path, bytes: &[u8]) -> Result<()> {
    atomic_file(dest, |tmp| fs::write(tmp, bytes).with_context(|| format!("writing {}", tmp.display())))
}

/// A directory filled under a temporary name and swapped in by
/// [`StagedDir::commit`]. Dropping it uncommitted removes the staging tree.
pub struct StagedDir {
    dest: PathBuf,
    staging: PathBuf,
    committed: bool,
}

impl StagedDir {
    pub fn new(dest: &Path) -> Result<Self> {
        let staging = staging_name(dest, "staging");
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir_all(&staging).with_context(|| format!("creating {}", staging.display()))?;
        Ok(Self {
            dest: dest.to_path_buf(),
            staging,
            committed: false,
        })
    }

    pub fn path(&self) -> &Path {
        &self.staging
    }

    /// Replaces `dest` (if present) with the staged tree.
    pub fn commit(mut self) -> Result<()> {
        if self.dest.exists() {
            let old = staging_name(&self.dest, "old");
            fs::rename(&self.dest, &old)?;
            fs::rename(&self.staging, &self.dest)?;
            fs::remove_dir_all(&old)?;
        } else {
            if let Some(parent) = self.dest.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::rename(&self.staging, &self.dest)?;
        }
        self.committed = true;
        Ok(())
    }
}

impl Drop for StagedDir {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}

/// `path` relative to `base` when it lies underneath it, otherwise unchanged.
pub fn relative_to(path: &Path, base: &Path) -> PathBuf {
    let abs = |p: &Path| fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    let (p, b) = (abs(path), abs(base));
    p.strip_prefix(&b).map(Path::to_path_buf).unwrap_or(p)
}

/// Sorted `*.png` files directly inside `dir`, keyed by file stem.
pub fn png_files(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if png && path.is_file() {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), path));
            }
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staged_dir_replaces_destination() {
        let root = tempfile::tempdir().unwrap();
        let dest = root.path().join("out");
        fs::create_dir_all(&dest).unwrap();
        fs::write(dest.join("stale.txt"), "old").unwrap();
        let staged = StagedDir::new(&dest).unwrap();
        fs::write(staged.path().join("fresh.txt"), "new").unwrap();
        staged.commit().unwrap();
        assert!(!dest.join("stale.txt").exists());
        assert_eq!(fs::read_to_string(dest.join("fresh.txt")).unwrap(), "new");
        assert_eq!(fs::read_dir(root.path()).unwrap().count(), 1);
    }

    #[test]
    fn dropped_stage_leaves_nothing() {
        let root = tempfile::tempdir().unwrap();
        let dest = root.path().join("out");
        {
            let staged = StagedDir::new(&dest).unwrap();
            fs::write(staged.path().join("x"), "x").unwrap();
        }
        assert_eq!(fs::read_dir(root.path()).unwrap().count(), 0);
    }

    #[test]
    fn failed_atomic_write_keeps_old_file() {
        let root = tempfile::tempdir().unwrap();
        let dest = root.path().join("f.txt");
        fs::write(&dest, "keep").unwrap();
        let r = atomic_file(&dest, |tmp| {
            fs::write(tmp, "half")?;
            anyhow::bail!("boom")
        });
        assert!(r.is_err());
        assert_eq!(fs::read_to_string(&dest).unwrap(), "keep");
        assert_eq!(fs::read_dir(root.path()).unwrap().count(), 1);
    }
}
