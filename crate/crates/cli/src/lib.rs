pub mod api;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use discharge_core::fragments::PlaneFragment;
use discharge_core::prover::{export_proof, BundleReport, Session};

pub fn read_fragment(path: &Path) -> Result<(String, PlaneFragment)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let frag = PlaneFragment::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "fragment".into());
    Ok((name, frag))
}

/// Every `.frag` file of a directory, by file name.
pub fn load_library(dir: &Path) -> Result<Vec<(String, PlaneFragment)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|x| x == "frag"));
    paths.sort();
    paths.iter().map(|p| read_fragment(p)).collect()
}

pub fn bundle_dir(session_dir: &Path) -> PathBuf {
    session_dir.join("bundle")
}

/// Rewrites `<session>/bundle` when the last round succeeded.
pub fn export_if_proven(session: &Session, session_dir: &Path) -> Result<Option<BundleReport>> {
    if !session.last().is_some_and(|r| r.success) {
        return Ok(None);
    }
    let out = bundle_dir(session_dir);
    if out.exists() {
        fs::remove_dir_all(&out)?;
    }
    Ok(Some(export_proof(session, &out)?))
}
