//! Dataset manifests. A dataset root holds `raw/` plus optional
//! `reference/` and `depth/` subdirectories; files pair by stem, so
//! `raw/a.png` matches `reference/a.jpg`. Ingestion is lenient and
//! itemizes problems; loading a written manifest enforces its invariants
//! (version, unique ids, existing paths, equal pair dimensions) strictly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::io::is_image_file;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    /// Paths are stored relative to the dataset root.
    pub degraded: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub root: PathBuf,
    #[serde(default)]
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug)]
pub struct IngestReport {
    pub manifest: DatasetManifest,
    /// Per-file problems: unreadable headers, dimension mismatches,
    /// duplicate stems. The affected pairing is dropped or downgraded.
    pub issues: Vec<String>,
    /// Benign observations: unmatched reference/depth files, empty root.
    pub warnings: Vec<String>,
}

impl DatasetManifest {
    pub fn resolve(&self, rel: &Path) -> PathBuf {
        self.root.join(rel)
    }

    pub fn labeled(&self) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(|e| e.reference.is_some())
    }

    pub fn unlabeled(&self) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(|e| e.reference.is_none())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).context("serializing manifest")?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    /// Strict load: rejects unknown versions, duplicate ids, dangling
    /// paths, and labeled pairs whose files decode to different sizes.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let mut manifest: DatasetManifest =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if manifest.version != MANIFEST_VERSION {
            bail!(
                "{}: unsupported manifest version {} (expected {MANIFEST_VERSION})",
                path.display(),
                manifest.version
            );
        }
        // a relative root is relative to the manifest file itself
        if manifest.root.is_relative() {
            if let Some(dir) = path.parent() {
                manifest.root = dir.join(&manifest.root);
            }
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(e.id.clone()) {
                bail!("duplicate image id {:?}", e.id);
            }
            let degraded = self.resolve(&e.degraded);
            let base = dims_of(&degraded)
                .with_context(|| format!("entry {:?}: degraded image", e.id))?;
            for (role, rel) in [("reference", &e.reference), ("depth", &e.depth)] {
                if let Some(rel) = rel {
                    let side = dims_of(&self.resolve(rel))
                        .with_context(|| format!("entry {:?}: {role} image", e.id))?;
                    if side != base {
                        bail!(
                            "entry {:?}: {role} is {}x{} but degraded is {}x{}",
                            e.id,
                            side.1,
                            side.0,
                            base.1,
                            base.0
                        );
                    }
                }
            }
        }
        Ok(())
    }
}

fn dims_of(path: &Path) -> Result<(u32, u32)> {
    let (w, h) = image::image_dimensions(path)
        .with_context(|| format!("reading header of {}", path.display()))?;
    Ok((h, w))
}

/// Stem -> path map of the image files directly inside `dir`; duplicate
/// stems (e.g. `a.png` and `a.jpg` side by side) keep the
/// lexicographically first file and report the rest.
pub(crate) fn scan(dir: &Path, issues: &mut Vec<String>) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    if !dir.is_dir() {
        return Ok(out);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_image_file(p))
        .collect();
    files.sort();
    for path in files {
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if out.contains_key(stem) {
            issues.push(format!(
                "{}: duplicate stem {stem:?}, keeping the first file",
                path.display()
            ));
        } else {
            out.insert(stem.to_string(), path);
        }
    }
    Ok(out)
}

fn rel_to(root: &Path, path: &Path) -> PathBuf {
    path.strip_prefix(root).unwrap_or(path).to_path_buf()
}

/// Builds a manifest from a dataset root. Pairing problems downgrade the
/// affected entry (a bad reference leaves the raw image unlabeled) so one
/// broken file never blocks the rest of the dataset.
pub fn ingest(root: &Path) -> Result<IngestReport> {
    if !root.is_dir() {
        bail!("dataset root {} is not a directory", root.display());
    }
    let mut issues = Vec::new();
    let mut warnings = Vec::new();
    let raw = scan(&root.join("raw"), &mut issues)?;
    let mut references = scan(&root.join("reference"), &mut issues)?;
    let mut depths = scan(&root.join("depth"), &mut issues)?;

    if raw.is_empty() {
        warnings.push(format!("no raw images found under {}", root.display()));
    }

    let mut entries = Vec::new();
    for (stem, degraded) in &raw {
        let base = match dims_of(degraded) {
            Ok(d) => Some(d),
            Err(e) => {
                // still enhanceable in principle; downstream commands
                // will record the per-image failure
                issues.push(format!("{e:#}"));
                None
            }
        };
        let mut take = |map: &mut BTreeMap<String, PathBuf>, role: &str| -> Option<PathBuf> {
            let path = map.remove(stem)?;
            match (base, dims_of(&path)) {
                (Some(b), Ok(d)) if d != b => {
                    issues.push(format!(
                        "{}: {role} is {}x{} but raw is {}x{}; dropping the pairing",
                        path.display(),
                        d.1,
                        d.0,
                        b.1,
                        b.0
                    ));
                    None
                }
                (_, Err(e)) => {
                    issues.push(format!("{e:#}"));
                    None
                }
                _ => Some(path),
            }
        };
        let reference = take(&mut references, "reference");
        let depth = take(&mut depths, "depth");
        entries.push(ManifestEntry {
            id: stem.clone(),
            degraded: rel_to(root, degraded),
            reference: reference.map(|p| rel_to(root, &p)),
            depth: depth.map(|p| rel_to(root, &p)),
        });
    }
    for (_, leftover) in references {
        warnings.push(format!("{}: no raw counterpart", leftover.display()));
    }
    for (_, leftover) in depths {
        warnings.push(format!("{}: no raw counterpart", leftover.display()));
    }

    Ok(IngestReport {
        manifest: DatasetManifest {
            version: MANIFEST_VERSION,
            root: root.to_path_buf(),
            entries,
        },
        issues,
        warnings,
    })
}

/// Commands accept either a dataset root directory or a written manifest
/// file.
pub fn load_or_ingest(path: &Path) -> Result<DatasetManifest> {
    if path.is_file() {
        DatasetManifest::load(path)
    } else {
        Ok(ingest(path)?.manifest)
    }
}
