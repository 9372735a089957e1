//! `ingest-check`: dry-run dataset validation. Prints what pairing found,
//! itemizes problems, and optionally writes the manifest.

use std::path::PathBuf;

use anyhow::Result;

use crate::manifest::ingest;

pub struct IngestArgs {
    pub root: PathBuf,
    pub write: Option<PathBuf>,
}

/// Returns the number of itemized issues.
pub fn run_ingest_check(args: &IngestArgs) -> Result<usize> {
    let report = ingest(&args.root)?;
    let labeled = report.manifest.labeled().count();
    let unlabeled = report.manifest.unlabeled().count();
    let with_depth = report
        .manifest
        .entries
        .iter()
        .filter(|e| e.depth.is_some())
        .count();
    println!(
        "{}: {labeled} labeled + {unlabeled} unlabeled entries ({with_depth} with depth)",
        report.manifest.root.display()
    );
    for w in &report.warnings {
        println!("warning: {w}");
    }
    for issue in &report.issues {
        println!("issue: {issue}");
    }
    if let Some(path) = &args.write {
        report.manifest.save(path)?;
        println!("manifest written to {}", path.display());
    }
    Ok(report.issues.len())
}
