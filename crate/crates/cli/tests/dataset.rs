//! Ingestion and manifest behavior: stem pairing, lenient ingest with
//! itemized problems, strict manifest loading.

mod common;

use std::fs;

use common::{put, rand_image};
use tempfile::tempdir;
use uie_cli::{ingest, load_or_ingest, DatasetManifest};

#[test]
fn pairing_matches_stems_across_extensions() {
    let dir = tempdir().unwrap();
    let root = dir.path();
    for stem in ["a", "b", "c"] {
        put(&root.join("raw").join(format!("{stem}.png")), &rand_image(1, 8, 8));
    }
    put(&root.join("reference/a.jpg"), &rand_image(2, 8, 8));
    put(&root.join("reference/b.png"), &rand_image(3, 8, 8));
    put(&root.join("depth/a.png"), &rand_image(4, 8, 8));

    let report = ingest(root).unwrap();
    assert!(report.issues.is_empty(), "issues: {:?}", report.issues);
    assert!(report.warnings.is_empty(), "warnings: {:?}", report.warnings);

    let m = &report.manifest;
    let ids: Vec<&str> = m.entries.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(ids, ["a", "b", "c"]);
    assert_eq!(m.labeled().count(), 2);
    assert_eq!(m.unlabeled().count(), 1);

    let a = &m.entries[0];
    assert_eq!(a.reference.as_deref().unwrap().to_str().unwrap(), "reference/a.jpg");
    assert!(a.depth.is_some());
    assert!(m.resolve(&a.degraded).is_file());
    assert!(m.resolve(a.reference.as_ref().unwrap()).is_file());

    let c = &m.entries[2];
    assert!(c.reference.is_none() && c.depth.is_none());
}

#[test]
fn missing_raw_images_warn_but_do_not_fail() {
    let dir = tempdir().unwrap();
    let root = dir.path();
    put(&root.join("reference/x.png"), &rand_image(5, 8, 8));

    let report = ingest(root).unwrap();
    assert!(report.manifest.entries.is_empty());
    assert!(report.warnings.iter().any(|w| w.contains("no raw images")));
    assert!(report.warnings.iter().any(|w| w.contains("no raw counterpart")));
    assert!(report.issues.is_empty());

    assert!(ingest(&root.join("does-not-exist")).is_err());
}

#[test]
fn problems_downgrade_entries_without_blocking_the_rest() {
    let dir = tempdir().unwrap();
    let root = dir.path();
    // reference with the wrong size: pairing dropped, raw kept unlabeled
    put(&root.join("raw/a.png"), &rand_image(6, 8, 8));
    put(&root.join("reference/a.png"), &rand_image(7, 4, 4));
    // undecodable raw file: entry kept, downstream records the failure
    fs::create_dir_all(root.join("raw")).unwrap();
    fs::write(root.join("raw/bad.png"), b"this is not a png").unwrap();
    // duplicate stem: lexicographically first file wins
    put(&root.join("raw/dup.jpg"), &rand_image(8, 8, 8));
    put(&root.join("raw/dup.png"), &rand_image(9, 8, 8));

    let report = ingest(root).unwrap();
    let ids: Vec<&str> = report.manifest.entries.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(ids, ["a", "bad", "dup"]);

    let a = &report.manifest.entries[0];
    assert!(a.reference.is_none(), "mismatched reference must be dropped");
    assert!(report.issues.iter().any(|i| i.contains("dropping the pairing")));
    assert!(report.issues.iter().any(|i| i.contains("bad.png")));
    assert!(report.issues.iter().any(|i| i.contains("duplicate stem")));
    assert_eq!(report.issues.len(), 3);

    let dup = &report.manifest.entries[2];
    assert_eq!(dup.degraded.to_str().unwrap(), "raw/dup.jpg");
}

#[test]
fn manifest_round_trips_and_loads_strictly() {
    let dir = tempdir().unwrap();
    let root = dir.path();
    put(&root.join("raw/a.png"), &rand_image(10, 8, 8));
    put(&root.join("raw/b.png"), &rand_image(11, 8, 8));
    put(&root.join("reference/a.png"), &rand_image(12, 8, 8));

    let manifest = ingest(root).unwrap().manifest;
    let path = root.join("manifest.toml");
    manifest.save(&path).unwrap();

    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("version = 1"), "got:\n{text}");

    let loaded = DatasetManifest::load(&path).unwrap();
    assert_eq!(loaded.version, 1);
    assert_eq!(loaded.entries.len(), 2);
    assert_eq!(loaded.entries[0].id, manifest.entries[0].id);
    assert_eq!(loaded.entries[0].reference, manifest.entries[0].reference);

    // load_or_ingest takes both spellings
    assert_eq!(load_or_ingest(&path).unwrap().entries.len(), 2);
    assert_eq!(load_or_ingest(root).unwrap().entries.len(), 2);

    // a relative root resolves against the manifest's own directory
    let rel = "version = 1\nroot = \".\"\n\n[[entries]]\nid = \"a\"\ndegraded = \"raw/a.png\"\n";
    fs::write(root.join("rel.toml"), rel).unwrap();
    let m = DatasetManifest::load(&root.join("rel.toml")).unwrap();
    assert!(m.resolve(&m.entries[0].degraded).is_file());
}

#[test]
fn strict_load_rejects_broken_manifests() {
    let dir = tempdir().unwrap();
    let root = dir.path();
    put(&root.join("raw/a.png"), &rand_image(13, 8, 8));
    put(&root.join("small.png"), &rand_image(14, 4, 4));

    let write = |name: &str, body: &str| {
        let p = root.join(name);
        fs::write(&p, body).unwrap();
        p
    };

    let bad_version = write("v2.toml", "version = 2\nroot = \".\"\n");
    let err = DatasetManifest::load(&bad_version).unwrap_err();
    assert!(format!("{err:#}").contains("version"), "{err:#}");

    let dup = write(
        "dup.toml",
        concat!(
            "version = 1\nroot = \".\"\n\n",
            "[[entries]]\nid = \"a\"\ndegraded = \"raw/a.png\"\n\n",
            "[[entries]]\nid = \"a\"\ndegraded = \"raw/a.png\"\n"
        ),
    );
    let err = DatasetManifest::load(&dup).unwrap_err();
    assert!(format!("{err:#}").contains("duplicate"), "{err:#}");

    let dangling = write(
        "gone.toml",
        "version = 1\nroot = \".\"\n\n[[entries]]\nid = \"x\"\ndegraded = \"raw/nope.png\"\n",
    );
    let err = DatasetManifest::load(&dangling).unwrap_err();
    assert!(format!("{err:#}").contains("degraded"), "{err:#}");

    let mismatched = write(
        "dims.toml",
        concat!(
            "version = 1\nroot = \".\"\n\n",
            "[[entries]]\nid = \"a\"\ndegraded = \"raw/a.png\"\nreference = \"small.png\"\n"
        ),
    );
    let err = DatasetManifest::load(&mismatched).unwrap_err();
    assert!(format!("{err:#}").contains("reference"), "{err:#}");
}
