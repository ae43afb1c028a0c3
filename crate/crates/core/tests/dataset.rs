use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use sarforge::cli::{dataset, read_manifest, tree_digest, DatasetOptions, LoadedConfig};
use sarforge::validate::msl_demo_project;

fn loaded() -> LoadedConfig {
    LoadedConfig {
        config: msl_demo_project(),
        base_dir: PathBuf::from("."),
    }
}

fn run(cfg: &LoadedConfig, out: &Path) -> sarforge::cli::DatasetReport {
    dataset(cfg, out, DatasetOptions { jobs: 2, dry_run: false }).unwrap()
}

fn assert_no_orphans(out: &Path) {
    let root = out.join("dataset");
    let m = read_manifest(&root).unwrap();
    let listed: BTreeSet<String> = m.files().iter().map(|f| f.path.clone()).collect();
    let on_disk: BTreeSet<String> = tree_digest(&root)
        .unwrap()
        .into_keys()
        .filter(|k| k != "manifest.json")
        .collect();
    assert_eq!(listed, on_disk);
}

fn assert_same_tree(a: &BTreeMap<String, String>, b: &BTreeMap<String, String>) {
    let differing: Vec<&String> = a.keys().chain(b.keys()).filter(|k| a.get(*k) != b.get(*k)).collect();
    assert!(differing.is_empty(), "differing files: {differing:?}");
}

#[test]
fn msl_demo_resume_and_repair() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = loaded();
    let first = run(&cfg, dir.path());
    assert_eq!((first.executed, first.reused, first.clips), (1, 0, 50));
    let m = read_manifest(&dir.path().join("dataset")).unwrap();
    assert_eq!(m.clip_count(), 50);
    assert_no_orphans(dir.path());
    let before = tree_digest(dir.path()).unwrap();

    let second = run(&cfg, dir.path());
    assert_eq!((second.executed, second.reused), (0, 1));
    assert_same_tree(&before, &tree_digest(dir.path()).unwrap());

    let clip = &m.runs[0].clips[7].image.path;
    std::fs::write(dir.path().join("dataset").join(clip), b"damaged").unwrap();
    let third = run(&cfg, dir.path());
    assert_eq!((third.executed, third.reused), (1, 0));
    assert_same_tree(&before, &tree_digest(dir.path()).unwrap());
}

#[test]
fn interrupted_run_is_redone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = loaded();
    run(&cfg, dir.path());
    let m = read_manifest(&dir.path().join("dataset")).unwrap();
    std::fs::remove_file(dir.path().join("dataset").join(&m.runs[0].run_file.as_ref().unwrap().path)).unwrap();
    let again = run(&cfg, dir.path());
    assert_eq!(again.executed, 1);
    assert_no_orphans(dir.path());
}

#[test]
fn imaging_change_reimages_without_orphans() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = loaded();
    run(&cfg, dir.path());
    cfg.config.imaging.stride = 20;
    let r = run(&cfg, dir.path());
    assert_eq!((r.executed, r.clips), (1, 25));
    assert_no_orphans(dir.path());
}

#[test]
fn clip_sidecars_carry_provenance() {
    let dir = tempfile::tempdir().unwrap();
    run(&loaded(), dir.path());
    let root = dir.path().join("dataset");
    let m = read_manifest(&root).unwrap();
    let r = &m.runs[0];
    assert_eq!(r.dir, "MSL/0_15_H");
    let c = &r.clips[3];
    let side: serde_json::Value = serde_json::from_slice(&std::fs::read(root.join(&c.sidecar.path)).unwrap()).unwrap();
    assert_eq!(side["mesh_hash"].as_str(), r.mesh_hash.as_deref());
    assert_eq!(side["run_hash"].as_str(), r.run_hash.as_deref());
    assert_eq!(side["start_azimuth_index"], 30);
}
