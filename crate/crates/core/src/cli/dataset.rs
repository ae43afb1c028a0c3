use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::commands::{write_clip, write_text};
use super::config::{build_scene, DatasetTarget, LoadedConfig};
use super::CliError;
use crate::geometry::Mesh;
use crate::imaging::{clip_series, SkippedClip};
use crate::sweep::{plan_dataset, run_sweep_with, save_run, PlannedRun, SweepConfig, SweepOptions};

pub const MANIFEST_FORMAT: &str = "sarforge-dataset/1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the dataset root, `/`-separated.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Planned,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestClip {
    pub index: usize,
    pub start_azimuth_index: usize,
    pub end_azimuth_index: usize,
    pub beta_mean_deg: f64,
    pub image: FileEntry,
    pub sidecar: FileEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complex: Option<FileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRun {
    pub target: String,
    pub dir: String,
    pub config: SweepConfig,
    pub status: RunStatus,
    #[serde(default)]
    pub mesh_hash: Option<String>,
    /// Digest of the run's samples and provenance.
    #[serde(default)]
    pub run_hash: Option<String>,
    #[serde(default)]
    pub run_file: Option<FileEntry>,
    #[serde(default)]
    pub clips: Vec<ManifestClip>,
    #[serde(default)]
    pub skipped_clips: Vec<SkippedClip>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    /// Digest of the imaging settings; clips are only reused when it matches.
    pub imaging_hash: String,
    pub planned_runs: usize,
    pub runs: Vec<ManifestRun>,
}

impl Manifest {
    pub fn clip_count(&self) -> usize {
        self.runs.iter().map(|r| r.clips.len()).sum()
    }

    pub fn complete_runs(&self) -> usize {
        self.runs.iter().filter(|r| r.status == RunStatus::Complete).count()
    }

    /// Every file the manifest references.
    pub fn files(&self) -> Vec<&FileEntry> {
        let mut out = Vec::new();
        for r in &self.runs {
            out.extend(r.run_file.iter());
            for c in &r.clips {
                out.push(&c.image);
                out.push(&c.sidecar);
                out.extend(c.complex.iter());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DatasetOptions {
    pub jobs: usize,
    pub dry_run: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetReport {
    pub root: PathBuf,
    pub planned: usize,
    pub executed: usize,
    pub reused: usize,
    pub clips: usize,
    pub skipped_clips: usize,
    pub dry_run: bool,
}

fn fmt_angle(a: f64) -> String {
    format!("{a}")
}

pub fn run_dir_name(cfg: &SweepConfig) -> String {
    format!(
        "{}_{}_{}",
        fmt_angle(cfg.tx_azimuth_deg),
        fmt_angle(cfg.tx_elevation_deg),
        cfg.tx_polarization.label()
    )
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_entry(root: &Path, rel: &str) -> Result<FileEntry, CliError> {
    let bytes = std::fs::read(root.join(rel)).with_context(|| format!("reading {rel}"))?;
    Ok(FileEntry {
        path: rel.to_string(),
        sha256: sha256_hex(&bytes),
    })
}

fn entry_intact(root: &Path, e: &FileEntry) -> bool {
    std::fs::read(root.join(&e.path)).is_ok_and(|b| sha256_hex(&b) == e.sha256)
}

/// SHA-256 of every file under `dir`, keyed by `/`-separated relative path.
pub fn tree_digest(dir: &Path) -> std::io::Result<BTreeMap<String, String>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, String>) -> std::io::Result<()> {
        let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<Result<_, _>>()?;
        entries.sort_by_key(|e| e.file_name());
        for e in entries {
            let p = e.path();
            if e.file_type()?.is_dir() {
                walk(base, &p, out)?;
            } else {
                let rel = p.strip_prefix(base).expect("under base");
                let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
                out.insert(key, sha256_hex(&std::fs::read(&p)?));
            }
        }
        Ok(())
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out)?;
    Ok(out)
}

fn targets(cfg: &LoadedConfig) -> Vec<DatasetTarget> {
    let c = &cfg.config;
    if c.dataset.targets.is_empty() {
        vec![DatasetTarget {
            name: c.scene.name.clone(),
            scene: c.scene.clone(),
        }]
    } else {
        c.dataset.targets.clone()
    }
}

pub fn plan(cfg: &LoadedConfig) -> Vec<PlannedRun> {
    let c = &cfg.config;
    let names: Vec<String> = targets(cfg).into_iter().map(|t| t.name).collect();
    plan_dataset(
        &names,
        &c.dataset.tx_azimuths_deg,
        &c.dataset.elevations_deg,
        &c.dataset.polarizations,
        &c.sweep,
    )
}

fn write_manifest(root: &Path, m: &Manifest) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(m).expect("manifest serialises") + "\n";
    write_text(&root.join(MANIFEST_FILE), &json)
}

pub fn read_manifest(root: &Path) -> Option<Manifest> {
    let text = std::fs::read_to_string(root.join(MANIFEST_FILE)).ok()?;
    serde_json::from_str(&text).ok().filter(|m: &Manifest| m.format == MANIFEST_FORMAT)
}

fn planned_entry(p: &PlannedRun) -> ManifestRun {
    ManifestRun {
        target: p.target.clone(),
        dir: format!("{}/{}", p.target, run_dir_name(&p.config)),
        config: p.config.clone(),
        status: RunStatus::Planned,
        mesh_hash: None,
        run_hash: None,
        run_file: None,
        clips: Vec::new(),
        skipped_clips: Vec::new(),
    }
}

fn reusable(root: &Path, prev: &ManifestRun, want: &ManifestRun, mesh_hash: &str) -> bool {
    prev.status == RunStatus::Complete
        && prev.dir == want.dir
        && prev.config == want.config
        && prev.mesh_hash.as_deref() == Some(mesh_hash)
        && prev.run_file.as_ref().is_some_and(|f| entry_intact(root, f))
        && prev.clips.iter().all(|c| {
            entry_intact(root, &c.image) && entry_intact(root, &c.sidecar) && c.complex.iter().all(|x| entry_intact(root, x))
        })
}

fn execute(cfg: &LoadedConfig, root: &Path, entry: &ManifestRun, mesh: &Mesh) -> Result<ManifestRun, CliError> {
    let run_dir = root.join(&entry.dir);
    let clip_dir = run_dir.join("clips");
    if clip_dir.exists() {
        std::fs::remove_dir_all(&clip_dir).with_context(|| format!("clearing {}", clip_dir.display()))?;
    }
    let (run, _) = run_sweep_with(mesh, &entry.config, SweepOptions { jobs: 0 })
        .with_context(|| format!("sweep {}", entry.dir))?;
    let run_rel = format!("{}/run.bsar", entry.dir);
    save_run(&run, &root.join(&run_rel)).with_context(|| format!("writing {run_rel}"))?;
    let run_hash = run.content_hash();
    let project = &cfg.config;
    let opts = project.imaging.clip_options(entry.config.tx_polarization);
    let series = clip_series(&run, project.imaging.swath_deg, project.imaging.stride, &opts)
        .map_err(|e| anyhow!("imaging {}: {e}", entry.dir))?;
    let mut clips = Vec::with_capacity(series.clips.len());
    for (i, clip) in series.clips.iter().enumerate() {
        let w = write_clip(&clip.image, i, &run, &run_hash, &entry.target, project, &clip_dir)?;
        let rel = |f: &Path| format!("{}/clips/{}", entry.dir, f.display());
        let image = file_entry(root, &rel(&w.files[0]))?;
        let sidecar = file_entry(root, &rel(w.files.last().expect("sidecar")))?;
        let complex = match &w.sidecar.complex_file {
            Some(f) => Some(file_entry(root, &rel(Path::new(f)))?),
            None => None,
        };
        clips.push(ManifestClip {
            index: i,
            start_azimuth_index: w.sidecar.start_azimuth_index,
            end_azimuth_index: w.sidecar.end_azimuth_index,
            beta_mean_deg: w.sidecar.beta_mean_deg,
            image,
            sidecar,
            complex,
        });
    }
    Ok(ManifestRun {
        status: RunStatus::Complete,
        mesh_hash: Some(run.mesh_hash.clone()),
        run_hash: Some(run_hash),
        run_file: Some(file_entry(root, &run_rel)?),
        clips,
        skipped_clips: series.skipped,
        ..entry.clone()
    })
}

/// Plans, runs and images every (target, transmitter) combination under
/// `<out>/dataset`, maintaining a manifest. Completed runs whose files still
/// match their recorded hashes are not recomputed.
pub fn dataset(cfg: &LoadedConfig, out: &Path, opts: DatasetOptions) -> Result<DatasetReport, CliError> {
    let root = out.join("dataset");
    let plan = plan(cfg);
    let imaging_json = serde_json::to_vec(&cfg.config.imaging).expect("imaging serialises");
    let imaging_hash = sha256_hex(&imaging_json);
    let mut manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        imaging_hash: imaging_hash.clone(),
        planned_runs: plan.len(),
        runs: plan.iter().map(planned_entry).collect(),
    };
    let mut report = DatasetReport {
        root: root.clone(),
        planned: plan.len(),
        executed: 0,
        reused: 0,
        clips: 0,
        skipped_clips: 0,
        dry_run: opts.dry_run,
    };
    if opts.dry_run {
        write_manifest(&root, &manifest)?;
        return Ok(report);
    }

    let mut meshes: BTreeMap<String, Mesh> = BTreeMap::new();
    for (i, t) in targets(cfg).iter().enumerate() {
        let at = if cfg.config.dataset.targets.is_empty() {
            "scene".to_string()
        } else {
            format!("dataset.targets[{i}].scene")
        };
        let mesh = build_scene(&t.scene, &cfg.base_dir, &at)?;
        meshes.insert(t.name.clone(), mesh);
    }
    let hashes: BTreeMap<&str, String> = meshes.iter().map(|(k, m)| (k.as_str(), m.content_hash())).collect();

    let previous = read_manifest(&root).filter(|m| m.imaging_hash == imaging_hash);
    let mut todo = Vec::new();
    for (i, entry) in manifest.runs.iter_mut().enumerate() {
        let prev = previous.as_ref().and_then(|m| m.runs.iter().find(|r| r.dir == entry.dir));
        match prev {
            Some(p) if reusable(&root, p, entry, &hashes[entry.target.as_str()]) => {
                *entry = p.clone();
                report.reused += 1;
            }
            _ => todo.push(i),
        }
    }
    write_manifest(&root, &manifest)?;

    let shared = Mutex::new(manifest);
    let results = crate::sweep::with_jobs(opts.jobs, || {
        todo.par_iter()
            .map(|&i| {
                let entry = shared.lock().expect("manifest lock").runs[i].clone();
                let done = execute(cfg, &root, &entry, &meshes[&entry.target])?;
                let mut m = shared.lock().expect("manifest lock");
                m.runs[i] = done;
                write_manifest(&root, &m)?;
                Ok(())
            })
            .collect::<Vec<Result<(), CliError>>>()
    })
    .map_err(|e| CliError::Runtime(anyhow!("thread pool: {e}")))?;
    let manifest = shared.into_inner().expect("manifest lock");
    write_manifest(&root, &manifest)?;
    for r in results {
        r?;
    }
    report.executed = todo.len();
    report.clips = manifest.clip_count();
    report.skipped_clips = manifest.runs.iter().map(|r| r.skipped_clips.len()).sum();
    Ok(report)
}

