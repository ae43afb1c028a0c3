use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::Serialize;

use super::config::{build_scene, ConfigError, LoadedConfig, ProjectConfig, RasterFormat};
use super::CliError;
use crate::geometry::{mesh_quality, Mesh, Vector3};
use crate::imaging::{clip_series, image_patch, predict_geometry, write_atomic, GeometryPrediction, SarImage};
use crate::oracle::{angle_diff_deg, rcs_peaks, specular_lobes, RcsPeak};
use crate::po::{bistatic_rcs_sweep, illuminate, PlaneWaveExcitation, RcsSample};
use crate::sweep::{load_run, run_sweep_with, save_run, RunData, SweepOptions};

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes()).map_err(|e| CliError::Runtime(anyhow!(e)))
}

fn scene_mesh(cfg: &LoadedConfig) -> Result<Mesh, CliError> {
    Ok(build_scene(&cfg.config.scene, &cfg.base_dir, "scene")?)
}

/// Distinct outward face normals, rounded to suppress facet-level noise.
pub fn face_normals(mesh: &Mesh) -> Vec<Vector3> {
    let mut out: Vec<Vector3> = Vec::new();
    for f in mesh.facets() {
        if !out.iter().any(|n| (*n - f.normal).norm() < 1e-9) {
            out.push(f.normal);
        }
    }
    out
}

pub struct RcsOutcome {
    pub samples: Vec<RcsSample>,
    pub peaks: Vec<RcsPeak>,
    pub predicted_deg: Vec<f64>,
    pub summary: String,
}

/// Largest peak-to-lobe distance reported as a match, degrees.
pub const PREDICTION_MATCH_DEG: f64 = 5.0;

pub fn rcs(cfg: &LoadedConfig, out: &Path) -> Result<RcsOutcome, CliError> {
    let mesh = scene_mesh(cfg)?;
    let r = &cfg.config.rcs;
    let n = (360.0 / r.rx_azimuth_step_deg).round() as usize;
    if ((n as f64) * r.rx_azimuth_step_deg - 360.0).abs() > 1e-9 * 360.0 {
        return Err(ConfigError::new("rcs.rx_azimuth_step_deg", "must divide 360").into());
    }
    let azimuths: Vec<f64> = (0..n).map(|i| i as f64 * r.rx_azimuth_step_deg).collect();
    let exc = PlaneWaveExcitation::new(r.frequency_hz, r.tx_azimuth_deg, r.tx_elevation_deg, r.polarization);
    let samples = bistatic_rcs_sweep(&mesh, &exc, r.rx_elevation_deg, &azimuths).context("RCS sweep")?;

    let mut csv = String::from("rx_azimuth_deg,sigma_dbsm,sigma_cross_dbsm\n");
    for s in &samples {
        writeln!(csv, "{},{},{}", s.rx_azimuth_deg, s.sigma_dbsm, s.sigma_cross_dbsm).unwrap();
    }
    write_text(&out.join("rcs.csv"), &csv)?;

    let values: Vec<f64> = samples.iter().map(|s| s.sigma_dbsm).collect();
    let peaks = rcs_peaks(&values, &azimuths, r.peak_prominence_db);
    let lobes: Vec<_> = specular_lobes(&face_normals(&mesh), exc.tx_direction())
        .into_iter()
        .filter(|l| (l.elevation_deg - r.rx_elevation_deg).abs() < 1e-6)
        .collect();
    let mut pcsv = String::from("rx_azimuth_deg,sigma_dbsm,prominence_db,nearest_predicted_deg\n");
    let mut summary = format!(
        "mesh '{}' ({} facets), {} samples, {} peaks with prominence >= {} dB\n",
        mesh.name,
        mesh.facets().len(),
        samples.len(),
        peaks.len(),
        r.peak_prominence_db
    );
    // At the zenith every receiver azimuth is the same direction.
    let zenith = 90.0 - r.rx_elevation_deg.abs() < 1e-9;
    let diff = |a: f64, b: f64| if zenith { 0.0 } else { angle_diff_deg(a, b) };
    for p in &peaks {
        let nearest = lobes
            .iter()
            .min_by(|a, b| diff(a.azimuth_deg, p.azimuth_deg).total_cmp(&diff(b.azimuth_deg, p.azimuth_deg)))
            .filter(|l| diff(l.azimuth_deg, p.azimuth_deg) <= PREDICTION_MATCH_DEG)
            .map(|l| (if zenith { p.azimuth_deg } else { l.azimuth_deg }, if l.forward { "forward" } else { "specular" }));
        let (naz, kind) = nearest.unwrap_or((f64::NAN, "unpredicted"));
        writeln!(pcsv, "{},{},{},{}", p.azimuth_deg, p.value_db, p.prominence_db, naz).unwrap();
        writeln!(
            summary,
            "  peak {:7.2} deg  {:7.2} dBsm  prominence {:6.2} dB  predicted {:7.2} ({kind})",
            p.azimuth_deg, p.value_db, p.prominence_db, naz
        )
        .unwrap();
    }
    write_text(&out.join("rcs_peaks.csv"), &pcsv)?;
    Ok(RcsOutcome {
        samples,
        peaks,
        predicted_deg: lobes.iter().map(|l| l.azimuth_deg).collect(),
        summary,
    })
}

pub struct ShadowOutcome {
    pub ground_facets: usize,
    pub shadowed: usize,
    pub summary: String,
}

pub fn shadowmap(cfg: &LoadedConfig, out: &Path) -> Result<ShadowOutcome, CliError> {
    let mesh = scene_mesh(cfg)?;
    let s = &cfg.config.shadowmap;
    let part = mesh
        .part(&s.ground_part)
        .ok_or_else(|| ConfigError::new("shadowmap.ground_part", format!("scene has no part '{}'", s.ground_part)))?;
    if part.facets.is_empty() {
        return Err(ConfigError::new("shadowmap.ground_part", "ground patch is empty").into());
    }
    let exc = PlaneWaveExcitation::new(s.frequency_hz, s.tx_azimuth_deg, s.tx_elevation_deg, s.polarization);
    let currents = illuminate(&mesh, &exc).context("illumination")?;
    write_text(&out.join("currents.csv"), &currents.to_csv(&mesh))?;
    let shadowed = part.facets.clone().filter(|&i| !currents.lit[i]).count();
    let n = part.facets.len();
    let summary = format!(
        "ground part '{}': {n} facets, {} lit, {shadowed} shadowed (tx az {} deg, el {} deg)\n",
        s.ground_part,
        n - shadowed,
        s.tx_azimuth_deg,
        s.tx_elevation_deg
    );
    Ok(ShadowOutcome {
        ground_facets: n,
        shadowed,
        summary,
    })
}

/// `created_unix` for standalone runs; honours `SOURCE_DATE_EPOCH`.
pub fn creation_time() -> Option<u64> {
    if let Ok(v) = std::env::var("SOURCE_DATE_EPOCH") {
        return v.trim().parse().ok();
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs())
}

pub fn sweep(cfg: &LoadedConfig, out: &Path, jobs: usize) -> Result<(RunData, String), CliError> {
    let mesh = scene_mesh(cfg)?;
    let q = mesh_quality(&mesh, cfg.config.sweep.center_frequency_hz).context("mesh quality")?;
    let (mut run, stats) = run_sweep_with(&mesh, &cfg.config.sweep, SweepOptions { jobs }).context("sweep")?;
    run.created_unix = creation_time();
    let path = out.join("run.bsar");
    save_run(&run, &path).with_context(|| format!("writing {}", path.display()))?;
    let mut summary = format!(
        "run {} x {} x 2 written to {} ({} illuminations)\n",
        run.n_azimuth(),
        run.n_frequency(),
        path.display(),
        stats.illuminate_calls
    );
    if q.coarse_warning {
        writeln!(summary, "warning: max edge {:.2} wavelengths", q.max_edge_over_lambda).unwrap();
    }
    Ok((run, summary))
}

/// Per-clip JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClipSidecar {
    pub target: String,
    pub clip_index: usize,
    pub start_azimuth_index: usize,
    pub end_azimuth_index: usize,
    pub rx_azimuth_start_deg: f64,
    pub rx_azimuth_end_deg: f64,
    pub swath_deg: f64,
    pub beta_mean_deg: f64,
    pub range_axis_deg: f64,
    pub channel: crate::sweep::Channel,
    pub tx_polarization: crate::po::Polarization,
    pub window: crate::imaging::Window,
    pub nx: usize,
    pub ny: usize,
    pub dx_m: f64,
    pub dy_m: f64,
    pub db_floor: f64,
    pub predicted: Option<GeometryPrediction>,
    pub mesh_name: String,
    pub mesh_hash: String,
    pub run_hash: String,
    pub image_file: String,
    pub complex_file: Option<String>,
}

pub struct WrittenClip {
    pub sidecar: ClipSidecar,
    /// Paths relative to the clip directory's parent.
    pub files: Vec<PathBuf>,
}

pub(crate) fn write_clip(
    img: &SarImage,
    clip_index: usize,
    run: &RunData,
    run_hash: &str,
    target: &str,
    project: &ProjectConfig,
    clip_dir: &Path,
) -> Result<WrittenClip, CliError> {
    let im = &project.imaging;
    let stem = format!("{clip_index:03}");
    let ext = im.format.extension();
    let image_file = format!("{stem}.{ext}");
    let rt = |e: crate::imaging::ImagingError| CliError::Runtime(anyhow!(e));
    match im.format {
        RasterFormat::Png => img.write_png(&clip_dir.join(&image_file), im.db_floor).map_err(rt)?,
        RasterFormat::Pgm => img.write_pgm(&clip_dir.join(&image_file), im.db_floor).map_err(rt)?,
    }
    let mut files = vec![PathBuf::from(&image_file)];
    let complex_file = if im.save_complex {
        let f = format!("{stem}.bsar");
        img.save(&clip_dir.join(&f)).map_err(rt)?;
        files.push(PathBuf::from(&f));
        Some(f)
    } else {
        None
    };
    let cfg = &run.config;
    let n_cols = (img.meta.swath_deg / cfg.rx_azimuth_step_deg).round() as usize;
    let end = (img.meta.start_index + n_cols - 1) % run.n_azimuth();
    let sidecar = ClipSidecar {
        target: target.to_string(),
        clip_index,
        start_azimuth_index: img.meta.start_index,
        end_azimuth_index: end,
        rx_azimuth_start_deg: cfg.rx_azimuth(img.meta.start_index),
        rx_azimuth_end_deg: cfg.rx_azimuth(end),
        swath_deg: img.meta.swath_deg,
        beta_mean_deg: img.meta.beta_mean_deg,
        range_axis_deg: img.meta.range_axis_deg,
        channel: img.meta.channel,
        tx_polarization: cfg.tx_polarization,
        window: img.meta.window,
        nx: img.meta.nx,
        ny: img.meta.ny,
        dx_m: img.meta.dx_m,
        dy_m: img.meta.dy_m,
        db_floor: im.db_floor,
        predicted: predict_geometry(cfg, img.meta.swath_deg, img.meta.beta_mean_deg).ok(),
        mesh_name: run.mesh_name.clone(),
        mesh_hash: run.mesh_hash.clone(),
        run_hash: run_hash.to_string(),
        image_file,
        complex_file,
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serialises") + "\n";
    let side = format!("{stem}.json");
    write_text(&clip_dir.join(&side), &json)?;
    files.push(PathBuf::from(side));
    Ok(WrittenClip { sidecar, files })
}

pub fn image(
    cfg: &LoadedConfig,
    out: &Path,
    run_path: Option<&Path>,
    start: Option<usize>,
    jobs: usize,
) -> Result<String, CliError> {
    let (run, mut summary) = match run_path {
        Some(p) => (
            load_run(p).with_context(|| format!("reading {}", p.display()))?,
            String::new(),
        ),
        None => sweep(cfg, out, jobs)?,
    };
    let run_hash = run.content_hash();
    let project = &cfg.config;
    let opts = project.imaging.clip_options(run.config.tx_polarization);
    let clip_dir = out.join("clips");
    let images: Vec<SarImage> = match start {
        Some(s) => vec![image_patch(&run, s, project.imaging.swath_deg, &opts).map_err(|e| anyhow!(e))?],
        None => {
            let series = clip_series(&run, project.imaging.swath_deg, project.imaging.stride, &opts)
                .map_err(|e| anyhow!(e))?;
            for s in &series.skipped {
                writeln!(summary, "skipped clip at azimuth index {}: {}", s.start_index, s.reason).unwrap();
            }
            series.clips.into_iter().map(|c| c.image).collect()
        }
    };
    for (i, img) in images.iter().enumerate() {
        write_clip(img, i, &run, &run_hash, &run.mesh_name, project, &clip_dir)?;
    }
    writeln!(summary, "{} clips written to {}", images.len(), clip_dir.display()).unwrap();
    Ok(summary)
}
