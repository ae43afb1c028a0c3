//! Image formation: polar k-space patches, keystone resampling onto a
//! rectangular grid, and inverse-FFT focusing.

mod image;
mod keystone;
mod kspace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use image::{form_image, ImageMeta, SarImage, Window, DEFAULT_DB_FLOOR, IMAGE_KIND};
pub(crate) use image::write_atomic;
pub use keystone::{keystone_resample, keystone_resample_with, KeystoneOptions, ResampledGrid, COLLAPSE_THRESHOLD};
pub use kspace::{
    extract_patch, kspace_coords, predict_geometry, start_index_for_beta, swath_columns, GeometryPrediction, KCoords,
    KSample, KSpacePatch,
};

use crate::sweep::{Channel, ContainerError, RunData};

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("swath {swath_deg} deg is not a positive multiple of the azimuth step {step_deg} deg")]
    SwathNotMultiple { swath_deg: f64, step_deg: f64 },
    #[error("swath needs {columns} azimuth columns but the run has {available}")]
    SwathTooWide { columns: usize, available: usize },
    #[error(
        "k-space support collapsed (mean bistatic angle {beta_mean_deg:.2} deg, mean cos(beta/2) {mean_cos_half_beta:.4})"
    )]
    SupportCollapsed { beta_mean_deg: f64, mean_cos_half_beta: f64 },
    #[error("resolution unbounded at bistatic angle {beta_deg} deg")]
    UnboundedResolution { beta_deg: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error("I/O error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipOptions {
    pub channel: Channel,
    pub window: Window,
    pub keystone: KeystoneOptions,
}

impl Default for ClipOptions {
    fn default() -> Self {
        ClipOptions {
            channel: Channel::H,
            window: Window::Rectangular,
            keystone: KeystoneOptions::default(),
        }
    }
}

/// Patch, resample and focus one clip.
pub fn image_patch(
    run: &RunData,
    start_azimuth_index: usize,
    swath_deg: f64,
    opts: &ClipOptions,
) -> Result<SarImage, ImagingError> {
    let patch = extract_patch(run, start_azimuth_index, swath_deg, opts.channel)?;
    let grid = keystone_resample_with(&patch, &opts.keystone)?;
    let mut img = form_image(&grid, opts.window, grid.nx, grid.ny)?;
    img.meta.channel = opts.channel;
    img.meta.start_index = patch.start_index;
    img.meta.swath_deg = swath_deg;
    Ok(img)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub start_index: usize,
    pub image: SarImage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedClip {
    pub start_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClipSeries {
    pub clips: Vec<Clip>,
    pub skipped: Vec<SkippedClip>,
}

/// Clip start indices for a run. Full-circle runs wrap; partial runs stop
/// where the swath would run off the end.
pub fn clip_starts(run: &RunData, swath_deg: f64, stride: usize) -> Result<Vec<usize>, ImagingError> {
    if stride == 0 {
        return Err(ImagingError::InvalidGrid("clip stride must be at least 1".into()));
    }
    let n = swath_columns(swath_deg, run.config.rx_azimuth_step_deg)?;
    let na = run.n_azimuth();
    if n > na {
        return Err(ImagingError::SwathTooWide {
            columns: n,
            available: na,
        });
    }
    let last = if run.config.is_full_circle() { na } else { na - n + 1 };
    Ok((0..last).step_by(stride).collect())
}

/// Sliding-window clips over a run. Clips whose support collapses are
/// skipped and reported; any other error aborts.
pub fn clip_series(
    run: &RunData,
    swath_deg: f64,
    stride: usize,
    opts: &ClipOptions,
) -> Result<ClipSeries, ImagingError> {
    let mut out = ClipSeries::default();
    for start in clip_starts(run, swath_deg, stride)? {
        match image_patch(run, start, swath_deg, opts) {
            Ok(image) => out.clips.push(Clip {
                start_index: start,
                image,
            }),
            Err(e @ ImagingError::SupportCollapsed { .. }) => out.skipped.push(SkippedClip {
                start_index: start,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
