use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ImagingError;
use crate::geometry::Vector3;
use crate::sweep::{Channel, RunData};
use crate::SPEED_OF_LIGHT;

/// Bistatic wavevector of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KCoords {
    /// Full wavevector `(2πf/c)(û_tx + û_rx)`, rad/m.
    pub k: Vector3,
    /// Bistatic angle, degrees.
    pub beta_deg: f64,
}

impl KCoords {
    pub fn kx(&self) -> f64 {
        self.k.x
    }
    pub fn ky(&self) -> f64 {
        self.k.y
    }
}

pub fn kspace_coords(tx_dir: Vector3, rx_dir: Vector3, frequency_hz: f64) -> KCoords {
    let cos_beta = tx_dir.dot(rx_dir).clamp(-1.0, 1.0);
    let k0 = std::f64::consts::TAU * frequency_hz / SPEED_OF_LIGHT;
    KCoords {
        k: (tx_dir + rx_dir) * k0,
        beta_deg: cos_beta.acos().to_degrees(),
    }
}

/// One k-space sample: ground-plane wavevector components, bistatic angle
/// and measured value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSample {
    pub kx: f64,
    pub ky: f64,
    pub beta_deg: f64,
    pub value: Complex64,
}

/// Contiguous azimuth block of one run, `[column][frequency]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KSpacePatch {
    pub n_columns: usize,
    pub n_frequencies: usize,
    pub samples: Vec<KSample>,
    pub azimuth_indices: Vec<usize>,
    pub rx_azimuths_deg: Vec<f64>,
    pub frequencies_hz: Vec<f64>,
    pub frequency_step_hz: f64,
    pub azimuth_step_deg: f64,
    pub tx_direction: Vector3,
    pub rx_elevation_deg: f64,
    pub start_index: usize,
    pub swath_deg: f64,
    pub channel: Channel,
}

impl KSpacePatch {
    pub fn sample(&self, column: usize, frequency: usize) -> &KSample {
        &self.samples[column * self.n_frequencies + frequency]
    }

    pub fn column(&self, column: usize) -> &[KSample] {
        &self.samples[column * self.n_frequencies..(column + 1) * self.n_frequencies]
    }

    /// Mean bistatic angle over columns, degrees.
    pub fn beta_mean_deg(&self) -> f64 {
        (0..self.n_columns).map(|c| self.sample(c, 0).beta_deg).sum::<f64>() / self.n_columns as f64
    }

    /// Mean of cos(β/2) over columns.
    pub fn mean_cos_half_beta(&self) -> f64 {
        (0..self.n_columns)
            .map(|c| (self.sample(c, 0).beta_deg.to_radians() / 2.0).cos())
            .sum::<f64>()
            / self.n_columns as f64
    }
}

/// Number of azimuth columns a swath covers.
pub fn swath_columns(swath_deg: f64, step_deg: f64) -> Result<usize, ImagingError> {
    let r = swath_deg / step_deg;
    let n = r.round();
    if !(r.is_finite() && (r - n).abs() <= 1e-9 && n >= 1.0) {
        return Err(ImagingError::SwathNotMultiple { swath_deg, step_deg });
    }
    Ok(n as usize)
}

/// `swath_deg / step` consecutive azimuth columns starting at
/// `start_azimuth_index`, wrapping modulo the run's azimuth count.
pub fn extract_patch(
    run: &RunData,
    start_azimuth_index: usize,
    swath_deg: f64,
    channel: Channel,
) -> Result<KSpacePatch, ImagingError> {
    let cfg = &run.config;
    let na = run.n_azimuth();
    let nf = run.n_frequency();
    let n_columns = swath_columns(swath_deg, cfg.rx_azimuth_step_deg)?;
    if n_columns > na {
        return Err(ImagingError::SwathTooWide {
            columns: n_columns,
            available: na,
        });
    }
    let tx = cfg.tx_direction();
    let frequencies = cfg.frequencies();
    let mut samples = Vec::with_capacity(n_columns * nf);
    let mut azimuth_indices = Vec::with_capacity(n_columns);
    let mut rx_azimuths = Vec::with_capacity(n_columns);
    for c in 0..n_columns {
        let ia = (start_azimuth_index + c) % na;
        azimuth_indices.push(ia);
        rx_azimuths.push(cfg.rx_azimuth(ia));
        let rx = cfg.rx_direction(ia);
        for (jf, &f) in frequencies.iter().enumerate() {
            let kc = kspace_coords(tx, rx, f);
            samples.push(KSample {
                kx: kc.kx(),
                ky: kc.ky(),
                beta_deg: kc.beta_deg,
                value: run.sample(ia, jf, channel),
            });
        }
    }
    Ok(KSpacePatch {
        n_columns,
        n_frequencies: nf,
        samples,
        azimuth_indices,
        rx_azimuths_deg: rx_azimuths,
        frequencies_hz: frequencies,
        frequency_step_hz: cfg.frequency_step_hz,
        azimuth_step_deg: cfg.rx_azimuth_step_deg,
        tx_direction: tx,
        rx_elevation_deg: cfg.rx_elevation_deg,
        start_index: start_azimuth_index % na,
        swath_deg,
        channel,
    })
}

/// Azimuth start index whose patch has mean bistatic angle closest to
/// `beta_deg`.
pub fn start_index_for_beta(run: &RunData, swath_deg: f64, beta_deg: f64) -> Result<usize, ImagingError> {
    let cfg = &run.config;
    let n_columns = swath_columns(swath_deg, cfg.rx_azimuth_step_deg)?;
    let na = run.n_azimuth();
    let tx = cfg.tx_direction();
    let betas: Vec<f64> = (0..na)
        .map(|i| tx.dot(cfg.rx_direction(i)).clamp(-1.0, 1.0).acos().to_degrees())
        .collect();
    let mut best = (f64::INFINITY, 0);
    for s in 0..na {
        let mean = (0..n_columns).map(|c| betas[(s + c) % na]).sum::<f64>() / n_columns as f64;
        let err = (mean - beta_deg).abs();
        if err < best.0 {
            best = (err, s);
        }
    }
    Ok(best.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryPrediction {
    pub range_res_m: f64,
    pub crossrange_res_m: f64,
    pub range_extent_m: f64,
    pub crossrange_extent_m: f64,
}

/// Resolution and unambiguous extent at the band centre for bistatic angle
/// `beta_deg`.
pub fn predict_geometry(
    cfg: &crate::sweep::SweepConfig,
    swath_deg: f64,
    beta_deg: f64,
) -> Result<GeometryPrediction, ImagingError> {
    if beta_deg >= 179.0 {
        return Err(ImagingError::UnboundedResolution { beta_deg });
    }
    if !(swath_deg > 0.0) {
        return Err(ImagingError::SwathNotMultiple {
            swath_deg,
            step_deg: cfg.rx_azimuth_step_deg,
        });
    }
    let c = SPEED_OF_LIGHT;
    let half = (beta_deg.to_radians() / 2.0).cos();
    let lambda_c = c / cfg.center_frequency_hz;
    Ok(GeometryPrediction {
        range_res_m: c / (2.0 * cfg.bandwidth_hz * half),
        crossrange_res_m: lambda_c / (2.0 * swath_deg.to_radians() * half),
        range_extent_m: c / (2.0 * cfg.frequency_step_hz),
        crossrange_extent_m: lambda_c / (2.0 * cfg.rx_azimuth_step_deg.to_radians()),
    })
}
