use serde::{Deserialize, Serialize};

use super::SweepError;
use crate::geometry::direction_from_angles;
use crate::geometry::Vector3;
use crate::po::{PlaneWaveExcitation, Polarization};

const INTEGRAL_TOL: f64 = 1e-9;

fn d_center() -> f64 {
    1e9
}
fn d_bandwidth() -> f64 {
    750e6
}
fn d_fstep() -> f64 {
    15e6
}
fn d_az_end() -> f64 {
    360.0
}
fn d_az_step() -> f64 {
    0.72
}
fn d_el() -> f64 {
    15.0
}
fn d_pol() -> Polarization {
    Polarization::H
}

/// Fixed transmitter, receiver swept in azimuth at fixed elevation over a
/// stepped-frequency band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "d_center")]
    pub center_frequency_hz: f64,
    #[serde(default = "d_bandwidth")]
    pub bandwidth_hz: f64,
    #[serde(default = "d_fstep")]
    pub frequency_step_hz: f64,
    #[serde(default)]
    pub rx_azimuth_start_deg: f64,
    #[serde(default = "d_az_end")]
    pub rx_azimuth_end_deg: f64,
    #[serde(default = "d_az_step")]
    pub rx_azimuth_step_deg: f64,
    #[serde(default = "d_el")]
    pub rx_elevation_deg: f64,
    #[serde(default)]
    pub tx_azimuth_deg: f64,
    #[serde(default = "d_el")]
    pub tx_elevation_deg: f64,
    #[serde(default = "d_pol")]
    pub tx_polarization: Polarization,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            center_frequency_hz: d_center(),
            bandwidth_hz: d_bandwidth(),
            frequency_step_hz: d_fstep(),
            rx_azimuth_start_deg: 0.0,
            rx_azimuth_end_deg: d_az_end(),
            rx_azimuth_step_deg: d_az_step(),
            rx_elevation_deg: d_el(),
            tx_azimuth_deg: 0.0,
            tx_elevation_deg: d_el(),
            tx_polarization: d_pol(),
        }
    }
}

fn integral_ratio(num: f64, den: f64, what: &str) -> Result<usize, SweepError> {
    let r = num / den;
    let n = r.round();
    if !r.is_finite() || (r - n).abs() > INTEGRAL_TOL || n < 0.0 {
        return Err(SweepError::InvalidConfig(format!(
            "{what}: ratio {r} is not an integer"
        )));
    }
    Ok(n as usize)
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        let positive = [
            ("center_frequency_hz", self.center_frequency_hz),
            ("frequency_step_hz", self.frequency_step_hz),
            ("rx_azimuth_step_deg", self.rx_azimuth_step_deg),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SweepError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.bandwidth_hz >= 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(SweepError::InvalidConfig(format!(
                "bandwidth_hz must be non-negative, got {}",
                self.bandwidth_hz
            )));
        }
        integral_ratio(self.bandwidth_hz, self.frequency_step_hz, "bandwidth / frequency step")?;
        if self.min_frequency_hz() <= 0.0 {
            return Err(SweepError::InvalidConfig(format!(
                "lowest frequency {} Hz is not positive",
                self.min_frequency_hz()
            )));
        }
        let span = self.azimuth_span_deg();
        if !(span > 0.0) || span > 360.0 + INTEGRAL_TOL {
            return Err(SweepError::InvalidConfig(format!(
                "receiver azimuth span {span} must lie in (0, 360]"
            )));
        }
        integral_ratio(span, self.rx_azimuth_step_deg, "azimuth span / azimuth step")?;
        for (name, el) in [("rx_elevation_deg", self.rx_elevation_deg), ("tx_elevation_deg", self.tx_elevation_deg)] {
            if !(-90.0..=90.0).contains(&el) {
                return Err(SweepError::InvalidConfig(format!("{name} {el} outside [-90, 90]")));
            }
        }
        if !self.tx_azimuth_deg.is_finite() || !self.rx_azimuth_start_deg.is_finite() {
            return Err(SweepError::InvalidConfig("azimuths must be finite".into()));
        }
        Ok(())
    }

    pub fn azimuth_span_deg(&self) -> f64 {
        self.rx_azimuth_end_deg - self.rx_azimuth_start_deg
    }

    pub fn is_full_circle(&self) -> bool {
        (self.azimuth_span_deg() - 360.0).abs() <= INTEGRAL_TOL
    }

    pub fn min_frequency_hz(&self) -> f64 {
        self.center_frequency_hz - self.bandwidth_hz / 2.0
    }

    /// Band edges inclusive: `bandwidth / step + 1` points.
    pub fn n_frequency(&self) -> usize {
        (self.bandwidth_hz / self.frequency_step_hz).round() as usize + 1
    }

    /// End-exclusive for a full circle, inclusive otherwise.
    pub fn n_azimuth(&self) -> usize {
        let steps = (self.azimuth_span_deg() / self.rx_azimuth_step_deg).round() as usize;
        if self.is_full_circle() {
            steps
        } else {
            steps + 1
        }
    }

    pub fn frequency(&self, index: usize) -> f64 {
        self.min_frequency_hz() + index as f64 * self.frequency_step_hz
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_frequency()).map(|i| self.frequency(i)).collect()
    }

    pub fn rx_azimuth(&self, index: usize) -> f64 {
        self.rx_azimuth_start_deg + index as f64 * self.rx_azimuth_step_deg
    }

    pub fn rx_azimuths(&self) -> Vec<f64> {
        (0..self.n_azimuth()).map(|i| self.rx_azimuth(i)).collect()
    }

    pub fn tx_direction(&self) -> Vector3 {
        direction_from_angles(self.tx_azimuth_deg, self.tx_elevation_deg)
    }

    pub fn rx_direction(&self, index: usize) -> Vector3 {
        direction_from_angles(self.rx_azimuth(index), self.rx_elevation_deg)
    }

    pub fn excitation(&self, frequency_hz: f64) -> PlaneWaveExcitation {
        PlaneWaveExcitation::new(frequency_hz, self.tx_azimuth_deg, self.tx_elevation_deg, self.tx_polarization)
    }
}
