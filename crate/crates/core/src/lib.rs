//! Simulation of bistatic SAR image clips of faceted PEC ground targets.
//!
//! A physical-optics solver illuminates a triangular mesh with a plane
//! wave, the receiver is swept in azimuth over a stepped-frequency band, and
//! the resulting k-space samples are keystone-resampled and inverse-FFT'd
//! into image clips.

pub mod cli;
pub mod geometry;
pub mod imaging;
pub mod oracle;
pub mod po;
pub mod sweep;
pub mod validate;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space wave impedance, ohms.
pub const FREE_SPACE_IMPEDANCE: f64 = 376.730_313_668;

pub use num_complex::Complex64;

pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

pub fn wavenumber(frequency_hz: f64) -> f64 {
    std::f64::consts::TAU * frequency_hz / SPEED_OF_LIGHT
}
