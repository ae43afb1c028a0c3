//! Independent references: closed-form RCS, ideal point-scatterer runs,
//! reflection-law peak prediction, peak extraction and a quadrature check
//! for the facet phase integral.

mod peaks;
pub mod quadrature;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::{azimuth_of, Vector3};
use crate::imaging::kspace_coords;
use crate::sweep::{RunData, SweepConfig, SweepError};
use crate::SPEED_OF_LIGHT;

pub use peaks::{find_peak, find_peaks_with, rcs_peaks, write_peaks_csv, ImagePeak, RcsPeak};

/// Broadside PO RCS of an `a` x `b` flat plate, dBsm.
pub fn plate_rcs_analytic(a_m: f64, b_m: f64, frequency_hz: f64) -> f64 {
    let lambda = SPEED_OF_LIGHT / frequency_hz;
    let area = a_m * b_m;
    10.0 * (4.0 * std::f64::consts::PI * area * area / (lambda * lambda)).log10()
}

/// Isotropic, frequency-flat point scatterer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointScatterer {
    pub position: Vector3,
    #[serde(default = "unit_amplitude")]
    pub amplitude: Complex64,
}

fn unit_amplitude() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl PointScatterer {
    pub fn new(position: Vector3, amplitude: f64) -> Self {
        PointScatterer {
            position,
            amplitude: Complex64::new(amplitude, 0.0),
        }
    }
}

/// Run whose samples are the ideal phase sum `Σ A exp(-j K·r)`, identical
/// in both channels.
pub fn synth_run(scatterers: &[PointScatterer], cfg: &SweepConfig) -> Result<RunData, SweepError> {
    if scatterers.is_empty() {
        return Err(SweepError::InvalidConfig("no scatterers".into()));
    }
    cfg.validate()?;
    if let Some(s) = scatterers
        .iter()
        .find(|s| !(s.position.is_finite() && s.amplitude.re.is_finite() && s.amplitude.im.is_finite()))
    {
        return Err(SweepError::InvalidConfig(format!("non-finite scatterer {s:?}")));
    }
    let na = cfg.n_azimuth();
    let freqs = cfg.frequencies();
    let tx = cfg.tx_direction();
    let mut samples = Vec::with_capacity(na * freqs.len() * 2);
    for ia in 0..na {
        let rx = cfg.rx_direction(ia);
        for &f in &freqs {
            let k = kspace_coords(tx, rx, f).k;
            let v: Complex64 = scatterers
                .iter()
                .map(|s| s.amplitude * Complex64::from_polar(1.0, -k.dot(s.position)))
                .sum();
            samples.push(v);
            samples.push(v);
        }
    }
    let json = serde_json::to_vec(scatterers).expect("scatterers serialise");
    let hash = hex::encode(Sha256::digest(&json));
    RunData::new(cfg.clone(), "point-scatterers", &hash, samples)
}

/// A reflection-law lobe direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecularPeak {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub forward: bool,
}

const MERGE_DEG: f64 = 1e-6;

/// Receiver directions of the specular lobes of every illuminated face
/// (grazing faces included) plus the forward lobe `-û_tx`. Coincident
/// directions are merged, the forward flag winning.
pub fn specular_lobes(face_normals: &[Vector3], tx_dir: Vector3) -> Vec<SpecularPeak> {
    let ki = -tx_dir.normalized();
    let as_peak = |d: Vector3, forward: bool| SpecularPeak {
        azimuth_deg: azimuth_of(d),
        elevation_deg: d.z.clamp(-1.0, 1.0).asin().to_degrees(),
        forward,
    };
    let mut out = vec![as_peak(ki, true)];
    for n in face_normals {
        let n = n.normalized();
        if n.dot(tx_dir) < -1e-12 {
            continue;
        }
        let r = ki - n * (2.0 * ki.dot(n));
        let p = as_peak(r, false);
        let same = |q: &SpecularPeak| {
            (q.elevation_deg - p.elevation_deg).abs() < MERGE_DEG && angle_diff_deg(q.azimuth_deg, p.azimuth_deg) < MERGE_DEG
        };
        if !out.iter().any(same) {
            out.push(p);
        }
    }
    out.sort_by(|a, b| a.azimuth_deg.total_cmp(&b.azimuth_deg));
    out
}

/// Receiver azimuths of [`specular_lobes`].
pub fn specular_peaks(face_normals: &[Vector3], tx_dir: Vector3) -> Vec<f64> {
    specular_lobes(face_normals, tx_dir).iter().map(|p| p.azimuth_deg).collect()
}

/// Absolute circular difference of two azimuths, degrees in `[0, 180]`.
pub fn angle_diff_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::direction_from_angles;
    use crate::sweep::Channel;

    #[test]
    fn plate_examples() {
        assert!((plate_rcs_analytic(1.0, 1.0, 1e9) - 21.46).abs() < 5e-3);
        assert!((plate_rcs_analytic(1.0, 1.0, 2e9) - 27.48).abs() < 5e-3);
        assert!((plate_rcs_analytic(2.0, 1.0, 1e9) - 27.48).abs() < 5e-3);
        let lin = 10f64.powf(plate_rcs_analytic(1.0, 1.0, 1e9) / 10.0);
        assert!((lin - 139.8).abs() < 0.05);
    }

    fn small_cfg() -> SweepConfig {
        SweepConfig {
            bandwidth_hz: 150e6,
            rx_azimuth_step_deg: 7.2,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn origin_scatterer_is_constant() {
        let s = [PointScatterer::new(Vector3::ZERO, 2.5)];
        let run = synth_run(&s, &small_cfg()).unwrap();
        assert!(run.samples.iter().all(|v| *v == Complex64::new(2.5, 0.0)));
    }

    #[test]
    fn phase_matches_wavevector() {
        let cfg = small_cfg();
        let r = Vector3::new(1.0, 2.0, 0.0);
        let run = synth_run(&[PointScatterer::new(r, 1.0)], &cfg).unwrap();
        for ia in [0, 13, 49] {
            for jf in [0, 5, 10] {
                let k = kspace_coords(cfg.tx_direction(), cfg.rx_direction(ia), cfg.frequency(jf)).k;
                let v = run.sample(ia, jf, Channel::V);
                assert!((v - Complex64::from_polar(1.0, -k.dot(r))).norm() < 1e-12);
                assert_eq!(v, run.sample(ia, jf, Channel::H));
            }
        }
    }

    #[test]
    fn superposition() {
        let cfg = small_cfg();
        let a = PointScatterer::new(Vector3::new(1.0, 2.0, 0.0), 1.0);
        let b = PointScatterer::new(Vector3::new(-2.0, -1.0, 0.5), 0.5);
        let ra = synth_run(&[a], &cfg).unwrap();
        let rb = synth_run(&[b], &cfg).unwrap();
        let rab = synth_run(&[a, b], &cfg).unwrap();
        for i in 0..rab.samples.len() {
            assert_eq!(rab.samples[i], ra.samples[i] + rb.samples[i]);
        }
        assert!(synth_run(&[], &cfg).is_err());
    }

    fn prism_normals() -> Vec<Vector3> {
        vec![
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(-1.0, 0.0, 0.0),
            Vector3::new(0.0, -1.0, 0.0),
        ]
    }

    #[test]
    fn prism_three_lobes() {
        let p = specular_peaks(&prism_normals(), direction_from_angles(45.0, 0.0));
        assert_eq!(p.len(), 3);
        for (got, want) in p.iter().zip([135.0, 225.0, 315.0]) {
            assert!((got - want).abs() < 1e-9, "{p:?}");
        }
        let lobes = specular_lobes(&prism_normals(), direction_from_angles(45.0, 0.0));
        assert!(lobes.iter().find(|l| l.forward).map(|l| (l.azimuth_deg - 225.0).abs() < 1e-9).unwrap());
    }

    #[test]
    fn broadside_merges_with_forward() {
        // Grazing faces reflect into the forward direction.
        let p = specular_peaks(&prism_normals(), direction_from_angles(0.0, 0.0));
        assert_eq!(p.len(), 2, "{p:?}");
        assert!(p.iter().any(|a| (a - 180.0).abs() < 1e-9));
        assert!(p.iter().any(|a| a.abs() < 1e-9));
    }

    #[test]
    fn unlit_faces_give_forward_only() {
        let p = specular_peaks(&[Vector3::new(-1.0, 0.0, 0.0)], direction_from_angles(0.0, 0.0));
        assert_eq!(p.len(), 1);
        assert!((p[0] - 180.0).abs() < 1e-9);
    }

    #[test]
    fn angle_difference_wraps() {
        assert!((angle_diff_deg(359.0, 1.0) - 2.0).abs() < 1e-12);
        assert!((angle_diff_deg(90.0, 270.0) - 180.0).abs() < 1e-12);
    }
}
