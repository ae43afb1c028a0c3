use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::phase::facet_phase_integral;
use super::raytrace::Occluder;
use super::SolverError;
use crate::geometry::{direction_from_angles, horizontal_unit, vertical_unit, Mesh, Vector3};
use crate::{wavenumber, FREE_SPACE_IMPEDANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    /// Horizontal, along φ̂.
    H,
    /// Vertical, along r̂ × φ̂ (points up above the horizon).
    V,
}

impl Polarization {
    pub fn label(self) -> &'static str {
        match self {
            Polarization::H => "H",
            Polarization::V => "V",
        }
    }

    pub fn unit(self, azimuth_deg: f64, elevation_deg: f64) -> Vector3 {
        match self {
            Polarization::H => horizontal_unit(azimuth_deg),
            Polarization::V => vertical_unit(azimuth_deg, elevation_deg),
        }
    }
}

impl std::str::FromStr for Polarization {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "H" | "h" => Ok(Polarization::H),
            "V" | "v" => Ok(Polarization::V),
            _ => Err(format!("unknown polarization {s:?} (expected H or V)")),
        }
    }
}

/// Incident plane wave arriving from the transmitter direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveExcitation {
    pub frequency_hz: f64,
    pub tx_azimuth_deg: f64,
    pub tx_elevation_deg: f64,
    pub polarization: Polarization,
    /// Incident electric field amplitude, V/m.
    pub amplitude: f64,
}

impl PlaneWaveExcitation {
    pub fn new(frequency_hz: f64, tx_azimuth_deg: f64, tx_elevation_deg: f64, polarization: Polarization) -> Self {
        PlaneWaveExcitation {
            frequency_hz,
            tx_azimuth_deg,
            tx_elevation_deg,
            polarization,
            amplitude: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.frequency_hz > 0.0 && self.frequency_hz.is_finite()) {
            return Err(SolverError::InvalidExcitation(format!(
                "frequency must be positive, got {}",
                self.frequency_hz
            )));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(SolverError::InvalidExcitation(format!(
                "amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        if !(-90.0..=90.0).contains(&self.tx_elevation_deg) || !self.tx_azimuth_deg.is_finite() {
            return Err(SolverError::InvalidExcitation(format!(
                "bad transmitter angles ({}, {})",
                self.tx_azimuth_deg, self.tx_elevation_deg
            )));
        }
        Ok(())
    }

    /// Unit vector from the scene origin toward the transmitter.
    pub fn tx_direction(&self) -> Vector3 {
        direction_from_angles(self.tx_azimuth_deg, self.tx_elevation_deg)
    }

    /// Incident magnetic field vector at the origin, A/m.
    pub fn h_field(&self) -> Vector3 {
        let e = self.polarization.unit(self.tx_azimuth_deg, self.tx_elevation_deg) * self.amplitude;
        (-self.tx_direction()).cross(e) / FREE_SPACE_IMPEDANCE
    }
}

/// Complex 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CVector3 {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
}

impl CVector3 {
    pub const ZERO: CVector3 = CVector3 {
        x: Complex64::new(0.0, 0.0),
        y: Complex64::new(0.0, 0.0),
        z: Complex64::new(0.0, 0.0),
    };

    pub fn scaled(v: Vector3, c: Complex64) -> Self {
        CVector3 {
            x: c * v.x,
            y: c * v.y,
            z: c * v.z,
        }
    }

    pub fn dot_real(&self, v: Vector3) -> Complex64 {
        self.x * v.x + self.y * v.y + self.z * v.z
    }

    pub fn norm(&self) -> f64 {
        (self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()).sqrt()
    }
}

/// Physical-optics surface currents for one excitation.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentMap {
    pub excitation: PlaneWaveExcitation,
    pub lit: Vec<bool>,
    /// Current density at each facet centroid, A/m (incident phase included).
    pub current: Vec<CVector3>,
    /// Origin-referenced current amplitude `2 n̂ × H_inc`, real, A/m.
    pub density: Vec<Vector3>,
}

impl CurrentMap {
    pub fn frequency_hz(&self) -> f64 {
        self.excitation.frequency_hz
    }

    pub fn lit_count(&self) -> usize {
        self.lit.iter().filter(|&&l| l).count()
    }

    /// CSV rows: facet index, centroid, Re/Im of J components, lit flag.
    pub fn to_csv(&self, mesh: &Mesh) -> String {
        let mut s = String::from("facet,cx,cy,cz,jx_re,jx_im,jy_re,jy_im,jz_re,jz_im,j_abs,lit\n");
        for (i, f) in mesh.facets().iter().enumerate() {
            let j = &self.current[i];
            let _ = writeln!(
                s,
                "{i},{},{},{},{},{},{},{},{},{},{},{}",
                f.centroid.x,
                f.centroid.y,
                f.centroid.z,
                j.x.re,
                j.x.im,
                j.y.re,
                j.y.im,
                j.z.re,
                j.z.im,
                j.norm(),
                u8::from(self.lit[i])
            );
        }
        s
    }
}

/// Range-normalised far field (`lim r·E`, volts) in the receiver H/V basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub e_h: Complex64,
    pub e_v: Complex64,
    pub rx_azimuth_deg: f64,
    pub rx_elevation_deg: f64,
    pub frequency_hz: f64,
}

impl FieldSample {
    pub fn channel(&self, pol: Polarization) -> Complex64 {
        match pol {
            Polarization::H => self.e_h,
            Polarization::V => self.e_v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcsSample {
    /// Co-polarised bistatic RCS, dBsm.
    pub sigma_dbsm: f64,
    /// Cross-polarised bistatic RCS, dBsm.
    pub sigma_cross_dbsm: f64,
    pub rx_azimuth_deg: f64,
    pub rx_elevation_deg: f64,
}

/// Floor applied when converting a zero cross-section to dBsm.
pub const DBSM_FLOOR: f64 = -300.0;

/// `10 log10(4π |E_s|² / |E_inc|²)`.
pub fn sigma_dbsm(scattered: Complex64, incident_amplitude: f64) -> f64 {
    let sigma = 4.0 * std::f64::consts::PI * scattered.norm_sqr() / (incident_amplitude * incident_amplitude);
    if sigma > 0.0 {
        (10.0 * sigma.log10()).max(DBSM_FLOOR)
    } else {
        DBSM_FLOOR
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Drop facets whose front face sees the receiver through other
    /// geometry. Facets radiating into their back half-space are kept; they
    /// carry the forward-scatter (shadow-forming) field.
    pub receiver_occlusion: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            receiver_occlusion: true,
        }
    }
}

/// Mesh plus occlusion structure, reusable across excitations and receivers.
#[derive(Debug, Clone)]
pub struct PoSolver<'m> {
    mesh: &'m Mesh,
    occluder: Occluder,
    pub options: SolverOptions,
}

impl<'m> PoSolver<'m> {
    pub fn new(mesh: &'m Mesh) -> Result<Self, SolverError> {
        Self::with_options(mesh, SolverOptions::default())
    }

    pub fn with_options(mesh: &'m Mesh, options: SolverOptions) -> Result<Self, SolverError> {
        if mesh.is_empty() {
            return Err(SolverError::EmptyMesh);
        }
        Ok(PoSolver {
            mesh,
            occluder: Occluder::new(mesh),
            options,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    /// Lit test toward the transmitter plus `J = 2 n̂ × H_inc` on lit facets.
    pub fn illuminate(&self, exc: &PlaneWaveExcitation) -> Result<CurrentMap, SolverError> {
        exc.validate()?;
        let u_tx = exc.tx_direction();
        let h0 = exc.h_field();
        let k = wavenumber(exc.frequency_hz);
        let n = self.mesh.facets().len();
        let mut lit = vec![false; n];
        let mut density = vec![Vector3::ZERO; n];
        let mut current = vec![CVector3::ZERO; n];
        for (i, f) in self.mesh.facets().iter().enumerate() {
            if f.normal.dot(u_tx) <= 0.0 {
                continue;
            }
            if self.occluder.occluded(f.centroid, u_tx, Some(i)) {
                continue;
            }
            lit[i] = true;
            let j = f.normal.cross(h0) * 2.0;
            density[i] = j;
            current[i] = CVector3::scaled(j, Complex64::from_polar(1.0, k * u_tx.dot(f.centroid)));
        }
        Ok(CurrentMap {
            excitation: *exc,
            lit,
            current,
            density,
        })
    }

    /// Per-facet flag: may this facet radiate toward the receiver?
    pub fn receiver_visibility(&self, rx_azimuth_deg: f64, rx_elevation_deg: f64) -> Vec<bool> {
        let u_rx = direction_from_angles(rx_azimuth_deg, rx_elevation_deg);
        self.mesh
            .facets()
            .iter()
            .enumerate()
            .map(|(i, f)| {
                !self.options.receiver_occlusion
                    || f.normal.dot(u_rx) <= 0.0
                    || !self.occluder.occluded(f.centroid, u_rx, Some(i))
            })
            .collect()
    }

    pub fn far_field(
        &self,
        currents: &CurrentMap,
        frequency_hz: f64,
        rx_azimuth_deg: f64,
        rx_elevation_deg: f64,
    ) -> Result<FieldSample, SolverError> {
        let vis = self.receiver_visibility(rx_azimuth_deg, rx_elevation_deg);
        self.far_field_with_visibility(currents, frequency_hz, rx_azimuth_deg, rx_elevation_deg, &vis)
    }

    /// Radiation integral `(-jkη/4π) Σ J_t ∫ exp(j k (û_tx+û_rx)·r) dA`,
    /// summed in facet-index order.
    pub fn far_field_with_visibility(
        &self,
        currents: &CurrentMap,
        frequency_hz: f64,
        rx_azimuth_deg: f64,
        rx_elevation_deg: f64,
        visible: &[bool],
    ) -> Result<FieldSample, SolverError> {
        let n = self.mesh.facets().len();
        if currents.lit.len() != n {
            return Err(SolverError::MeshMismatch {
                expected: n,
                got: currents.lit.len(),
            });
        }
        if currents.frequency_hz() != frequency_hz {
            return Err(SolverError::FrequencyMismatch {
                currents_hz: currents.frequency_hz(),
                requested_hz: frequency_hz,
            });
        }
        let k = wavenumber(frequency_hz);
        let u_tx = currents.excitation.tx_direction();
        let u_rx = direction_from_angles(rx_azimuth_deg, rx_elevation_deg);
        let h_rx = horizontal_unit(rx_azimuth_deg);
        let v_rx = vertical_unit(rx_azimuth_deg, rx_elevation_deg);
        let q = (u_tx + u_rx) * k;
        let mut sum_h = Complex64::new(0.0, 0.0);
        let mut sum_v = Complex64::new(0.0, 0.0);
        for i in 0..n {
            if !currents.lit[i] || !visible[i] {
                continue;
            }
            let j = currents.density[i];
            // φ̂ and v̂ are transverse to r̂, so J·φ̂ = J_t·φ̂.
            let (jh, jv) = (j.dot(h_rx), j.dot(v_rx));
            if jh == 0.0 && jv == 0.0 {
                continue;
            }
            let integral = facet_phase_integral(&self.mesh.facet_vertices(i), q);
            sum_h += integral * jh;
            sum_v += integral * jv;
        }
        let prefactor = Complex64::new(0.0, -k * FREE_SPACE_IMPEDANCE / (4.0 * std::f64::consts::PI));
        Ok(FieldSample {
            e_h: prefactor * sum_h,
            e_v: prefactor * sum_v,
            rx_azimuth_deg,
            rx_elevation_deg,
            frequency_hz,
        })
    }

    pub fn bistatic_rcs_sweep(
        &self,
        exc: &PlaneWaveExcitation,
        rx_elevation_deg: f64,
        rx_azimuths_deg: &[f64],
    ) -> Result<Vec<RcsSample>, SolverError> {
        if rx_azimuths_deg.is_empty() {
            return Err(SolverError::EmptySweep);
        }
        let currents = self.illuminate(exc)?;
        let co = exc.polarization;
        let cross = match co {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        };
        rx_azimuths_deg
            .par_iter()
            .map(|&az| {
                let e = self.far_field(&currents, exc.frequency_hz, az, rx_elevation_deg)?;
                Ok(RcsSample {
                    sigma_dbsm: sigma_dbsm(e.channel(co), exc.amplitude),
                    sigma_cross_dbsm: sigma_dbsm(e.channel(cross), exc.amplitude),
                    rx_azimuth_deg: az,
                    rx_elevation_deg,
                })
            })
            .collect()
    }
}

pub fn illuminate(mesh: &Mesh, exc: &PlaneWaveExcitation) -> Result<CurrentMap, SolverError> {
    PoSolver::new(mesh)?.illuminate(exc)
}

pub fn far_field(
    mesh: &Mesh,
    currents: &CurrentMap,
    frequency_hz: f64,
    rx_azimuth_deg: f64,
    rx_elevation_deg: f64,
) -> Result<FieldSample, SolverError> {
    PoSolver::new(mesh)?.far_field(currents, frequency_hz, rx_azimuth_deg, rx_elevation_deg)
}

pub fn bistatic_rcs_sweep(
    mesh: &Mesh,
    exc: &PlaneWaveExcitation,
    rx_elevation_deg: f64,
    rx_azimuths_deg: &[f64],
) -> Result<Vec<RcsSample>, SolverError> {
    PoSolver::new(mesh)?.bistatic_rcs_sweep(exc, rx_elevation_deg, rx_azimuths_deg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_primitive, build_target, DetailLevel, PrimitiveSpec, TargetKind};
    use crate::oracle::plate_rcs_analytic;

    fn plate() -> Mesh {
        build_primitive(&PrimitiveSpec::plate(1.0, 1.0)).unwrap()
    }

    #[test]
    fn normal_incidence_plate_is_fully_lit() {
        let m = plate();
        for pol in [Polarization::H, Polarization::V] {
            let exc = PlaneWaveExcitation::new(1e9, 30.0, 90.0, pol);
            let cur = illuminate(&m, &exc).unwrap();
            let h = exc.h_field().norm();
            assert!(cur.lit.iter().all(|&l| l));
            for j in &cur.current {
                assert!((j.norm() - 2.0 * h).abs() <= 1e-12 * h);
            }
        }
    }

    #[test]
    fn prism_back_faces_unlit() {
        let m = build_primitive(&PrimitiveSpec::prism(1.0, 1.0, 10.0)).unwrap();
        let exc = PlaneWaveExcitation::new(1e9, 45.0, 0.0, Polarization::H);
        let cur = illuminate(&m, &exc).unwrap();
        for (i, f) in m.facets().iter().enumerate() {
            let facing_back = f.normal.x < -0.5 || f.normal.y < -0.5;
            let side_front = f.normal.x > 0.5 || f.normal.y > 0.5;
            if facing_back || f.normal.z.abs() > 0.5 {
                assert!(!cur.lit[i]);
                assert_eq!(cur.current[i], CVector3::ZERO);
            }
            if side_front {
                assert!(cur.lit[i]);
            }
        }
        assert_eq!(cur.lit_count(), 4);
    }

    #[test]
    fn broadside_plate_matches_closed_form() {
        let m = plate();
        let exc = PlaneWaveExcitation::new(1e9, 0.0, 90.0, Polarization::H);
        let s = bistatic_rcs_sweep(&m, &exc, 90.0, &[0.0]).unwrap();
        let analytic = plate_rcs_analytic(1.0, 1.0, 1e9);
        assert!((s[0].sigma_dbsm - analytic).abs() < 1e-9, "{} vs {analytic}", s[0].sigma_dbsm);
        assert!((analytic - 21.46).abs() < 0.005);
    }

    #[test]
    fn field_is_linear_in_amplitude() {
        let m = build_target(TargetKind::Apc, DetailLevel::Coarse);
        let mut exc = PlaneWaveExcitation::new(0.9e9, 20.0, 15.0, Polarization::V);
        let s = PoSolver::new(&m).unwrap();
        let a = s.far_field(&s.illuminate(&exc).unwrap(), 0.9e9, 50.0, 15.0).unwrap();
        exc.amplitude = 2.0;
        let b = s.far_field(&s.illuminate(&exc).unwrap(), 0.9e9, 50.0, 15.0).unwrap();
        assert_eq!(b.e_h, a.e_h * 2.0);
        assert_eq!(b.e_v, a.e_v * 2.0);
    }

    #[test]
    fn frequency_mismatch_rejected() {
        let m = plate();
        let exc = PlaneWaveExcitation::new(1e9, 0.0, 45.0, Polarization::H);
        let cur = illuminate(&m, &exc).unwrap();
        assert!(matches!(
            far_field(&m, &cur, 1.1e9, 0.0, 45.0),
            Err(SolverError::FrequencyMismatch { .. })
        ));
    }

    #[test]
    fn empty_mesh_and_bad_excitation() {
        let empty = Mesh::new("e", vec![], vec![]).unwrap();
        let exc = PlaneWaveExcitation::new(1e9, 0.0, 45.0, Polarization::H);
        assert_eq!(illuminate(&empty, &exc).unwrap_err(), SolverError::EmptyMesh);
        let mut bad = exc;
        bad.amplitude = 0.0;
        assert!(illuminate(&plate(), &bad).is_err());
        assert_eq!(
            bistatic_rcs_sweep(&plate(), &exc, 0.0, &[]).unwrap_err(),
            SolverError::EmptySweep
        );
    }

    #[test]
    fn currents_are_tangential() {
        let m = build_target(TargetKind::Str, DetailLevel::Coarse);
        for pol in [Polarization::H, Polarization::V] {
            let exc = PlaneWaveExcitation::new(1e9, 123.0, 25.0, pol);
            let cur = illuminate(&m, &exc).unwrap();
            for (i, f) in m.facets().iter().enumerate() {
                if cur.lit[i] {
                    let jn = cur.current[i].dot_real(f.normal).norm();
                    assert!(jn <= 1e-10 * cur.current[i].norm());
                } else {
                    assert_eq!(cur.current[i], CVector3::ZERO);
                }
            }
        }
    }

    #[test]
    fn csv_has_row_per_facet() {
        let m = plate();
        let exc = PlaneWaveExcitation::new(1e9, 0.0, 45.0, Polarization::H);
        let csv = illuminate(&m, &exc).unwrap().to_csv(&m);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("facet,cx,cy,cz"));
        assert!(lines[1].ends_with(",1"));
    }
}
