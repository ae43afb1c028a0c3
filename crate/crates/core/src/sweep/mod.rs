//! Data collection for one run: fixed transmitter, receiver swept in
//! azimuth over a stepped-frequency band; run persistence and dataset
//! planning.

mod config;
pub mod container;

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::SweepConfig;
pub use container::ContainerError;

use crate::geometry::Mesh;
use crate::po::{Polarization, PoSolver, SolverError};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("non-finite sample at azimuth index {azimuth}, frequency index {frequency}")]
    NonFinite { azimuth: usize, frequency: usize },
    #[error(transparent)]
    File(#[from] ContainerError),
    #[error("sample grid has {got} values, config requires {expected}")]
    Shape { expected: usize, got: usize },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Receive channel index inside a run cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    H = 0,
    V = 1,
}

impl From<Polarization> for Channel {
    fn from(p: Polarization) -> Self {
        match p {
            Polarization::H => Channel::H,
            Polarization::V => Channel::V,
        }
    }
}

/// Scattered-field samples of one run.
///
/// Samples use the imaging sign convention: an ideal point scatterer at `r`
/// with amplitude `A` contributes `A · exp(-j K·r)`, with
/// `K = (2πf/c)(û_tx + û_rx)`. Physical-optics fields (computed with
/// `exp(+jωt)`) are stored conjugated. Layout is azimuth-major,
/// frequency-minor, channel `E_H` then `E_V`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunData {
    pub config: SweepConfig,
    pub mesh_name: String,
    pub mesh_hash: String,
    /// Unix seconds; `None` keeps the file byte-reproducible.
    pub created_unix: Option<u64>,
    pub samples: Vec<Complex64>,
}

impl RunData {
    pub fn new(
        config: SweepConfig,
        mesh_name: impl Into<String>,
        mesh_hash: impl Into<String>,
        samples: Vec<Complex64>,
    ) -> Result<RunData, SweepError> {
        config.validate()?;
        let expected = config.n_azimuth() * config.n_frequency() * 2;
        if samples.len() != expected {
            return Err(SweepError::Shape {
                expected,
                got: samples.len(),
            });
        }
        Ok(RunData {
            config,
            mesh_name: mesh_name.into(),
            mesh_hash: mesh_hash.into(),
            created_unix: None,
            samples,
        })
    }

    pub fn n_azimuth(&self) -> usize {
        self.config.n_azimuth()
    }

    pub fn n_frequency(&self) -> usize {
        self.config.n_frequency()
    }

    pub fn index(&self, azimuth: usize, frequency: usize, channel: Channel) -> usize {
        (azimuth * self.n_frequency() + frequency) * 2 + channel as usize
    }

    pub fn sample(&self, azimuth: usize, frequency: usize, channel: Channel) -> Complex64 {
        self.samples[self.index(azimuth, frequency, channel)]
    }

    /// Digest over config, geometry hash and sample bits.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&self.config).expect("config serialises"));
        h.update(self.mesh_hash.as_bytes());
        for s in &self.samples {
            h.update(s.re.to_le_bytes());
            h.update(s.im.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub illuminate_calls: usize,
    pub far_field_calls: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    /// Worker threads; 0 uses the global rayon pool.
    pub jobs: usize,
}


pub(crate) fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, String> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| e.to_string())?;
    Ok(pool.install(f))
}

pub fn run_sweep(mesh: &Mesh, cfg: &SweepConfig) -> Result<RunData, SweepError> {
    run_sweep_with(mesh, cfg, SweepOptions::default()).map(|(run, _)| run)
}

/// Currents are computed once per frequency and reused for every receiver
/// azimuth; receiver visibility is computed once per azimuth.
pub fn run_sweep_with(mesh: &Mesh, cfg: &SweepConfig, opts: SweepOptions) -> Result<(RunData, SweepStats), SweepError> {
    cfg.validate()?;
    let solver = PoSolver::new(mesh)?;
    let freqs = cfg.frequencies();
    let azimuths = cfg.rx_azimuths();
    let (nf, na) = (freqs.len(), azimuths.len());
    let illum = AtomicUsize::new(0);
    let ff = AtomicUsize::new(0);

    let work = || -> Result<Vec<Complex64>, SweepError> {
        let currents = freqs
            .par_iter()
            .map(|&f| {
                illum.fetch_add(1, Ordering::Relaxed);
                solver.illuminate(&cfg.excitation(f))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let visibility: Vec<Vec<bool>> = azimuths
            .par_iter()
            .map(|&az| solver.receiver_visibility(az, cfg.rx_elevation_deg))
            .collect();
        let cells = (0..na * nf)
            .into_par_iter()
            .map(|cell| {
                let (ia, jf) = (cell / nf, cell % nf);
                ff.fetch_add(1, Ordering::Relaxed);
                let e = solver.far_field_with_visibility(
                    &currents[jf],
                    freqs[jf],
                    azimuths[ia],
                    cfg.rx_elevation_deg,
                    &visibility[ia],
                )?;
                if !(e.e_h.is_finite() && e.e_v.is_finite()) {
                    return Err(SweepError::NonFinite {
                        azimuth: ia,
                        frequency: jf,
                    });
                }
                Ok([e.e_h.conj(), e.e_v.conj()])
            })
            .collect::<Result<Vec<_>, SweepError>>()?;
        Ok(cells.into_iter().flatten().collect())
    };
    let samples = with_jobs(opts.jobs, work).map_err(SweepError::Pool)??;
    let run = RunData::new(cfg.clone(), mesh.name.clone(), mesh.content_hash(), samples)?;
    let stats = SweepStats {
        illuminate_calls: illum.into_inner(),
        far_field_calls: ff.into_inner(),
    };
    Ok((run, stats))
}

pub const RUN_KIND: &str = "run";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub config: SweepConfig,
    pub mesh_name: String,
    pub mesh_hash: String,
    pub created_unix: Option<u64>,
    /// `[n_azimuth, n_frequency, 2]`.
    pub shape: [usize; 3],
}

impl RunData {
    pub fn header(&self) -> RunHeader {
        RunHeader {
            config: self.config.clone(),
            mesh_name: self.mesh_name.clone(),
            mesh_hash: self.mesh_hash.clone(),
            created_unix: self.created_unix,
            shape: [self.n_azimuth(), self.n_frequency(), 2],
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, SweepError> {
        Ok(container::encode(RUN_KIND, &self.header(), &self.samples)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<RunData, SweepError> {
        let (h, samples): (RunHeader, _) = container::decode(RUN_KIND, bytes)?;
        from_parts(h, samples)
    }
}

fn from_parts(h: RunHeader, samples: Vec<Complex64>) -> Result<RunData, SweepError> {
    let expected = [h.config.n_azimuth(), h.config.n_frequency(), 2];
    if h.shape != expected {
        return Err(SweepError::Shape {
            expected: expected.iter().product(),
            got: h.shape.iter().product(),
        });
    }
    let mut run = RunData::new(h.config, h.mesh_name, h.mesh_hash, samples)?;
    run.created_unix = h.created_unix;
    Ok(run)
}

pub fn save_run(run: &RunData, path: &Path) -> Result<(), SweepError> {
    Ok(container::write_file(path, RUN_KIND, &run.header(), &run.samples)?)
}

pub fn load_run(path: &Path) -> Result<RunData, SweepError> {
    let (h, samples): (RunHeader, _) = container::read_file(path, RUN_KIND)?;
    from_parts(h, samples)
}

/// Header (config, provenance) without reading the sample payload.
pub fn read_run_header(path: &Path) -> Result<RunHeader, SweepError> {
    Ok(container::read_header(path, RUN_KIND)?)
}

/// One planned run: which target, which transmitter geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedRun {
    pub target: String,
    pub config: SweepConfig,
}

/// Transmitter azimuths of the default plan: 24 positions, 15 degrees apart.
pub fn default_tx_azimuths() -> Vec<f64> {
    (0..24).map(|i| i as f64 * 15.0).collect()
}

pub const DEFAULT_ELEVATIONS_DEG: [f64; 2] = [10.0, 15.0];

/// Cartesian product target × polarization × elevation × tx azimuth. The
/// receiver sweeps at the transmitter's elevation.
pub fn plan_dataset(
    targets: &[String],
    tx_azimuths_deg: &[f64],
    elevations_deg: &[f64],
    polarizations: &[Polarization],
    base: &SweepConfig,
) -> Vec<PlannedRun> {
    let mut plan = Vec::with_capacity(targets.len() * tx_azimuths_deg.len() * elevations_deg.len() * polarizations.len());
    for target in targets {
        for &pol in polarizations {
            for &el in elevations_deg {
                for &az in tx_azimuths_deg {
                    plan.push(PlannedRun {
                        target: target.clone(),
                        config: SweepConfig {
                            tx_azimuth_deg: az,
                            tx_elevation_deg: el,
                            rx_elevation_deg: el,
                            tx_polarization: pol,
                            ..base.clone()
                        },
                    });
                }
            }
        }
    }
    plan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_primitive, PrimitiveSpec};

    fn small_cfg() -> SweepConfig {
        SweepConfig {
            bandwidth_hz: 60e6,
            rx_azimuth_step_deg: 30.0,
            ..Default::default()
        }
    }

    #[test]
    fn plan_counts() {
        let t: Vec<String> = vec!["MSL".into()];
        let p = plan_dataset(&t, &default_tx_azimuths(), &DEFAULT_ELEVATIONS_DEG, &[Polarization::H], &SweepConfig::default());
        assert_eq!(p.len(), 48);
        let all: Vec<String> = ["APC", "MBT", "STR", "MSL"].iter().map(|s| s.to_string()).collect();
        let p = plan_dataset(
            &all,
            &default_tx_azimuths(),
            &DEFAULT_ELEVATIONS_DEG,
            &[Polarization::H, Polarization::V],
            &SweepConfig::default(),
        );
        assert_eq!(p.len(), 384);
        assert!(plan_dataset(&[], &default_tx_azimuths(), &[10.0], &[Polarization::H], &SweepConfig::default()).is_empty());
    }

    #[test]
    fn illuminate_once_per_frequency() {
        let m = build_primitive(&PrimitiveSpec::prism(1.0, 1.0, 2.0)).unwrap();
        let cfg = small_cfg();
        let (run, stats) = run_sweep_with(&m, &cfg, SweepOptions { jobs: 2 }).unwrap();
        assert_eq!(stats.illuminate_calls, cfg.n_frequency());
        assert_eq!(stats.far_field_calls, cfg.n_frequency() * cfg.n_azimuth());
        assert_eq!(run.samples.len(), 5 * 12 * 2);
        assert!(run.samples.iter().all(|s| s.is_finite()));
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let m = build_primitive(&PrimitiveSpec::prism(1.0, 2.0, 1.0)).unwrap();
        let cfg = small_cfg();
        let (a, _) = run_sweep_with(&m, &cfg, SweepOptions { jobs: 1 }).unwrap();
        let (b, _) = run_sweep_with(&m, &cfg, SweepOptions { jobs: 5 }).unwrap();
        assert_eq!(a.to_bytes().unwrap(), b.to_bytes().unwrap());
    }

    #[test]
    fn save_load_and_header_only() {
        let m = build_primitive(&PrimitiveSpec::plate(1.0, 1.0)).unwrap();
        let run = run_sweep(&m, &small_cfg()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.bsar");
        save_run(&run, &path).unwrap();
        let back = load_run(&path).unwrap();
        assert_eq!(back, run);
        let header = read_run_header(&path).unwrap();
        assert_eq!(header.config, run.config);
        assert_eq!(header.mesh_hash, m.content_hash());

        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() - 40;
        bytes[mid] ^= 1;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_run(&path), Err(SweepError::File(ContainerError::Checksum { .. }))));
        // header is still readable after payload corruption
        assert!(read_run_header(&path).is_ok());
    }

    #[test]
    fn invalid_config_propagates() {
        let m = build_primitive(&PrimitiveSpec::plate(1.0, 1.0)).unwrap();
        let cfg = SweepConfig {
            frequency_step_hz: 7e6,
            ..small_cfg()
        };
        assert!(matches!(run_sweep(&m, &cfg), Err(SweepError::InvalidConfig(_))));
    }
}
