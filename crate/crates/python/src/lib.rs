use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use sarforge_core::geometry::{SceneSpec, Vector3};
use sarforge_core::imaging::{image_patch, ClipOptions, KeystoneOptions, SarImage, Window};
use sarforge_core::oracle::{find_peaks_with, plate_rcs_analytic, synth_run, PointScatterer};
use sarforge_core::po::{bistatic_rcs_sweep, PlaneWaveExcitation, Polarization};
use sarforge_core::sweep::{load_run, run_sweep, save_run, Channel, RunData, SweepConfig};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn scene(json: &str) -> PyResult<sarforge_core::geometry::Mesh> {
    let spec: SceneSpec = serde_json::from_str(json).map_err(value_err)?;
    spec.build(std::path::Path::new(".")).map_err(value_err)
}

fn sweep_config(json: Option<&str>) -> PyResult<SweepConfig> {
    let cfg: SweepConfig = match json {
        Some(j) => serde_json::from_str(j).map_err(value_err)?,
        None => SweepConfig::default(),
    };
    cfg.validate().map_err(value_err)?;
    Ok(cfg)
}

/// Swept scattered-field data for one transmitter position.
#[pyclass(name = "Run", frozen)]
struct PyRun(RunData);

#[pymethods]
impl PyRun {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        load_run(&path).map(PyRun).map_err(runtime_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_run(&self.0, &path).map_err(runtime_err)
    }

    #[getter]
    fn n_azimuth(&self) -> usize {
        self.0.n_azimuth()
    }

    #[getter]
    fn n_frequency(&self) -> usize {
        self.0.n_frequency()
    }

    #[getter]
    fn mesh_name(&self) -> &str {
        &self.0.mesh_name
    }

    #[getter]
    fn config_json(&self) -> String {
        serde_json::to_string(&self.0.config).expect("config serialises")
    }

    fn content_hash(&self) -> String {
        self.0.content_hash()
    }

    #[pyo3(signature = (azimuth, frequency, channel = "H"))]
    fn sample(&self, azimuth: usize, frequency: usize, channel: &str) -> PyResult<Complex64> {
        if azimuth >= self.0.n_azimuth() || frequency >= self.0.n_frequency() {
            return Err(value_err(format!("index ({azimuth}, {frequency}) out of range")));
        }
        Ok(self.0.sample(azimuth, frequency, parse_channel(channel)?))
    }

    /// Image clip starting at azimuth index `start`.
    #[pyo3(signature = (start, swath_deg = 36.0, channel = "H", window = "rectangular", nx = 128, ny = 128))]
    fn image(&self, start: usize, swath_deg: f64, channel: &str, window: &str, nx: usize, ny: usize) -> PyResult<PyImage> {
        let opts = ClipOptions {
            channel: parse_channel(channel)?,
            window: window.parse::<Window>().map_err(value_err)?,
            keystone: KeystoneOptions {
                nx,
                ny,
                ..KeystoneOptions::default()
            },
        };
        image_patch(&self.0, start, swath_deg, &opts).map(PyImage).map_err(runtime_err)
    }
}

fn parse_channel(s: &str) -> PyResult<Channel> {
    match s {
        "H" | "h" => Ok(Channel::H),
        "V" | "v" => Ok(Channel::V),
        _ => Err(value_err(format!("unknown channel {s:?}; expected H or V"))),
    }
}

/// Complex SAR image clip.
#[pyclass(name = "Image", frozen)]
struct PyImage(SarImage);

#[pymethods]
impl PyImage {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        SarImage::load(&path).map(PyImage).map_err(runtime_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.0.save(&path).map_err(runtime_err)
    }

    #[getter]
    fn nx(&self) -> usize {
        self.0.nx()
    }

    #[getter]
    fn ny(&self) -> usize {
        self.0.ny()
    }

    #[getter]
    fn dx_m(&self) -> f64 {
        self.0.meta.dx_m
    }

    #[getter]
    fn dy_m(&self) -> f64 {
        self.0.meta.dy_m
    }

    #[getter]
    fn beta_mean_deg(&self) -> f64 {
        self.0.meta.beta_mean_deg
    }

    #[getter]
    fn range_axis_deg(&self) -> f64 {
        self.0.meta.range_axis_deg
    }

    /// Pixels as `nx` rows of `ny` complex values.
    fn pixels(&self) -> Vec<Vec<Complex64>> {
        self.0.pixels.chunks(self.0.ny()).map(<[Complex64]>::to_vec).collect()
    }

    #[pyo3(signature = (floor_db = -40.0))]
    fn magnitude_db(&self, floor_db: f64) -> Vec<Vec<f64>> {
        let ny = self.0.ny();
        self.0.magnitude_db(floor_db).chunks(ny).map(<[f64]>::to_vec).collect()
    }

    /// Strongest maxima as `(x_m, y_m, amplitude_db)`.
    #[pyo3(signature = (exclusion_px = 3.0, floor_db = -40.0, max_peaks = 10))]
    fn peaks(&self, exclusion_px: f64, floor_db: f64, max_peaks: usize) -> Vec<(f64, f64, f64)> {
        find_peaks_with(&self.0, exclusion_px, floor_db, max_peaks)
            .into_iter()
            .map(|p| (p.x_m, p.y_m, p.amplitude_db))
            .collect()
    }

    #[pyo3(signature = (path, floor_db = -40.0))]
    fn write_png(&self, path: PathBuf, floor_db: f64) -> PyResult<()> {
        self.0.write_png(&path, floor_db).map_err(runtime_err)
    }
}

/// Physical-optics sweep of a JSON scene description.
#[pyfunction]
#[pyo3(signature = (scene_json, sweep_json = None))]
fn sweep(py: Python<'_>, scene_json: &str, sweep_json: Option<&str>) -> PyResult<PyRun> {
    let mesh = scene(scene_json)?;
    let cfg = sweep_config(sweep_json)?;
    py.detach(|| run_sweep(&mesh, &cfg)).map(PyRun).map_err(runtime_err)
}

/// Analytic point-scatterer run; scatterers are `(x, y, z, amplitude)`.
#[pyfunction]
#[pyo3(signature = (scatterers, sweep_json = None))]
fn point_run(scatterers: Vec<(f64, f64, f64, f64)>, sweep_json: Option<&str>) -> PyResult<PyRun> {
    let cfg = sweep_config(sweep_json)?;
    let s: Vec<PointScatterer> = scatterers
        .into_iter()
        .map(|(x, y, z, a)| PointScatterer::new(Vector3::new(x, y, z), a))
        .collect();
    synth_run(&s, &cfg).map(PyRun).map_err(runtime_err)
}

/// Bistatic RCS in dBsm (co-polar) at each receiver azimuth.
#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(signature = (scene_json, frequency_hz, tx_azimuth_deg, tx_elevation_deg, rx_elevation_deg, rx_azimuths_deg, polarization = "V"))]
fn bistatic_rcs(
    py: Python<'_>,
    scene_json: &str,
    frequency_hz: f64,
    tx_azimuth_deg: f64,
    tx_elevation_deg: f64,
    rx_elevation_deg: f64,
    rx_azimuths_deg: Vec<f64>,
    polarization: &str,
) -> PyResult<Vec<f64>> {
    let mesh = scene(scene_json)?;
    let pol: Polarization = polarization.parse().map_err(value_err)?;
    let exc = PlaneWaveExcitation::new(frequency_hz, tx_azimuth_deg, tx_elevation_deg, pol);
    let s = py
        .detach(|| bistatic_rcs_sweep(&mesh, &exc, rx_elevation_deg, &rx_azimuths_deg))
        .map_err(runtime_err)?;
    Ok(s.into_iter().map(|s| s.sigma_dbsm).collect())
}

/// Broadside RCS of an `a` x `b` metre flat plate, dBsm.
#[pyfunction]
fn plate_rcs(a_m: f64, b_m: f64, frequency_hz: f64) -> f64 {
    plate_rcs_analytic(a_m, b_m, frequency_hz)
}

/// Runs the command-line front end with `args` (without the program name)
/// and returns its exit code.
#[pyfunction]
fn cli(py: Python<'_>, args: Vec<String>) -> i32 {
    let argv: Vec<String> = std::iter::once("sarforge".to_string()).chain(args).collect();
    py.detach(|| sarforge_core::cli::main_with_args(argv))
}

#[pymodule]
fn sarforge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyRun>()?;
    m.add_class::<PyImage>()?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(point_run, m)?)?;
    m.add_function(wrap_pyfunction!(bistatic_rcs, m)?)?;
    m.add_function(wrap_pyfunction!(plate_rcs, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    Ok(())
}
