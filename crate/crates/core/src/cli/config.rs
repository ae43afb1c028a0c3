use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geometry::{Mesh, ObjectSource, SceneSpec};
use crate::imaging::{ClipOptions, KeystoneOptions, Window, DEFAULT_DB_FLOOR};
use crate::po::Polarization;
use crate::sweep::{default_tx_azimuths, Channel, SweepConfig, DEFAULT_ELEVATIONS_DEG};

/// JSON Schema for [`ProjectConfig`].
pub const PROJECT_SCHEMA: &str = include_str!("../../schema/project.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub scene: SceneSpec,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub imaging: ImagingConfig,
    #[serde(default)]
    pub rcs: RcsConfig,
    #[serde(default)]
    pub shadowmap: ShadowMapConfig,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelChoice {
    /// Receive polarization equal to the transmit polarization.
    #[default]
    Co,
    Cross,
    H,
    V,
}

impl ChannelChoice {
    pub fn resolve(self, tx: Polarization) -> Channel {
        match (self, tx) {
            (ChannelChoice::H, _) => Channel::H,
            (ChannelChoice::V, _) => Channel::V,
            (ChannelChoice::Co, p) => p.into(),
            (ChannelChoice::Cross, Polarization::H) => Channel::V,
            (ChannelChoice::Cross, Polarization::V) => Channel::H,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RasterFormat {
    #[default]
    Png,
    Pgm,
}

impl RasterFormat {
    pub fn extension(self) -> &'static str {
        match self {
            RasterFormat::Png => "png",
            RasterFormat::Pgm => "pgm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImagingConfig {
    pub swath_deg: f64,
    pub stride: usize,
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub db_floor: f64,
    pub channel: ChannelChoice,
    pub format: RasterFormat,
    /// Also write the complex image of every clip.
    pub save_complex: bool,
}

impl Default for ImagingConfig {
    fn default() -> Self {
        ImagingConfig {
            swath_deg: 36.0,
            stride: 10,
            window: Window::Rectangular,
            nx: 128,
            ny: 128,
            db_floor: DEFAULT_DB_FLOOR,
            channel: ChannelChoice::Co,
            format: RasterFormat::Png,
            save_complex: false,
        }
    }
}

impl ImagingConfig {
    pub fn clip_options(&self, tx: Polarization) -> ClipOptions {
        ClipOptions {
            channel: self.channel.resolve(tx),
            window: self.window,
            keystone: KeystoneOptions {
                nx: self.nx,
                ny: self.ny,
                ..KeystoneOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RcsConfig {
    pub frequency_hz: f64,
    pub tx_azimuth_deg: f64,
    pub tx_elevation_deg: f64,
    pub polarization: Polarization,
    pub rx_elevation_deg: f64,
    pub rx_azimuth_step_deg: f64,
    pub peak_prominence_db: f64,
}

impl Default for RcsConfig {
    fn default() -> Self {
        RcsConfig {
            frequency_hz: 1e9,
            tx_azimuth_deg: 45.0,
            tx_elevation_deg: 0.0,
            polarization: Polarization::V,
            rx_elevation_deg: 0.0,
            rx_azimuth_step_deg: 0.72,
            peak_prominence_db: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShadowMapConfig {
    pub frequency_hz: f64,
    pub tx_azimuth_deg: f64,
    pub tx_elevation_deg: f64,
    pub polarization: Polarization,
    /// Mesh part whose currents are mapped.
    pub ground_part: String,
}

impl Default for ShadowMapConfig {
    fn default() -> Self {
        ShadowMapConfig {
            frequency_hz: 1e9,
            tx_azimuth_deg: 0.0,
            tx_elevation_deg: 10.0,
            polarization: Polarization::V,
            ground_part: "ground".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetTarget {
    pub name: String,
    pub scene: SceneSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// Targets to simulate; the project scene alone when empty.
    pub targets: Vec<DatasetTarget>,
    pub tx_azimuths_deg: Vec<f64>,
    pub elevations_deg: Vec<f64>,
    pub polarizations: Vec<Polarization>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            targets: Vec::new(),
            tx_azimuths_deg: default_tx_azimuths(),
            elevations_deg: DEFAULT_ELEVATIONS_DEG.to_vec(),
            polarizations: vec![Polarization::H, Polarization::V],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

/// Configuration problem, reported with the JSON path of the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// A parsed config plus the directory relative paths resolve against.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: ProjectConfig,
    pub base_dir: PathBuf,
}

pub fn parse_config(text: &str) -> Result<ProjectConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ProjectConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<root>".to_string() } else { path };
        ConfigError::new(path, e.inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("--config", format!("cannot read {}: {e}", path.display())))?;
    let config = parse_config(&text)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { config, base_dir })
}

fn check_scene(scene: &SceneSpec, at: &str) -> Result<(), ConfigError> {
    if scene.objects.is_empty() {
        return Err(ConfigError::new(format!("{at}.objects"), "scene has no objects"));
    }
    Ok(())
}

impl ProjectConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check_scene(&self.scene, "scene")?;
        self.sweep
            .validate()
            .map_err(|e| ConfigError::new("sweep", e.to_string()))?;
        let im = &self.imaging;
        if im.stride == 0 {
            return Err(ConfigError::new("imaging.stride", "must be at least 1"));
        }
        crate::imaging::swath_columns(im.swath_deg, self.sweep.rx_azimuth_step_deg)
            .map_err(|e| ConfigError::new("imaging.swath_deg", e.to_string()))?;
        if im.nx < 2 || im.ny < 2 {
            return Err(ConfigError::new("imaging.nx", "grid must be at least 2x2"));
        }
        if !(im.db_floor < 0.0) {
            return Err(ConfigError::new("imaging.db_floor", "must be negative"));
        }
        let r = &self.rcs;
        if !(r.frequency_hz > 0.0) {
            return Err(ConfigError::new("rcs.frequency_hz", "must be positive"));
        }
        if !(r.rx_azimuth_step_deg > 0.0) {
            return Err(ConfigError::new("rcs.rx_azimuth_step_deg", "must be positive"));
        }
        if !(self.shadowmap.frequency_hz > 0.0) {
            return Err(ConfigError::new("shadowmap.frequency_hz", "must be positive"));
        }
        for (i, t) in self.dataset.targets.iter().enumerate() {
            check_scene(&t.scene, &format!("dataset.targets[{i}].scene"))?;
            if t.name.is_empty() || t.name.contains(['/', '\\']) || t.name.starts_with('.') {
                return Err(ConfigError::new(
                    format!("dataset.targets[{i}].name"),
                    "must be a plain directory name",
                ));
            }
        }
        for (field, empty) in [
            ("dataset.tx_azimuths_deg", self.dataset.tx_azimuths_deg.is_empty()),
            ("dataset.elevations_deg", self.dataset.elevations_deg.is_empty()),
            ("dataset.polarizations", self.dataset.polarizations.is_empty()),
        ] {
            if empty {
                return Err(ConfigError::new(field, "must not be empty"));
            }
        }
        Ok(())
    }
}

/// Builds a scene mesh, naming the config field of any unreadable mesh file.
pub fn build_scene(scene: &SceneSpec, base_dir: &Path, at: &str) -> Result<Mesh, ConfigError> {
    for (i, obj) in scene.objects.iter().enumerate() {
        if let ObjectSource::MeshFile(p) = &obj.source {
            let full = base_dir.join(p);
            if !full.is_file() {
                return Err(ConfigError::new(
                    format!("{at}.objects[{i}].mesh_file"),
                    format!("mesh file not found: {}", full.display()),
                ));
            }
        }
    }
    scene
        .build(base_dir)
        .map_err(|e| ConfigError::new(format!("{at}.objects"), e.to_string()))
}
