use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{ImagingError, ResampledGrid};
use crate::sweep::container::{self, ContainerError};
use crate::sweep::Channel;

pub const IMAGE_KIND: &str = "image";
pub const DEFAULT_DB_FLOOR: f64 = -40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Rectangular,
    #[serde(alias = "hann")]
    RaisedCosine,
}

impl Window {
    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::RaisedCosine => (0..n)
                .map(|i| (std::f64::consts::PI * (i as f64 + 0.5) / n as f64).sin().powi(2))
                .collect(),
        }
    }
}

impl std::str::FromStr for Window {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "rectangular" | "rect" | "none" => Ok(Window::Rectangular),
            "raised_cosine" | "hann" | "cosine" => Ok(Window::RaisedCosine),
            _ => Err(format!("unknown window '{s}'")),
        }
    }
}

/// Provenance and geometry of a formed image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMeta {
    pub nx: usize,
    pub ny: usize,
    /// Cross-range pixel size, metres.
    pub dx_m: f64,
    /// Range pixel size, metres.
    pub dy_m: f64,
    /// Azimuth of the range axis in the scene, degrees.
    pub range_axis_deg: f64,
    pub beta_mean_deg: f64,
    pub window: Window,
    pub channel: Channel,
    pub start_index: usize,
    pub swath_deg: f64,
    pub support_cells: usize,
}

/// Complex image, pixels stored `[ix * ny + iy]`. Pixel `(nx/2, ny/2)` is the
/// scene origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SarImage {
    pub meta: ImageMeta,
    pub pixels: Vec<Complex64>,
}

fn fft_2d(data: &mut [Complex64], nx: usize, ny: usize) {
    let mut planner = FftPlanner::<f64>::new();
    let fy = planner.plan_fft_inverse(ny);
    for row in data.chunks_exact_mut(ny) {
        fy.process(row);
    }
    let fx = planner.plan_fft_inverse(nx);
    let mut col = vec![Complex64::new(0.0, 0.0); nx];
    for iy in 0..ny {
        for ix in 0..nx {
            col[ix] = data[ix * ny + iy];
        }
        fx.process(&mut col);
        for ix in 0..nx {
            data[ix * ny + iy] = col[ix];
        }
    }
}

/// Window the support, zero-pad to `nx` x `ny` and apply a unitary 2-D
/// inverse FFT.
pub fn form_image(grid: &ResampledGrid, window: Window, nx: usize, ny: usize) -> Result<SarImage, ImagingError> {
    if nx < grid.nx || ny < grid.ny {
        return Err(ImagingError::InvalidGrid(format!(
            "image {nx}x{ny} smaller than grid {}x{}",
            grid.nx, grid.ny
        )));
    }
    let (x0, x1, y0, y1) = grid
        .support_bounds()
        .ok_or(ImagingError::InvalidGrid("grid has no support".into()))?;
    let wx = window.weights(x1 - x0 + 1);
    let wy = window.weights(y1 - y0 + 1);
    let ox = nx / 2 - grid.nx / 2;
    let oy = ny / 2 - grid.ny / 2;

    // Centred cell i goes to FFT bin (i - n/2) mod n.
    let mut buf = vec![Complex64::new(0.0, 0.0); nx * ny];
    for ix in x0..=x1 {
        for iy in y0..=y1 {
            let k = ix * grid.ny + iy;
            if !grid.support[k] {
                continue;
            }
            let px = (ix + ox + nx - nx / 2) % nx;
            let py = (iy + oy + ny - ny / 2) % ny;
            buf[px * ny + py] = grid.data[k] * (wx[ix - x0] * wy[iy - y0]);
        }
    }
    fft_2d(&mut buf, nx, ny);
    let norm = 1.0 / ((nx * ny) as f64).sqrt();
    let mut pixels = vec![Complex64::new(0.0, 0.0); nx * ny];
    for px in 0..nx {
        for py in 0..ny {
            let sx = (px + nx - nx / 2) % nx;
            let sy = (py + ny - ny / 2) % ny;
            pixels[px * ny + py] = buf[sx * ny + sy] * norm;
        }
    }
    Ok(SarImage {
        meta: ImageMeta {
            nx,
            ny,
            dx_m: std::f64::consts::TAU / (nx as f64 * grid.dkx),
            dy_m: std::f64::consts::TAU / (ny as f64 * grid.dky),
            range_axis_deg: grid.range_axis_deg,
            beta_mean_deg: grid.beta_mean_deg,
            window,
            channel: Channel::H,
            start_index: 0,
            swath_deg: 0.0,
            support_cells: grid.support_count(),
        },
        pixels,
    })
}

impl SarImage {
    pub fn nx(&self) -> usize {
        self.meta.nx
    }

    pub fn ny(&self) -> usize {
        self.meta.ny
    }

    pub fn pixel(&self, ix: usize, iy: usize) -> Complex64 {
        self.pixels[ix * self.meta.ny + iy]
    }

    /// Unit vectors `(cross_range, range)` of the image axes in the scene.
    pub fn axes(&self) -> ((f64, f64), (f64, f64)) {
        let p = self.meta.range_axis_deg.to_radians();
        ((p.sin(), -p.cos()), (p.cos(), p.sin()))
    }

    /// Scene ground-plane coordinates of a (possibly fractional) pixel.
    pub fn scene_position(&self, ix: f64, iy: f64) -> (f64, f64) {
        let ((cx, cy), (rx, ry)) = self.axes();
        let u = (ix - (self.meta.nx / 2) as f64) * self.meta.dx_m;
        let v = (iy - (self.meta.ny / 2) as f64) * self.meta.dy_m;
        (u * cx + v * rx, u * cy + v * ry)
    }

    /// Fractional pixel of a scene ground-plane point.
    pub fn pixel_of(&self, x: f64, y: f64) -> (f64, f64) {
        let ((cx, cy), (rx, ry)) = self.axes();
        let u = x * cx + y * cy;
        let v = x * rx + y * ry;
        (
            u / self.meta.dx_m + (self.meta.nx / 2) as f64,
            v / self.meta.dy_m + (self.meta.ny / 2) as f64,
        )
    }

    pub fn energy(&self) -> f64 {
        self.pixels.iter().map(|p| p.norm_sqr()).sum()
    }

    pub fn peak_magnitude(&self) -> f64 {
        self.pixels.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Magnitude in dB relative to the image peak, clamped at `floor_db`.
    pub fn magnitude_db(&self, floor_db: f64) -> Vec<f64> {
        let peak = self.peak_magnitude();
        self.pixels
            .iter()
            .map(|p| {
                if peak == 0.0 || p.norm() == 0.0 {
                    floor_db
                } else {
                    (20.0 * (p.norm() / peak).log10()).max(floor_db)
                }
            })
            .collect()
    }

    /// 16-bit grey levels in display order: row 0 is the far-range edge,
    /// column 0 the most negative cross-range.
    pub fn grey16(&self, floor_db: f64) -> Vec<u16> {
        let db = self.magnitude_db(floor_db);
        let (nx, ny) = (self.meta.nx, self.meta.ny);
        let mut out = Vec::with_capacity(nx * ny);
        for row in 0..ny {
            let iy = ny - 1 - row;
            for ix in 0..nx {
                let v = (db[ix * ny + iy] - floor_db) / -floor_db;
                out.push((v.clamp(0.0, 1.0) * 65535.0).round() as u16);
            }
        }
        out
    }

    pub fn to_pgm(&self, floor_db: f64) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n65535\n", self.meta.nx, self.meta.ny).into_bytes();
        for g in self.grey16(floor_db) {
            out.extend_from_slice(&g.to_be_bytes());
        }
        out
    }

    pub fn to_png(&self, floor_db: f64) -> Result<Vec<u8>, ImagingError> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.meta.nx as u32, self.meta.ny as u32);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Sixteen);
            let mut w = enc.write_header().map_err(|e| ImagingError::Io(e.to_string()))?;
            let bytes: Vec<u8> = self.grey16(floor_db).iter().flat_map(|g| g.to_be_bytes()).collect();
            w.write_image_data(&bytes).map_err(|e| ImagingError::Io(e.to_string()))?;
        }
        Ok(out)
    }

    pub fn write_png(&self, path: &Path, floor_db: f64) -> Result<(), ImagingError> {
        let bytes = self.to_png(floor_db)?;
        write_atomic(path, &bytes)
    }

    pub fn write_pgm(&self, path: &Path, floor_db: f64) -> Result<(), ImagingError> {
        write_atomic(path, &self.to_pgm(floor_db))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, ImagingError> {
        Ok(container::encode(IMAGE_KIND, &self.meta, &self.pixels)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<SarImage, ImagingError> {
        let (meta, pixels): (ImageMeta, _) = container::decode(IMAGE_KIND, bytes)?;
        check_shape(&meta, &pixels)?;
        Ok(SarImage { meta, pixels })
    }

    pub fn save(&self, path: &Path) -> Result<(), ImagingError> {
        Ok(container::write_file(path, IMAGE_KIND, &self.meta, &self.pixels)?)
    }

    pub fn load(path: &Path) -> Result<SarImage, ImagingError> {
        let (meta, pixels): (ImageMeta, _) = container::read_file(path, IMAGE_KIND)?;
        check_shape(&meta, &pixels)?;
        Ok(SarImage { meta, pixels })
    }
}

fn check_shape(meta: &ImageMeta, pixels: &[Complex64]) -> Result<(), ImagingError> {
    if pixels.len() != meta.nx * meta.ny {
        return Err(ImagingError::Container(ContainerError::Header(format!(
            "image {}x{} has {} pixels",
            meta.nx,
            meta.ny,
            pixels.len()
        ))));
    }
    Ok(())
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ImagingError> {
    let io = |e: std::io::Error| ImagingError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
    }
    let tmp = path.with_extension("partial");
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}
