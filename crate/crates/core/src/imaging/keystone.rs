use num_complex::Complex64;

use super::{ImagingError, KSpacePatch};
use crate::SPEED_OF_LIGHT;

/// Mean cos(β/2) below which the ground-plane support is treated as empty.
pub const COLLAPSE_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeystoneOptions {
    pub nx: usize,
    pub ny: usize,
    /// Cross-range cell size, rad/m. Native column spacing when `None`.
    pub dkx: Option<f64>,
    /// Range cell size, rad/m. Native frequency spacing when `None`.
    pub dky: Option<f64>,
    /// Relative scale error applied to the cross-range coordinate when
    /// looking up source samples. Zero for a correct resampling.
    pub perturbation: f64,
}

impl Default for KeystoneOptions {
    fn default() -> Self {
        KeystoneOptions {
            nx: 128,
            ny: 128,
            dkx: None,
            dky: None,
            perturbation: 0.0,
        }
    }
}

/// Uniform rectangular k-space grid in the patch frame. `y` is along the
/// mean bistatic bisector (range), `x` is cross-range. Cells are stored
/// `[ix * ny + iy]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampledGrid {
    pub nx: usize,
    pub ny: usize,
    pub dkx: f64,
    pub dky: f64,
    pub ky_center: f64,
    /// Azimuth of the range axis in the scene, degrees.
    pub range_axis_deg: f64,
    pub beta_mean_deg: f64,
    pub data: Vec<Complex64>,
    pub support: Vec<bool>,
}

impl ResampledGrid {
    pub fn kx(&self, ix: usize) -> f64 {
        (ix as f64 - (self.nx / 2) as f64) * self.dkx
    }

    pub fn ky(&self, iy: usize) -> f64 {
        self.ky_center + (iy as f64 - (self.ny / 2) as f64) * self.dky
    }

    pub fn support_count(&self) -> usize {
        self.support.iter().filter(|s| **s).count()
    }

    /// Inclusive index bounds `(ix0, ix1, iy0, iy1)` of the support.
    pub fn support_bounds(&self) -> Option<(usize, usize, usize, usize)> {
        let mut b: Option<(usize, usize, usize, usize)> = None;
        for ix in 0..self.nx {
            for iy in 0..self.ny {
                if self.support[ix * self.ny + iy] {
                    b = Some(match b {
                        None => (ix, ix, iy, iy),
                        Some((a, c, d, e)) => (a.min(ix), c.max(ix), d.min(iy), e.max(iy)),
                    });
                }
            }
        }
        b
    }
}

fn wrap_pi(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = (a + std::f64::consts::PI).rem_euclid(t) - std::f64::consts::PI;
    if r <= -std::f64::consts::PI {
        r + t
    } else {
        r
    }
}

pub fn keystone_resample(patch: &KSpacePatch, nx: usize, ny: usize) -> Result<ResampledGrid, ImagingError> {
    keystone_resample_with(
        patch,
        &KeystoneOptions {
            nx,
            ny,
            ..KeystoneOptions::default()
        },
    )
}

/// Two-pass separable resampling of the polar patch onto a rectangular grid:
/// first along each radial column onto uniform range rows, then across
/// columns onto uniform cross-range cells. Cells outside the support are
/// zero and flagged in `support`.
pub fn keystone_resample_with(patch: &KSpacePatch, opts: &KeystoneOptions) -> Result<ResampledGrid, ImagingError> {
    let (nx, ny) = (opts.nx, opts.ny);
    if nx < 2 || ny < 2 {
        return Err(ImagingError::InvalidGrid(format!("grid {nx}x{ny} too small")));
    }
    let nc = patch.n_columns;
    let nf = patch.n_frequencies;
    if nc == 0 || nf == 0 {
        return Err(ImagingError::InvalidGrid("empty patch".into()));
    }
    let beta_mean_deg = patch.beta_mean_deg();
    let mean_half = patch.mean_cos_half_beta();
    if mean_half < COLLAPSE_THRESHOLD {
        return Err(ImagingError::SupportCollapsed {
            beta_mean_deg,
            mean_cos_half_beta: mean_half,
        });
    }

    // Column directions from the highest-frequency sample.
    let top: Vec<(f64, f64)> = (0..nc)
        .map(|c| {
            let s = patch.sample(c, nf - 1);
            (s.kx, s.ky)
        })
        .collect();
    let kmax_top = top.iter().map(|(x, y)| x.hypot(*y)).fold(0.0, f64::max);
    let k_top = std::f64::consts::TAU * patch.frequencies_hz[nf - 1] / SPEED_OF_LIGHT;
    if kmax_top < 1e-9 * k_top {
        return Err(ImagingError::SupportCollapsed {
            beta_mean_deg,
            mean_cos_half_beta: mean_half,
        });
    }
    let tiny = 1e-9 * k_top;
    let mid = nc / 2;
    // Principal axis of the column directions, weighted by |K|^2.
    let axial = {
        let (c2, s2) = top.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x * x - y * y, b + 2.0 * x * y));
        0.5 * s2.atan2(c2)
    };
    let psi_mid = if top[mid].0.hypot(top[mid].1) > tiny {
        top[mid].1.atan2(top[mid].0)
    } else {
        axial
    };
    let (mut dmin, mut dmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &top {
        if x.hypot(*y) <= tiny {
            continue;
        }
        let d = wrap_pi(y.atan2(*x) - psi_mid);
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    let mut psi_c = psi_mid + 0.5 * (dmin + dmax);
    // A support that passes through the origin (receiver sweeping through
    // the forward direction) has columns on both sides, or fanning over more
    // than a right angle; use its principal axis as the range axis.
    let straddles = dmax - dmin > std::f64::consts::FRAC_PI_2
        || top
            .iter()
            .any(|(x, y)| x.hypot(*y) > tiny && x * psi_c.cos() + y * psi_c.sin() <= tiny);
    if straddles {
        psi_c = axial;
    }
    let range_axis = (psi_c.cos(), psi_c.sin());
    let cross_axis = (psi_c.sin(), -psi_c.cos());
    let kr = |s: &super::KSample| s.kx * range_axis.0 + s.ky * range_axis.1;
    let kc = |s: &super::KSample| s.kx * cross_axis.0 + s.ky * cross_axis.1;

    // Cross-range slope kc/kr per column; columns with no range extent are
    // dropped.
    let rho: Vec<Option<f64>> = (0..nc)
        .map(|c| {
            let s = patch.sample(c, nf - 1);
            let r = kr(s);
            (r.abs() > tiny).then(|| kc(s) / r)
        })
        .collect();
    let n_valid = rho.iter().flatten().count();
    if n_valid == 0 {
        return Err(ImagingError::SupportCollapsed {
            beta_mean_deg,
            mean_cos_half_beta: mean_half,
        });
    }

    let (mut kr_lo, mut kr_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &patch.samples {
        let r = kr(s);
        kr_lo = kr_lo.min(r);
        kr_hi = kr_hi.max(r);
    }
    let ky_center = 0.5 * (kr_lo + kr_hi);
    let k_ref = if kr_lo > 0.0 { ky_center } else { kr_lo.abs().max(kr_hi.abs()) };

    let g = if straddles {
        top.iter().map(|(x, y)| (x * range_axis.0 + y * range_axis.1).abs()).fold(0.0, f64::max) / k_top
    } else {
        kr(patch.sample(mid, nf - 1)) / k_top
    };
    let dky = match opts.dky {
        Some(d) => d,
        None => std::f64::consts::TAU * patch.frequency_step_hz / SPEED_OF_LIGHT * g,
    };
    let dkx = match opts.dkx {
        Some(d) => d,
        None if n_valid > 1 => {
            let (lo, hi) = rho.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(*r), b.max(*r)));
            k_ref * (hi - lo) / (n_valid - 1) as f64
        }
        None => k_ref * patch.azimuth_step_deg.to_radians() / 2.0,
    };
    if !(dkx > 0.0 && dky > 0.0 && dkx.is_finite() && dky.is_finite()) {
        return Err(ImagingError::InvalidGrid(format!("non-positive cell size {dkx} x {dky}")));
    }

    let ky_of = |iy: usize| ky_center + (iy as f64 - (ny / 2) as f64) * dky;
    let kx_of = |ix: usize| (ix as f64 - (nx / 2) as f64) * dkx;

    // Pass 1: along each column onto uniform range rows.
    let mut rows: Vec<Option<Complex64>> = vec![None; nc * ny];
    for c in 0..nc {
        if rho[c].is_none() {
            continue;
        }
        let col = patch.column(c);
        let r0 = kr(&col[0]);
        if nf == 1 {
            for iy in 0..ny {
                if (ky_of(iy) - r0).abs() <= 0.5 * dky {
                    rows[c * ny + iy] = Some(col[0].value);
                }
            }
            continue;
        }
        let step = (kr(&col[nf - 1]) - r0) / (nf - 1) as f64;
        for iy in 0..ny {
            let t = (ky_of(iy) - r0) / step;
            if !(-1e-9..=(nf - 1) as f64 + 1e-9).contains(&t) {
                continue;
            }
            let t = t.clamp(0.0, (nf - 1) as f64);
            let j = (t.floor() as usize).min(nf - 2);
            let w = t - j as f64;
            rows[c * ny + iy] = Some(col[j].value * (1.0 - w) + col[j + 1].value * w);
        }
    }

    // Pass 2: across columns onto uniform cross-range cells.
    let mut data = vec![Complex64::new(0.0, 0.0); nx * ny];
    let mut support = vec![false; nx * ny];
    let scale = 1.0 + opts.perturbation;
    for iy in 0..ny {
        let ky = ky_of(iy);
        let mut valid: Vec<(f64, Complex64)> = (0..nc)
            .filter_map(|c| Some((rho[c]? * ky, rows[c * ny + iy]?)))
            .collect();
        valid.sort_by(|a, b| a.0.total_cmp(&b.0));
        if valid.is_empty() {
            continue;
        }
        let snap = 1e-9 * dkx;
        for ix in 0..nx {
            let x = kx_of(ix) * scale;
            let value = if let Some(&(_, v)) = valid.iter().find(|(xc, _)| (xc - x).abs() <= snap) {
                Some(v)
            } else {
                valid.windows(2).find_map(|w| {
                    let ((xa, va), (xb, vb)) = (w[0], w[1]);
                    if xa <= x && x <= xb && xb > xa {
                        let t = (x - xa) / (xb - xa);
                        Some(va * (1.0 - t) + vb * t)
                    } else {
                        None
                    }
                })
            };
            if let Some(v) = value {
                data[ix * ny + iy] = v;
                support[ix * ny + iy] = true;
            }
        }
    }

    Ok(ResampledGrid {
        nx,
        ny,
        dkx,
        dky,
        ky_center,
        range_axis_deg: psi_c.to_degrees().rem_euclid(360.0),
        beta_mean_deg,
        data,
        support,
    })
}
