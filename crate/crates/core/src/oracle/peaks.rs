use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::imaging::{SarImage, DEFAULT_DB_FLOOR};

/// Image maximum in scene coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagePeak {
    pub x_m: f64,
    pub y_m: f64,
    /// `20 log10` of the parabolic-vertex magnitude around the peak pixel.
    pub amplitude_db: f64,
    pub ix: usize,
    pub iy: usize,
}

/// Greedy maxima extraction: 8-neighbour local maxima in descending order,
/// each accepted only if no stronger accepted peak lies within
/// `exclusion_radius_px`. Peaks more than 40 dB below the strongest are
/// dropped.
pub fn find_peak(image: &SarImage, exclusion_radius_px: f64) -> Vec<ImagePeak> {
    find_peaks_with(image, exclusion_radius_px, DEFAULT_DB_FLOOR, usize::MAX)
}

pub fn find_peaks_with(image: &SarImage, exclusion_radius_px: f64, floor_db: f64, max_peaks: usize) -> Vec<ImagePeak> {
    let (nx, ny) = (image.nx(), image.ny());
    let mag: Vec<f64> = image.pixels.iter().map(|p| p.norm()).collect();
    let top = mag.iter().copied().fold(0.0, f64::max);
    if top == 0.0 || nx == 0 || ny == 0 {
        return Vec::new();
    }
    let at = |ix: isize, iy: isize| -> Option<f64> {
        if ix < 0 || iy < 0 || ix >= nx as isize || iy >= ny as isize {
            None
        } else {
            Some(mag[ix as usize * ny + iy as usize])
        }
    };
    let threshold = top * 10f64.powf(floor_db / 20.0);
    let mut cands = Vec::new();
    for ix in 0..nx as isize {
        for iy in 0..ny as isize {
            let v = at(ix, iy).unwrap();
            if v <= 0.0 || v < threshold {
                continue;
            }
            let mut is_max = true;
            'nb: for dx in -1..=1 {
                for dy in -1..=1 {
                    if (dx, dy) == (0, 0) {
                        continue;
                    }
                    if let Some(w) = at(ix + dx, iy + dy) {
                        // Ties broken by index so plateaus yield one candidate.
                        let later = (dx, dy) > (0, 0);
                        if w > v || (w == v && later) {
                            is_max = false;
                            break 'nb;
                        }
                    }
                }
            }
            if is_max {
                cands.push((v, ix as usize, iy as usize));
            }
        }
    }
    cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let r2 = exclusion_radius_px * exclusion_radius_px;
    let mut out: Vec<ImagePeak> = Vec::new();
    for (v, ix, iy) in cands {
        if out.len() >= max_peaks {
            break;
        }
        let clear = out.iter().all(|p| {
            let dx = p.ix as f64 - ix as f64;
            let dy = p.iy as f64 - iy as f64;
            dx * dx + dy * dy > r2
        });
        if !clear {
            continue;
        }
        let (ox, gx) = vertex(at(ix as isize - 1, iy as isize), v, at(ix as isize + 1, iy as isize));
        let (oy, gy) = vertex(at(ix as isize, iy as isize - 1), v, at(ix as isize, iy as isize + 1));
        let (x_m, y_m) = image.scene_position(ix as f64 + ox, iy as f64 + oy);
        out.push(ImagePeak {
            x_m,
            y_m,
            amplitude_db: 20.0 * (v + gx + gy).log10(),
            ix,
            iy,
        });
    }
    out
}

/// Sub-sample offset of the vertex of a parabola through three samples and
/// the height of the vertex above the centre sample.
fn vertex(left: Option<f64>, centre: f64, right: Option<f64>) -> (f64, f64) {
    match (left, right) {
        (Some(l), Some(r)) => {
            let den = l - 2.0 * centre + r;
            if den < 0.0 {
                let off = (0.5 * (l - r) / den).clamp(-0.5, 0.5);
                (off, -0.25 * (l - r) * off)
            } else {
                (0.0, 0.0)
            }
        }
        _ => (0.0, 0.0),
    }
}

pub fn write_peaks_csv<W: Write>(mut w: W, peaks: &[ImagePeak]) -> std::io::Result<()> {
    writeln!(w, "x_m,y_m,amplitude_db")?;
    for p in peaks {
        writeln!(w, "{},{},{}", p.x_m, p.y_m, p.amplitude_db)?;
    }
    Ok(())
}

/// Local maximum of a circular RCS trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcsPeak {
    pub index: usize,
    pub azimuth_deg: f64,
    pub value_db: f64,
    pub prominence_db: f64,
}

/// Local maxima of a closed (wrapping) trace with their topographic
/// prominence, keeping those with prominence ≥ `min_prominence_db`, sorted
/// by value descending.
///
/// Prominence is the height above the higher of the two minima reached
/// walking each way until a strictly higher sample. The global maximum's
/// reference is the global minimum.
pub fn rcs_peaks(values_db: &[f64], azimuths_deg: &[f64], min_prominence_db: f64) -> Vec<RcsPeak> {
    let n = values_db.len();
    assert_eq!(n, azimuths_deg.len(), "values and azimuths differ in length");
    if n < 3 {
        return Vec::new();
    }
    let v = |i: usize| values_db[i % n];
    let mut out = Vec::new();
    for i in 0..n {
        let (l, r) = (v(i + n - 1), v(i + 1));
        if !(v(i) > l && v(i) >= r) {
            continue;
        }
        // A run of equal samples counts once, at its first index.
        let mut base = f64::NEG_INFINITY;
        for dir in [n - 1, 1] {
            let mut lo = v(i);
            let mut j = i;
            for _ in 1..n {
                j = (j + dir) % n;
                if v(j) > v(i) {
                    break;
                }
                lo = lo.min(v(j));
            }
            base = base.max(lo);
        }
        let prominence = v(i) - base;
        if prominence >= min_prominence_db {
            out.push(RcsPeak {
                index: i,
                azimuth_deg: azimuths_deg[i],
                value_db: v(i),
                prominence_db: prominence,
            });
        }
    }
    out.sort_by(|a, b| b.value_db.total_cmp(&a.value_db).then(a.index.cmp(&b.index)));
    out
}
